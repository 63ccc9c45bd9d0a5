"""
Testes das métricas por execução e do resumo da varredura.
"""
import math

import numpy as np
import pytest

from app.services.freqsim import RelayBank, TimeSeries, load_shed_step
from app.services.metrics import (
    CellResult,
    FrequencyMetrics,
    evaluate,
    nadir,
    rocof,
    shed_total,
    summarize,
)


def series(f, t=None, shed=None, t_m=None, trip_time=1.0, **flags):
    f = np.asarray(f, dtype=float)
    t = np.arange(len(f)) * 0.01 if t is None else np.asarray(t, dtype=float)
    zeros = np.zeros_like(f)
    return TimeSeries(
        t=t,
        f=f,
        p_t=zeros,
        p_j=zeros,
        p_w=zeros,
        p_d=zeros,
        shed=zeros if shed is None else np.asarray(shed, dtype=float),
        t_m=np.full_like(f, 10.0) if t_m is None else np.asarray(t_m, dtype=float),
        trip_time=trip_time,
        **flags,
    )


def metrics(nadir=49.0, rocof=-1.0, inertia=5.0, shed=0.0):
    return FrequencyMetrics(
        nadir=nadir,
        rocof=rocof,
        rocof_magnitude=abs(rocof),
        shed_total=shed,
        steady_state_error=0.0,
        inertia_change=inertia,
    )


def cell(index, without, with_, baseline=None):
    return CellResult(
        index=index,
        demand=400.0,
        wind=60.0,
        without=without,
        with_=with_,
        baseline=baseline or metrics(nadir=49.41, rocof=-0.44, inertia=0.0),
    )


# =============================================================================
# POR EXECUÇÃO
# =============================================================================


class TestRunMetrics:
    def test_flat_series(self):
        ts = series(np.full(300, 50.0))
        assert nadir(ts) == 50.0
        assert rocof(ts) == 0.0

    def test_dip(self):
        f = np.full(300, 50.0)
        f[150] = 48.7
        assert nadir(series(f)) == 48.7

    def test_dip_before_trip_ignored(self):
        f = np.full(300, 50.0)
        f[20] = 48.0
        f[150] = 49.2
        assert nadir(series(f)) == 49.2

    def test_linear_slope(self):
        t = np.arange(0, 301) * 0.01
        f = np.where(t < 1.0, 50.0, 50.0 - (t - 1.0))
        assert rocof(series(f, t=t)) == pytest.approx(-1.0)

    def test_window_interpolated_between_samples(self):
        t = np.arange(0, 31) * 0.1 + 0.05
        f = 50.0 - 2.0 * np.clip(t - 1.0, 0.0, None)
        assert rocof(series(f, t=t)) == pytest.approx(-2.0)

    def test_window_outside_series(self):
        ts = series(np.full(121, 50.0))
        with pytest.raises(ValueError, match="outside the series"):
            rocof(ts)

    def test_shed_total(self):
        shed = np.zeros(300)
        shed[150:] = 14.6
        shed[170:] = 30.8
        assert shed_total(series(np.full(300, 50.0), shed=shed)) == pytest.approx(30.8)
        assert shed_total(series(np.full(300, 50.0))) == 0.0

    @pytest.mark.parametrize("level,expected", [("demand_peak", 30.8), ("demand_valley", 12.8)])
    def test_two_step_shedding(self, dataset, level, expected):
        relays = RelayBank.for_demand(getattr(dataset.system, level), dataset.system)
        total = sum(load_shed_step(relays, 48.85, 0.001) for _ in range(250))
        assert total == pytest.approx(expected)

    def test_collapse_before_window(self):
        t = np.arange(0, 121) * 0.01
        f = np.where(t < 1.0, 50.0, 50.0 - 20.0 * (t - 1.0))
        m = evaluate(series(f, t=t, collapsed=True))
        assert m.collapsed
        assert math.isnan(m.rocof)
        assert m.nadir == pytest.approx(46.0)

    def test_inertia_change(self):
        t_m = np.full(300, 30.0)
        t_m[100:] = 20.0
        m = evaluate(series(np.full(300, 50.0), t_m=t_m))
        assert m.inertia_change == pytest.approx(10.0)
        assert "nadir=50.000000" in m.line()


# =============================================================================
# RESUMO
# =============================================================================


class TestSummarize:
    def _row(self, summary, setting, metric):
        frame = summary.frame()
        return frame[(frame.setting == setting) & (frame.metric == metric)].iloc[0]

    def test_identical_cells_have_zero_variance(self):
        m = metrics()
        summary = summarize([cell((0, 0), m, m), cell((0, 1), m, m)])
        assert (summary.frame()["variance"] == 0.0).all()

    def test_two_cell_hand_computation(self):
        results = [
            cell((0, 0), metrics(nadir=49.0, shed=30.8, inertia=7.5), metrics(nadir=49.2, shed=12.8, inertia=7.5)),
            cell((0, 1), metrics(nadir=48.6, shed=0.0, inertia=11.0), metrics(nadir=48.8, shed=0.0, inertia=11.0)),
        ]
        summary = summarize(results)
        row = self._row(summary, "without", "nadir")
        assert row["mean"] == pytest.approx(48.8)
        assert row["variance"] == pytest.approx(0.04)
        row = self._row(summary, "without", "inertia_change")
        assert row["mean"] == pytest.approx(9.25)
        assert row["variance"] == pytest.approx(3.0625)
        row = self._row(summary, "with", "shed_total")
        assert row["mean"] == pytest.approx(6.4)
        assert row["variance"] == pytest.approx(40.96)
        assert summary.cells_improved == 1
        assert summary.cells_worsened == 0
        assert summary.shed_cells_without == 1
        assert summary.shed_cells_with == 1
        assert summary.mean_nadir_gain_mhz == pytest.approx(200.0)

    def test_rows_cover_every_setting_and_metric(self):
        m = metrics()
        summary = summarize([cell((0, 0), m, m)])
        assert len(summary.rows) == 3 * 4
        assert set(summary.frame().setting) == {"without", "with", "baseline"}

    def test_failed_cells_are_skipped(self):
        m = metrics()
        failed = CellResult(index=(1, 0), demand=900.0, wind=30.0, status="infeasible")
        summary = summarize([cell((0, 0), m, m), failed])
        assert summary.cells == 2
        assert summary.feasible_cells == 1

    def test_nothing_to_summarize(self):
        with pytest.raises(ValueError):
            summarize([CellResult(index=(0, 0), demand=900.0, wind=30.0, status="infeasible")])

    def test_row_export(self):
        m = metrics(nadir=48.9)
        row = cell((2, 3), m, m).to_row()
        assert (row["row"], row["col"]) == (2, 3)
        assert row["without_nadir"] == 48.9
        assert row["baseline_inertia_change"] == 0.0
