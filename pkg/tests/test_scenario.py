"""
Testes da grade de cenários e da contingência N-1.
"""
import numpy as np
import pytest

from app.config import settings
from app.core.errors import ScenarioError
from app.services.fleet import aggregate_inertia
from app.services.freqsim import SimConfig
from app.services.scenario import Scenario, ScenarioGrid, apply_n1, build_grid, run_cell, run_sweep, solve_cell
from conftest import make_unit


@pytest.fixture
def small_budget(monkeypatch):
    monkeypatch.setattr(settings, "UC_NODE_BUDGET", 2000)


# =============================================================================
# N-1
# =============================================================================


class TestApplyN1:
    def test_largest_dispatch_tripped(self):
        units = [make_unit("A", inertia_h=5.0), make_unit("B", inertia_h=2.0)]
        case = apply_n1(Scenario.from_dispatch(units, {"A": 60.0, "B": 40.0}, 100.0))
        assert case.tripped_unit == "A"
        assert case.imbalance_mw == 60.0
        assert case.imbalance_pct == pytest.approx(60.0)

    def test_tie_goes_to_smaller_id(self):
        units = [make_unit("B"), make_unit("A")]
        case = apply_n1(Scenario.from_dispatch(units, {"A": 50.0, "B": 50.0}, 100.0))
        assert case.tripped_unit == "A"

    def test_inertia_bookkeeping(self):
        units = [make_unit("A", rated=80, inertia_h=5.0), make_unit("B", rated=50, inertia_h=2.45)]
        case = apply_n1(Scenario.from_dispatch(units, {"A": 30.0, "B": 40.0}, 70.0))
        assert case.tripped_unit == "B"
        assert case.t_m_pre == pytest.approx(aggregate_inertia(units, 100.0))
        assert case.t_m_post == case.t_m_pre - 2.0 * 2.45 * 50 / 100.0

    def test_participation_renormalized(self):
        units = [make_unit(x, agc_factor_ku=k) for x, k in (("A", 1.0), ("B", 1.0), ("C", 3.0))]
        case = apply_n1(Scenario.from_dispatch(units, {"A": 50.0, "B": 30.0, "C": 30.0}, 110.0))
        assert case.ku_post == pytest.approx({"B": 0.25, "C": 0.75})

    def test_single_unit_rejected(self):
        with pytest.raises(ScenarioError, match="at least 2"):
            apply_n1(Scenario.from_dispatch([make_unit("A")], {"A": 50.0}, 50.0))

    def test_infeasible_cell_rejected(self):
        with pytest.raises(ScenarioError):
            apply_n1(Scenario(demand=100.0, wind=0.0, status="infeasible"))


# =============================================================================
# GRADE
# =============================================================================


class TestGrid:
    def test_cell_count_invariant(self):
        with pytest.raises(ValueError):
            ScenarioGrid(demand_levels=(300.0, 350.0), wind_levels=(30.0,), cells=[])

    def test_levels_must_increase(self):
        cells = [Scenario(demand=300.0, wind=30.0), Scenario(demand=250.0, wind=30.0)]
        with pytest.raises(ValueError, match="strictly increasing"):
            ScenarioGrid(demand_levels=(300.0, 250.0), wind_levels=(30.0,), cells=cells)

    def test_wind_above_installed(self, dataset):
        with pytest.raises(ScenarioError, match="installed capacity"):
            build_grid([400.0], [200.0], dataset, jobs=1)

    def test_infeasible_cell_flagged(self, dataset, small_budget):
        grid = build_grid([400.0, 900.0], [60.0], dataset, jobs=1)
        assert len(grid.cells) == 2
        assert grid.cell(1, 0).status == "infeasible"
        assert [c.index for c in grid.feasible_cells] == [(0, 0)]
        with pytest.raises(ScenarioError):
            grid.cell(2, 0)

    def test_solved_cell(self, dataset, small_budget):
        cell = solve_cell((2, 1), 400.0, 60.0, dataset)
        assert cell.feasible
        assert sum(cell.dispatch.values()) + cell.wind == pytest.approx(400.0, abs=1e-6)
        top = max(cell.dispatch.values())
        assert cell.tripped_unit == min(uid for uid, p in cell.dispatch.items() if p == top)
        assert cell.imbalance_mw == pytest.approx(cell.dispatch[cell.tripped_unit])
        tripped = dataset.unit(cell.tripped_unit)
        assert cell.t_m_post == pytest.approx(
            cell.t_m_pre - 2.0 * tripped.inertia_h * tripped.rated_power / dataset.system.s_base
        )
        assert cell.solution.committed_at(12) == sorted(cell.dispatch)

    def test_run_cell_produces_three_settings(self, dataset):
        names = ("T-CC1", "T-CC2", "T-ST1", "T-ST2")
        scenario = apply_n1(
            Scenario.from_dispatch(
                [dataset.unit(n) for n in names],
                {"T-CC1": 100.0, "T-CC2": 80.0, "T-ST1": 65.0, "T-ST2": 65.0},
                400.0,
                wind=90.0,
                index=(0, 0),
            )
        )
        result, series = run_cell(scenario, dataset, SimConfig(t_end=5.0, dt=0.005, preroll=1.0))
        assert result.status == "ok"
        assert set(series) == {"without", "with", "baseline"}
        assert result.without is not None and result.with_ is not None and result.baseline is not None
        assert result.without.inertia_change == pytest.approx(scenario.t_m_pre - scenario.t_m_post)
        assert result.baseline.inertia_change == 0.0

    @pytest.mark.slow
    def test_default_grid(self, dataset):
        levels = dataset.scenarios
        grid = build_grid(levels.demand_levels, levels.wind_levels, dataset)
        assert len(grid.cells) == 30
        assert grid.cell(5, 3).demand == 550.0 and grid.cell(5, 3).wind == 120.0
        pct = {round(c.imbalance_pct, 6) for c in grid.feasible_cells}
        assert len(pct) >= 2


# =============================================================================
# GRADE PADRÃO COMPLETA
# =============================================================================


@pytest.fixture(scope="module")
def default_grid(dataset):
    levels = dataset.scenarios
    return build_grid(levels.demand_levels, levels.wind_levels, dataset, jobs=4)


@pytest.fixture(scope="module")
def default_results(dataset, default_grid):
    config = SimConfig(dt=0.002, sample_interval=0.05, preroll=1.0)
    return [r for r, _ in run_sweep(default_grid, dataset, config, jobs=4)]


@pytest.mark.slow
class TestDefaultSweep:
    def test_every_cell_meets_gap(self, default_grid):
        solved = [c for c in default_grid.cells if c.solution is not None]
        assert solved
        for cell in solved:
            assert cell.solution.status != "gap_not_met", cell.label
            assert cell.solution.gap <= 0.01 + 1e-12, cell.label

    def test_inertia_bookkeeping_every_cell(self, dataset, default_grid):
        s_base = dataset.system.s_base
        for cell in default_grid.feasible_cells:
            tripped = dataset.unit(cell.tripped_unit)
            survivors = [u for u in cell.units if u.id != cell.tripped_unit]
            assert cell.t_m_pre == pytest.approx(aggregate_inertia(cell.units, s_base)), cell.label
            assert cell.t_m_post == pytest.approx(
                cell.t_m_pre - 2.0 * tripped.inertia_h * tripped.rated_power / s_base
            ), cell.label
            assert cell.t_m_post == pytest.approx(aggregate_inertia(survivors, s_base)), cell.label

    def test_control_never_sheds_more_and_sometimes_less(self, default_results):
        ok = [r for r in default_results if r.status == "ok"]
        assert ok
        assert all(r.with_.shed_total <= r.without.shed_total + 1e-9 for r in ok)
        assert any(r.with_.shed_total < r.without.shed_total - 1e-6 for r in ok)

    def test_frequency_restored(self, default_results):
        for r in default_results:
            if r.status != "ok":
                continue
            for m in (r.without, r.with_):
                if not m.collapsed:
                    assert abs(m.steady_state_error) < 0.005, r.index

    def test_full_model_spread_exceeds_baseline(self, default_results):
        ok = [r for r in default_results if r.status == "ok" and not r.without.collapsed]
        full = np.var([r.without.rocof for r in ok])
        simple = np.var([r.baseline.rocof for r in ok])
        assert full > simple
