"""
Testes do modelo de frota: validação do YAML, agregação de inércia e
programa de deslastre.
"""
import copy
import logging

import pytest
import yaml

from app.core.errors import FleetConfigError, ScenarioError
from app.services.fleet import (
    aggregate_inertia,
    fleet_composition,
    load_dataset,
    load_fleet,
    parse_fleet,
    shed_amount,
)
from conftest import FLEET_YAML, make_unit

# (passo, MW na ponta, MW no vale)
SHED_TABLE = [
    (1, 14.6, 5.8),
    (2, 16.2, 7.0),
    (3, 17.1, 8.6),
    (4, 41.1, 18.8),
    (5, 8.0, 4.1),
    (6, 27.3, 11.8),
    (7, 17.5, 7.7),
    (8, 17.9, 9.7),
]


@pytest.fixture
def raw_fleet():
    with open(FLEET_YAML, "r", encoding="utf-8") as fh:
        return yaml.safe_load(fh)


# =============================================================================
# CARREGAMENTO E VALIDAÇÃO
# =============================================================================


class TestFleetLoading:
    def test_default_composition(self, dataset):
        assert len(dataset.units) == 16
        assert fleet_composition(dataset.units) == {
            "steam": 4,
            "gas": 5,
            "diesel": 5,
            "combined_cycle": 2,
        }

    def test_load_fleet_tuple(self):
        units, system, wind = load_fleet(str(FLEET_YAML))
        assert len(units) == 16
        assert system.f0 == 50.0
        assert wind.installed_capacity == pytest.approx(190.0)
        assert wind.available_power == pytest.approx(152.0)

    def test_load_logs_composition(self, caplog):
        with caplog.at_level(logging.INFO, logger="app.services.fleet"):
            load_dataset(str(FLEET_YAML))
        assert "16 thermal units (steam=4, gas=5, diesel=5, combined_cycle=2)" in caplog.text

    def test_defaults_filled_from_technology(self, dataset):
        diesel = dataset.unit("J-D1")
        assert diesel.inertia_h == pytest.approx(2.45)
        assert diesel.droop_r == pytest.approx(0.05)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_dataset(str(tmp_path / "nope.yaml"))

    def test_zero_droop_rejected(self, raw_fleet):
        raw_fleet["units"][0]["droop_r"] = 0
        with pytest.raises(FleetConfigError, match="droop_r"):
            parse_fleet(raw_fleet)

    def test_nine_segments_rejected(self, raw_fleet):
        raw_fleet["units"][0]["cost_segments"] = raw_fleet["units"][0]["cost_segments"][:9]
        with pytest.raises(FleetConfigError, match="10 pieces"):
            parse_fleet(raw_fleet)

    def test_non_convex_curve_rejected(self, raw_fleet):
        segs = raw_fleet["units"][0]["cost_segments"]
        segs[0], segs[1] = segs[1], segs[0]
        with pytest.raises(FleetConfigError, match="non-decreasing"):
            parse_fleet(raw_fleet)

    def test_widths_must_span_band(self, raw_fleet):
        raw_fleet["units"][0]["rated_power"] = 120
        with pytest.raises(FleetConfigError, match="segment widths"):
            parse_fleet(raw_fleet)

    def test_duplicate_ids_rejected(self, raw_fleet):
        raw_fleet["units"].append(copy.deepcopy(raw_fleet["units"][0]))
        with pytest.raises(FleetConfigError, match="unique"):
            parse_fleet(raw_fleet)

    def test_empty_units_rejected(self, raw_fleet):
        raw_fleet["units"] = []
        with pytest.raises(FleetConfigError):
            parse_fleet(raw_fleet)

    def test_wind_capacity_mismatch_rejected(self, raw_fleet):
        raw_fleet["wind"]["installed_capacity"] = 100.0
        with pytest.raises(FleetConfigError, match="installed_capacity"):
            parse_fleet(raw_fleet)

    def test_fuel_cost_curve(self):
        unit = make_unit("U1", rated=100, min_power=20, marginal=30, slope=1, no_load_cost=50)
        assert unit.min_power_cost == pytest.approx(50 + 30 * 20)
        # 12 MW acima do mínimo: 8 MW a 30 + 4 MW a 31
        assert unit.fuel_cost(32) == pytest.approx(650 + 8 * 30 + 4 * 31)


# =============================================================================
# INÉRCIA
# =============================================================================


class TestAggregateInertia:
    def test_single_machine(self):
        unit = make_unit("U1", rated=100, min_power=20, inertia_h=5.0)
        assert aggregate_inertia([unit], 100.0) == pytest.approx(10.0)

    def test_two_machines(self):
        a = make_unit("A", rated=50, min_power=10, inertia_h=5.0)
        b = make_unit("B", rated=50, min_power=10, inertia_h=2.45, tech="diesel")
        assert aggregate_inertia([a, b], 100.0) == pytest.approx(7.45)

    def test_full_fleet(self, dataset):
        # 2 CC: 22; 4 vapor: 15 + 12; 5 gás: 15 + 2.35; 5 diesel: 1.96 + 3.528
        assert aggregate_inertia(dataset.units, 100.0) == pytest.approx(71.838)

    def test_empty_commitment(self):
        with pytest.raises(ScenarioError):
            aggregate_inertia([], 100.0)


# =============================================================================
# DESLASTRE
# =============================================================================


class TestShedAmount:
    @pytest.mark.parametrize("step,peak,valley", SHED_TABLE)
    def test_table_cells(self, dataset, step, peak, valley):
        system = dataset.system
        assert shed_amount(step, system.demand_peak, system) == pytest.approx(peak)
        assert shed_amount(step, system.demand_valley, system) == pytest.approx(valley)

    def test_table_thresholds_and_delays(self, dataset):
        steps = dataset.system.shed_table.steps
        assert [s.threshold for s in steps] == [48.9, 48.9, 48.8, 48.8, 48.5, 48.5, 48.4, 48.1]
        assert [s.delay for s in steps] == [0.1, 0.2, 0.4, 0.6, 0.1, 0.2, 0.4, 0.1]

    def test_midpoint_interpolation(self, dataset):
        assert shed_amount(1, 425.0, dataset.system) == pytest.approx(10.2)

    def test_demand_outside_range(self, dataset):
        with pytest.raises(ScenarioError):
            shed_amount(1, 600.0, dataset.system)

    def test_invalid_step(self, dataset):
        with pytest.raises(ValueError):
            shed_amount(9, 400.0, dataset.system)
