"""
Testes do aerogerador equivalente: curvas, duas massas, controlador de
frequência e agregação do parque.
"""
from dataclasses import replace

import numpy as np
import pytest

from app.services.fleet import TwoMassParams, WindControllerParams, WindFleet
from app.services.freqsim import SimConfig, simulate
from app.services.scenario import Scenario
from app.services.windctl import (
    ControllerMode,
    PowerCurves,
    WindState,
    aggregate_wind_power,
    controller_step,
    equivalent_turbines,
    power_coefficient,
    recovery_point,
    steady_state,
    two_mass_derivatives,
    two_mass_step,
)


@pytest.fixture(scope="module")
def curves():
    return PowerCurves(0.80, 1.2)


@pytest.fixture
def params():
    return WindControllerParams()


# =============================================================================
# CURVAS
# =============================================================================


class TestPowerCurves:
    def test_optimum(self, curves):
        assert curves.lambda_opt == pytest.approx(6.325, abs=0.01)
        assert curves.cp_max == pytest.approx(float(power_coefficient(curves.lambda_opt)))
        assert curves.omega_opt == pytest.approx(1.2 * 0.8 ** (1 / 3))

    def test_mppt_meets_aero_at_optimum(self, curves):
        assert curves.p_mppt(curves.omega_opt) == pytest.approx(0.8)
        assert curves.p_aero(curves.omega_opt) == pytest.approx(0.8)

    def test_aero_follows_power_coefficient(self, curves):
        for omega in (0.7, 0.9, curves.omega_opt, 1.25):
            lam = curves.lambda_opt * omega / curves.omega_opt
            expected = 0.8 * float(power_coefficient(lam)) / curves.cp_max
            assert curves.p_aero(omega) == pytest.approx(expected, rel=1e-12)

    def test_aero_above_mppt_below_optimum(self, curves):
        omega = 0.95 * curves.omega_opt
        assert curves.p_mt(omega) > curves.p_mppt(omega)

    def test_table_resolution(self, curves):
        table = curves.table()
        assert table["omega"].iloc[0] == pytest.approx(0.3)
        assert table["omega"].iloc[-1] == pytest.approx(1.3)
        assert np.allclose(np.diff(table["omega"]), 0.001)


# =============================================================================
# DUAS MASSAS
# =============================================================================


class TestTwoMass:
    def test_equilibrium_unchanged(self, curves):
        params = TwoMassParams()
        state = steady_state(curves, params)
        p = curves.p_aero(state.omega_rotor)
        for _ in range(200):
            state = two_mass_step(state, p, state.p_sp, 0.005, params)
        assert state.omega_rotor == pytest.approx(curves.omega_opt, abs=1e-9)
        assert state.omega_gen == pytest.approx(curves.omega_opt, abs=1e-9)

    def test_generator_decelerates_first(self, curves):
        params = TwoMassParams()
        state = steady_state(curves, params)
        p = curves.p_aero(state.omega_rotor)
        state = two_mass_step(state, p, state.p_sp + 0.1, 0.01, params)
        drop_gen = curves.omega_opt - state.omega_gen
        drop_rotor = curves.omega_opt - state.omega_rotor
        assert drop_gen > 0
        assert drop_gen > drop_rotor

    def test_zero_stiffness_decouples(self):
        params = TwoMassParams(shaft_stiffness=0.0, mutual_damping=0.0)
        a = two_mass_derivatives(1.0, 1.0, 0.0, 0.8, 0.0, params)
        b = two_mass_derivatives(1.0, 1.0, 0.0, 0.8, 1.0, params)
        assert a[0] == b[0]
        assert a[1] != b[1]

    def test_speed_limit_flag(self, curves):
        params = TwoMassParams()
        state = replace(steady_state(curves, params), omega_gen=1.29, omega_rotor=1.29)
        for _ in range(50):
            state = two_mass_step(state, 1.5, 0.0, 0.05, params)
        assert state.speed_limit_hit


# =============================================================================
# CONTROLADOR
# =============================================================================


class TestController:
    def test_nominal_frequency_tracks_mppt(self, curves, params):
        state = steady_state(curves, TwoMassParams())
        for _ in range(100):
            state = controller_step(state, 50.0, 0.01, curves, params)
        assert state.mode == ControllerMode.NORMAL
        assert state.p_sp == pytest.approx(0.8)

    def test_overproduction_is_capped(self, curves, params):
        state = steady_state(curves, TwoMassParams())
        state = controller_step(state, 48.0, 0.01, curves, params)
        assert state.mode == ControllerMode.OVERPRODUCTION
        assert state.p_sp == pytest.approx(1.15 * state.p_pre)

    def test_overproduction_proportional(self, curves, params):
        state = steady_state(curves, TwoMassParams())
        state = controller_step(state, 49.5, 0.01, curves, params)
        assert state.p_sp == pytest.approx(state.p_pre * (1.0 + 0.15 * 0.5))

    def test_small_deviation_does_not_arm(self, curves, params):
        state = steady_state(curves, TwoMassParams())
        state = controller_step(state, 49.95, 0.01, curves, params)
        assert state.mode == ControllerMode.NORMAL

    def test_disabled_controller_ignores_frequency(self, curves, params):
        state = steady_state(curves, TwoMassParams())
        state = controller_step(state, 48.0, 0.01, curves, params, enabled=False)
        assert state.mode == ControllerMode.NORMAL
        assert state.p_sp == pytest.approx(0.8)

    def test_speed_drop_enters_recovery(self, curves, params):
        state = steady_state(curves, TwoMassParams())
        state = controller_step(state, 49.0, 0.01, curves, params)
        slow = replace(state, omega_rotor=0.94 * curves.omega_opt)
        state = controller_step(slow, 49.0, 0.01, curves, params)
        assert state.mode == ControllerMode.RECOVERY
        assert state.omega_v == pytest.approx(slow.omega_rotor)
        assert state.p2 == pytest.approx(recovery_point(curves, slow.omega_rotor, 0.95))
        # recuperação nunca injeta acima da saída pré-evento
        assert state.p_sp <= state.p_pre

    def test_recovery_completes_and_latches(self, curves, params):
        state = steady_state(curves, TwoMassParams())
        state = controller_step(state, 49.0, 0.01, curves, params)
        state = controller_step(replace(state, omega_rotor=0.94 * curves.omega_opt), 49.0, 0.01, curves, params)
        state = controller_step(replace(state, omega_rotor=curves.omega_opt), 49.0, 0.01, curves, params)
        assert state.mode == ControllerMode.NORMAL
        assert state.event_done
        # evento já tratado: não rearma
        state = controller_step(state, 48.0, 0.01, curves, params)
        assert state.mode == ControllerMode.NORMAL

    def test_degenerate_recovery_point(self, curves):
        omega = curves.omega_opt
        assert recovery_point(curves, omega, 0.95) == pytest.approx(curves.p_mppt(omega))
        assert recovery_point(curves, omega, 0.25) == pytest.approx(curves.p_mppt(omega))

    def test_steps_update_state_in_place(self, curves, params):
        state = steady_state(curves, TwoMassParams())
        assert two_mass_step(state, 0.8, 0.9, 0.01, TwoMassParams()) is state
        assert controller_step(state, 49.0, 0.01, curves, params) is state
        assert state.mode == ControllerMode.OVERPRODUCTION

    def test_presets(self):
        original = WindControllerParams.preset("original")
        assert (original.op_cap_delta_pop, original.recovery_x) == (0.10, 0.75)
        with pytest.raises(ValueError):
            WindControllerParams.preset("unknown")


# =============================================================================
# AGREGAÇÃO
# =============================================================================


class TestAggregation:
    def _state(self, p):
        return WindState(omega_rotor=1.0, omega_gen=1.0, shaft_twist=0.0, p_sp=p)

    def test_zero_output(self):
        assert aggregate_wind_power(self._state(0.0), WindFleet(n_wt=90)) == 0.0

    def test_capacity_factor_output(self):
        assert aggregate_wind_power(self._state(0.8), WindFleet(n_wt=90, turbine_rating=2.0)) == pytest.approx(144.0)

    def test_linear_in_turbines(self):
        fleet = WindFleet(n_wt=90)
        state = self._state(0.8)
        assert aggregate_wind_power(state, fleet, n_wt=180) == pytest.approx(2 * aggregate_wind_power(state, fleet))

    def test_equivalent_turbines(self, dataset):
        assert equivalent_turbines(90.0, dataset.wind) == pytest.approx(56.25)


# =============================================================================
# NA REDE
# =============================================================================


def _wind_cell(dataset):
    names = ("T-CC1", "T-CC2", "T-ST1", "T-ST2")
    dispatch = {"T-CC1": 100.0, "T-CC2": 80.0, "T-ST1": 65.0, "T-ST2": 65.0}
    return Scenario.from_dispatch(
        [dataset.unit(n) for n in names], dispatch, 400.0, wind=90.0, tripped_unit="T-CC1"
    )


class TestWindInGrid:
    CONFIG = dict(t_end=40.0, dt=0.005, sample_interval=0.01, preroll=1.0)

    def test_uncontrolled_wind_is_frequency_insensitive(self, dataset):
        ts = simulate(_wind_cell(dataset), dataset, wind_control=False, config=SimConfig(**self.CONFIG))
        assert ts.p_w[0] == pytest.approx(90.0)
        scale = 56.25 * 2.0
        assert np.max(np.abs(ts.p_w - ts.p_w[0])) / scale < 1e-3

    def test_overproduction_cap_in_run(self, dataset):
        ts = simulate(_wind_cell(dataset), dataset, wind_control=True, config=SimConfig(**self.CONFIG))
        assert ts.p_w.max() <= 1.15 * ts.p_w[0] + 1e-9
        assert ts.p_w.max() > ts.p_w[0]

    def test_higher_recovery_point_has_shallower_dip(self, dataset):
        cell = _wind_cell(dataset)
        config = SimConfig(**self.CONFIG)
        modified = dataset.wind.controller
        original_x = modified.model_copy(update={"recovery_x": 0.75})
        dip_95 = simulate(cell, dataset, True, config, modified).p_w.min()
        dip_75 = simulate(cell, dataset, True, config, original_x).p_w.min()
        assert dip_95 > dip_75

    def test_control_improves_nadir(self, dataset):
        cell = _wind_cell(dataset)
        config = SimConfig(**self.CONFIG)
        off = simulate(cell, dataset, False, config)
        on = simulate(cell, dataset, True, config)
        assert on.f.min() >= off.f.min()
        assert on.shed[-1] <= off.shed[-1]

    @pytest.mark.slow
    def test_rotor_returns_to_mppt(self, dataset):
        config = SimConfig(t_end=300.0, dt=0.01, sample_interval=0.1, preroll=1.0)
        ts = simulate(_wind_cell(dataset), dataset, True, config)
        assert ts.metadata["wind_final_mode"] == "normal"
        assert ts.p_w[-1] == pytest.approx(ts.p_w[0], rel=0.01)
