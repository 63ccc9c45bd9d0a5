"""
Aerogerador equivalente de velocidade variável
Curvas de potência (MPPT e torque máximo), trem de acionamento em duas
massas e controlador de frequência em três modos: normal, sobreprodução
e recuperação.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from app.services.fleet import TwoMassParams, WindControllerParams, WindFleet

logger = logging.getLogger(__name__)

SPEED_LIMITS = (0.3, 1.3)
CURVE_RESOLUTION = 0.001


class ControllerMode(str, Enum):
    NORMAL = "normal"
    OVERPRODUCTION = "overproduction"
    RECOVERY = "recovery"


# =============================================================================
# CURVAS DE POTÊNCIA
# =============================================================================


def power_coefficient(tip_speed_ratio, pitch: float = 0.0):
    """Cp(λ, θ) da aproximação analítica usual para turbinas de três pás"""
    lam = tip_speed_ratio
    inv_li = 1.0 / (lam + 0.08 * pitch) - 0.035 / (pitch**3 + 1.0)
    cp = 0.22 * (116.0 * inv_li - 0.4 * pitch - 5.0) * np.exp(-12.5 * inv_li)
    return np.maximum(cp, 0.0)


class PowerCurves:
    """
    Curvas em pu da base da máquina, a velocidade de vento fixa.

    P_MPPT(Ω) segue a lei cúbica que passa pelo ponto ótimo; P_mt(Ω) é a
    potência mecânica disponível na velocidade Ω (limite de torque máximo
    extraível do vento).
    """

    def __init__(self, capacity_factor: float, rated_rotor_speed: float = 1.2):
        grid = np.arange(2.0, 15.0, 1e-4)
        cp = power_coefficient(grid)
        k = int(np.argmax(cp))
        self.capacity_factor = capacity_factor
        self.lambda_opt = float(grid[k])
        self.cp_max = float(power_coefficient(self.lambda_opt))
        # velocidade ótima escala com a raiz cúbica da potência disponível
        self.omega_opt = rated_rotor_speed * capacity_factor ** (1.0 / 3.0)

    @classmethod
    def for_fleet(cls, fleet: WindFleet) -> "PowerCurves":
        return cls(fleet.capacity_factor_at_vw, fleet.rated_rotor_speed)

    def p_aero(self, omega: float) -> float:
        cp = float(power_coefficient(self.lambda_opt * omega / self.omega_opt))
        return self.capacity_factor * cp / self.cp_max

    def p_mppt(self, omega: float) -> float:
        return float(min(max(self.capacity_factor * (omega / self.omega_opt) ** 3, 0.0), 1.0))

    def p_mt(self, omega: float) -> float:
        return self.p_aero(omega)

    def table(self, resolution: float = CURVE_RESOLUTION) -> pd.DataFrame:
        """Curvas tabeladas na faixa de velocidade operacional"""
        lo, hi = SPEED_LIMITS
        speeds = np.round(np.arange(lo, hi + resolution / 2, resolution), 6)
        return pd.DataFrame(
            {
                "omega": speeds,
                "p_mppt": [self.p_mppt(w) for w in speeds],
                "p_mt": [self.p_mt(w) for w in speeds],
                "cp": power_coefficient(self.lambda_opt * speeds / self.omega_opt),
            }
        )


# =============================================================================
# ESTADO E DUAS MASSAS
# =============================================================================


@dataclass
class WindState:
    """Estado mutável do aerogerador equivalente (atualizado no lugar a cada passo)"""

    omega_rotor: float
    omega_gen: float
    shaft_twist: float
    p_sp: float
    mode: ControllerMode = ControllerMode.NORMAL
    omega_mppt: Optional[float] = None
    omega_v: Optional[float] = None
    p_pre: Optional[float] = None
    p2: Optional[float] = None
    mode_time: float = 0.0
    event_done: bool = False
    speed_limit_hit: bool = False

    def within_limits(self) -> bool:
        lo, hi = SPEED_LIMITS
        return lo <= self.omega_rotor <= hi and lo <= self.omega_gen <= hi


def steady_state(curves: PowerCurves, params: TwoMassParams) -> WindState:
    """Equilíbrio no ponto de máxima potência"""
    omega = curves.omega_opt
    p = curves.p_mppt(omega)
    twist = p / (omega * params.shaft_stiffness) if params.shaft_stiffness > 0 else 0.0
    return WindState(omega_rotor=omega, omega_gen=omega, shaft_twist=twist, p_sp=p)


def two_mass_derivatives(
    omega_r: float, omega_g: float, twist: float, p_aero: float, p_elec: float, params: TwoMassParams
) -> Tuple[float, float, float]:
    t_shaft = params.shaft_stiffness * twist + params.mutual_damping * (omega_r - omega_g)
    d_wr = (p_aero / omega_r - t_shaft) / (2.0 * params.rotor_inertia_h)
    d_wg = (t_shaft - p_elec / omega_g) / (2.0 * params.generator_inertia_h)
    d_twist = params.electrical_base * (omega_r - omega_g)
    return d_wr, d_wg, d_twist


def two_mass_step(state: WindState, p_aero: float, p_elec: float, dt: float, params: TwoMassParams) -> WindState:
    """
    Avança o par rotor/gerador um passo (RK4, torques de entrada mantidos).
    Atualiza `state` no lugar e o devolve; velocidades fora de
    [0.3, 1.3] pu ligam `speed_limit_hit` (falha do controle).
    """
    wr, wg, th = state.omega_rotor, state.omega_gen, state.shaft_twist
    h = 0.5 * dt
    a1, b1, c1 = two_mass_derivatives(wr, wg, th, p_aero, p_elec, params)
    a2, b2, c2 = two_mass_derivatives(wr + h * a1, wg + h * b1, th + h * c1, p_aero, p_elec, params)
    a3, b3, c3 = two_mass_derivatives(wr + h * a2, wg + h * b2, th + h * c2, p_aero, p_elec, params)
    a4, b4, c4 = two_mass_derivatives(wr + dt * a3, wg + dt * b3, th + dt * c3, p_aero, p_elec, params)
    sixth = dt / 6.0
    state.omega_rotor = wr + sixth * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
    state.omega_gen = wg + sixth * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
    state.shaft_twist = th + sixth * (c1 + 2.0 * c2 + 2.0 * c3 + c4)
    if not state.speed_limit_hit and not state.within_limits():
        state.speed_limit_hit = True
    return state


# =============================================================================
# CONTROLADOR DE FREQUÊNCIA
# =============================================================================


def recovery_point(curves: PowerCurves, omega_v: float, x: float) -> float:
    """P2 = P_MPPT(Ω_V) + x·(P_mt(Ω_V) − P_MPPT(Ω_V))"""
    p_mppt = curves.p_mppt(omega_v)
    return p_mppt + x * (curves.p_mt(omega_v) - p_mppt)


def controller_step(
    state: WindState,
    f: float,
    dt: float,
    curves: PowerCurves,
    params: WindControllerParams,
    f0: float = 50.0,
    enabled: bool = True,
) -> WindState:
    """
    Calcula o setpoint elétrico P_sp do passo e as transições de modo.

    Returns:
        o próprio `state`, com p_sp, modo e pontos de referência atualizados
    """
    df = f - f0
    omega = state.omega_rotor

    if state.mode == ControllerMode.NORMAL:
        if enabled and not state.event_done and df < -params.trigger_hz:
            state.p_pre = curves.p_mppt(omega)
            state.mode = ControllerMode.OVERPRODUCTION
            state.omega_mppt = omega
            state.mode_time = 0.0
            logger.debug(f"Wind controller armed at Δf={df:.3f} Hz, P_pre={state.p_pre:.4f} pu")
        else:
            state.p_sp = curves.p_mppt(omega)
            return state

    if state.mode == ControllerMode.OVERPRODUCTION:
        elapsed = state.mode_time + dt
        boundary = (1.0 - params.op_speed_drop) * state.omega_mppt
        if omega <= boundary or elapsed >= params.op_max_duration:
            state.p2 = recovery_point(curves, omega, params.recovery_x)
            state.mode = ControllerMode.RECOVERY
            state.omega_v = omega
            state.mode_time = 0.0
            logger.debug(f"Wind overproduction ended after {elapsed:.2f} s at Ω_V={omega:.4f} pu, P2={state.p2:.4f}")
        else:
            boost = min(params.op_gain * max(-df, 0.0), params.op_cap_delta_pop)
            state.p_sp = state.p_pre * (1.0 + boost)
            state.mode_time = elapsed
            return state

    # recuperação: reta de P2 (em Ω_V) até P_pre (em Ω_MPPT)
    if omega >= params.recovery_done * state.omega_mppt:
        logger.debug(f"Wind recovery complete at Ω={omega:.4f} pu")
        state.mode = ControllerMode.NORMAL
        state.p_sp = curves.p_mppt(omega)
        state.mode_time = 0.0
        state.event_done = True
        return state
    span = state.omega_mppt - state.omega_v
    w = 0.0 if span <= 0 else min(max((omega - state.omega_v) / span, 0.0), 1.0)
    state.p_sp = state.p2 + w * (state.p_pre - state.p2)
    state.mode_time += dt
    return state


# =============================================================================
# AGREGAÇÃO
# =============================================================================


def equivalent_turbines(wind_mw: float, fleet: WindFleet) -> float:
    """n_WT equivalente para entregar `wind_mw` no ponto de operação"""
    if wind_mw < 0:
        raise ValueError("wind power must be >= 0")
    return wind_mw / (fleet.capacity_factor_at_vw * fleet.turbine_rating)


def aggregate_wind_power(state: WindState, fleet: WindFleet, n_wt: Optional[float] = None) -> float:
    """P_w = n_WT × potência nominal × P_elec (MW)"""
    count = fleet.n_wt if n_wt is None else n_wt
    return count * fleet.turbine_rating * state.p_sp
