"""
Simulação do transitório de frequência pós-contingência
Equação de oscilação com a inércia da frota em serviço, reguladores e
turbinas por tecnologia (espaço de estados via scipy), AGC integral,
relés de deslastre por subfrequência e o aerogerador equivalente.
"""
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import TYPE_CHECKING, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, model_validator
from scipy import signal
from scipy.linalg import block_diag

from app.config import settings
from app.core.errors import InitializationError, ScenarioError
from app.core.tables import COLLAPSE_FREQUENCY_HZ
from app.services.fleet import (
    FleetData,
    GovernorParams,
    Plant,
    Technology,
    ThermalUnit,
    WindControllerParams,
    aggregate_inertia,
    shed_amount,
)
from app.services.windctl import (
    PowerCurves,
    WindState,
    aggregate_wind_power,
    controller_step,
    equivalent_turbines,
    steady_state,
    two_mass_step,
)

if TYPE_CHECKING:
    from app.services.scenario import Scenario

logger = logging.getLogger(__name__)

BALANCE_TOLERANCE_MW = 1e-6
PREROLL_RATE_LIMIT = 1e-6
RELAY_TIME_TOLERANCE = 1e-9


# =============================================================================
# CONFIGURAÇÃO
# =============================================================================


class SimConfig(BaseModel):
    dt: float = Field(default_factory=lambda: settings.SIM_DT)
    t_end: float = Field(default_factory=lambda: settings.SIM_T_END)
    trip_time: float = 1.0
    sample_interval: float = Field(default_factory=lambda: settings.SIM_SAMPLE_INTERVAL)
    preroll: float = Field(5.0, ge=0)
    load_shedding: bool = True
    agc: bool = True

    @model_validator(mode="after")
    def _check(self) -> "SimConfig":
        if not 0 < self.dt <= 0.01:
            raise ValueError("dt must lie in (0, 0.01] s")
        if not self.t_end > self.trip_time > 0:
            raise ValueError("requires t_end > trip_time > 0")
        if self.sample_interval < self.dt:
            raise ValueError("sample_interval must be >= dt")
        return self

    @property
    def stride(self) -> int:
        return max(1, int(round(self.sample_interval / self.dt)))


# =============================================================================
# REGULADORES E TURBINAS
# =============================================================================


def _lag(T: float) -> np.ndarray:
    return np.array([T, 1.0]) if T > 0 else np.array([1.0])


def _chain(*polys: np.ndarray) -> np.ndarray:
    out = np.array([1.0])
    for p in polys:
        out = np.polymul(out, p)
    return out


def governor_transfer_function(tech: Technology, g: GovernorParams) -> Tuple[np.ndarray, np.ndarray]:
    """
    Função de transferência regulador+turbina (ganho estático unitário)
    da entrada em pu da base da unidade para ΔP_mec.
    """
    if tech == Technology.STEAM:
        return np.array([1.0]), _chain(_lag(g.TR_s), _lag(g.TSM_s), _lag(g.TCH_s))
    if tech in (Technology.GAS, Technology.COMBINED_CYCLE):
        # atraso de transporte TD aproximado por um atraso de primeira ordem
        num = _lag(g.T2_g)
        den = _chain(_lag(g.TR_g), _lag(g.T1_g), _lag(g.T3_g), _lag(g.TD_g), _lag(g.T4_g))
        return num, den
    if tech == Technology.DIESEL:
        g_num = g.K_d * _chain(_lag(g.T3_d), _lag(g.T4_d))
        g_den = _chain(
            np.trim_zeros(np.array([g.T1_d * g.T2_d, g.T1_d, 1.0]), "f"),
            np.array([1.0, 0.0]),
            _lag(g.T5_d),
            _lag(g.T6_d),
        )
        # malha fechada do atuador com integrador
        return g_num, np.polyadd(g_den, g_num)
    raise ValueError(f"unknown technology: {tech}")


class ThermalBlock:
    """
    Realização em espaço de estados de regulador+turbina.

    Um bloco simples tem um canal (uma entrada, uma saída); `stack` junta
    vários blocos em bloco diagonal, um canal por unidade, para avançar a
    frota inteira em uma única chamada.
    """

    def __init__(self, num: Sequence[float], den: Sequence[float]):
        num = np.trim_zeros(np.atleast_1d(np.asarray(num, dtype=float)), "f")
        den = np.trim_zeros(np.atleast_1d(np.asarray(den, dtype=float)), "f")
        if len(den) == 0 or len(num) > len(den):
            raise ValueError("transfer function must be proper")
        if len(den) == 1:
            self._assign(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), np.array([num[-1] / den[0]]))
        else:
            A, B, C, D = signal.tf2ss(num, den)
            self._assign(A, B, C, np.asarray(D, dtype=float)[0])

    def _assign(self, A, B, C, D) -> None:
        self.A = np.asarray(A, dtype=float)
        self.B = np.asarray(B, dtype=float)
        self.C = np.asarray(C, dtype=float)
        self.D = np.asarray(D, dtype=float)
        self._discrete: Dict[float, Tuple[np.ndarray, np.ndarray]] = {}

    @classmethod
    def for_technology(cls, tech: Technology, governors: GovernorParams) -> "ThermalBlock":
        return cls(*governor_transfer_function(tech, governors))

    @classmethod
    def first_order_lag(cls, T: float) -> "ThermalBlock":
        return cls([1.0], _lag(T))

    @classmethod
    def stack(cls, blocks: Sequence["ThermalBlock"]) -> "ThermalBlock":
        """Bloco diagonal com um canal por bloco de entrada"""
        if any(b.width != 1 for b in blocks):
            raise ValueError("only single-channel blocks can be stacked")
        sizes = [b.n_states for b in blocks]
        n, m = sum(sizes), len(blocks)
        A = block_diag(*[b.A for b in blocks if b.n_states]) if n else np.zeros((0, 0))
        B = np.zeros((n, m))
        C = np.zeros((m, n))
        offset = 0
        for i, (b, k) in enumerate(zip(blocks, sizes)):
            B[offset : offset + k, i] = b.B[:, 0]
            C[i, offset : offset + k] = b.C[0]
            offset += k
        stacked = cls.__new__(cls)
        stacked._assign(A, B, C, np.array([b.D[0] for b in blocks]))
        return stacked

    @property
    def n_states(self) -> int:
        return self.A.shape[0]

    @property
    def width(self) -> int:
        return len(self.D)

    def dc_gain(self) -> Union[float, np.ndarray]:
        gain = self.D.copy()
        if self.n_states:
            gain = gain + np.diag(-self.C @ np.linalg.solve(self.A, self.B))
        return float(gain[0]) if self.width == 1 else gain

    def discrete(self, dt: float) -> Tuple[np.ndarray, np.ndarray]:
        """(A_d, B_d) do segurador de ordem zero, calculados uma vez por passo"""
        if dt not in self._discrete:
            ad, bd, _, _, _ = signal.cont2discrete((self.A, self.B, self.C, np.diag(self.D)), dt, method="zoh")
            self._discrete[dt] = (np.ascontiguousarray(ad), np.ascontiguousarray(bd))
        return self._discrete[dt]


def thermal_block_step(
    block: ThermalBlock,
    x: np.ndarray,
    delta_f: float,
    delta_p_ref,
    dt: float,
    droop,
    f0: float = 50.0,
    limits=(-np.inf, np.inf),
):
    """
    Avança o bloco um passo com a entrada mantida constante no passo
    (discretização exata do segurador de ordem zero).

    Args:
        delta_f: desvio de frequência (Hz)
        delta_p_ref: referência do AGC (pu da base da unidade), um valor
            por canal num bloco empilhado
        droop: estatismo R, escalar ou um por canal
        limits: faixa de ΔP_mec (pu) dada pela folga da unidade

    Returns:
        (novo estado, ΔP_mec em pu da base da unidade); float para um bloco
        simples, vetor por canal para um bloco empilhado
    """
    u = np.atleast_1d(-(delta_f / f0) / droop + delta_p_ref)
    if block.n_states:
        ad, bd = block.discrete(dt)
        x = ad @ x + bd @ u
        out = block.C @ x + block.D * u
    else:
        out = block.D * u
    out = np.minimum(np.maximum(out, limits[0]), limits[1])
    return x, (float(out[0]) if block.width == 1 else out)


# =============================================================================
# AGC E DESLASTRE
# =============================================================================


def participation_factors(ku: Sequence[float], online: Sequence[bool]) -> np.ndarray:
    """K_u renormalizado sobre as unidades em serviço (soma 1)"""
    ku = np.where(np.asarray(online, dtype=bool), np.asarray(ku, dtype=float), 0.0)
    total = ku.sum()
    if total > 0:
        return ku / total
    count = int(np.sum(online))
    if count == 0:
        return ku
    return np.where(np.asarray(online, dtype=bool), 1.0 / count, 0.0)


def agc_step(
    integral: float, delta_f: float, k_f: float, ku: np.ndarray, t_u: float, dt: float
) -> Tuple[float, np.ndarray]:
    """
    Integra o erro de regulação ΔRR = −K_f·Δf e reparte a referência.

    Returns:
        (novo ∫ΔRR dt em MW·s, ΔP_ref por unidade em MW)
    """
    integral = integral - k_f * delta_f * dt
    return integral, ku * (integral / t_u)


@dataclass
class RelayBank:
    """Oito degraus de deslastre: temporizadores e travas"""

    thresholds: np.ndarray
    delays: np.ndarray
    amounts: np.ndarray
    timers: np.ndarray = None
    latched: np.ndarray = None
    ceiling: float = field(init=False, default=-np.inf)

    def __post_init__(self):
        n = len(self.thresholds)
        if self.timers is None:
            self.timers = np.zeros(n)
        if self.latched is None:
            self.latched = np.zeros(n, dtype=bool)
        if n:
            self.ceiling = float(np.max(self.thresholds))

    @classmethod
    def for_demand(cls, demand: float, system) -> "RelayBank":
        steps = system.shed_table.steps
        return cls(
            thresholds=np.array([s.threshold for s in steps]),
            delays=np.array([s.delay for s in steps]),
            amounts=np.array([shed_amount(k, demand, system) for k in range(1, len(steps) + 1)]),
        )

    @property
    def total(self) -> float:
        return float(self.amounts[self.latched].sum())


def load_shed_step(relays: RelayBank, f: float, dt: float) -> float:
    """
    Atualiza os temporizadores com a frequência do passo.

    Returns:
        carga deslastrada neste passo (MW)
    """
    if f >= relays.ceiling and not relays.timers.any():
        return 0.0
    armed = ~relays.latched
    below = armed & (f < relays.thresholds)
    relays.timers[armed & ~below] = 0.0
    relays.timers[below] += dt
    fired = below & (relays.timers >= relays.delays - RELAY_TIME_TOLERANCE)
    if not fired.any():
        return 0.0
    relays.latched |= fired
    relays.timers[fired] = 0.0
    for k in np.flatnonzero(fired):
        logger.debug(f"Shedding step {k + 1} latched at f={f:.4f} Hz ({relays.amounts[k]:.2f} MW)")
    return float(relays.amounts[fired].sum())


# =============================================================================
# EQUAÇÃO DE OSCILAÇÃO
# =============================================================================


def swing_rhs(
    p_t: float, p_j: float, p_w: float, p_d: float, t_m: float, f: float, f0: float = 50.0, damping: float = 1.0
) -> float:
    """
    df/dt (Hz/s) com potências em pu da base do sistema; mantém f_pu no
    lado esquerdo (não linearizada).
    """
    if t_m <= 0:
        raise ValueError("T_m must be > 0")
    if f <= 0:
        raise ValueError("frequency must be > 0")
    f_pu = f / f0
    return f0 * (p_t + p_j + p_w - p_d - damping * (f_pu - 1.0)) / (t_m * f_pu)


# =============================================================================
# ESTADO
# =============================================================================


@dataclass
class Machine:
    id: str
    plant: Plant
    rating: float
    droop: float
    p0: float
    p_min: float
    p_max: float
    inertia_h: float
    ku: float
    block: ThermalBlock


@dataclass
class SimState:
    machines: List[Machine]
    f: float
    x: np.ndarray
    t_m: float
    s_base: float
    f0: float
    damping: float
    demand: float
    k_f: float
    t_u: float
    online: np.ndarray
    ku: np.ndarray
    agc_integral: float = 0.0
    relays: Optional[RelayBank] = None
    wind: Optional[WindState] = None
    wind_n_eq: float = 0.0
    wind_mw: float = 0.0
    injection: Dict[Plant, float] = field(default_factory=dict)
    shed: float = 0.0
    lost_mw: float = 0.0


def initialize_steady_state(
    units: Sequence[ThermalUnit],
    dispatch: Mapping[str, float],
    demand: float,
    wind_mw: float,
    dataset: FleetData,
    config: Optional[SimConfig] = None,
    injection: Optional[Mapping[Plant, float]] = None,
) -> SimState:
    """
    Estado de regime a partir do despacho de uma hora.

    Raises:
        InitializationError: despacho desbalanceado ou fora dos limites
        ScenarioError: vento acima do disponível
    """
    config = config or SimConfig()
    system, fleet = dataset.system, dataset.wind
    units = sorted(units, key=lambda u: u.id)
    injection = dict(injection or {})

    supply = sum(dispatch[u.id] for u in units) + wind_mw + sum(injection.values())
    if abs(supply - demand) > BALANCE_TOLERANCE_MW:
        raise InitializationError(
            f"schedule unbalanced: supply {supply:.6f} MW vs demand {demand:.6f} MW"
        )
    machines = []
    for u in units:
        p0 = dispatch[u.id]
        if p0 < u.min_power - BALANCE_TOLERANCE_MW or p0 > u.rated_power + BALANCE_TOLERANCE_MW:
            raise InitializationError(f"{u.id}: dispatch {p0:.3f} MW outside [{u.min_power}, {u.rated_power}]")
        machines.append(
            Machine(
                id=u.id,
                plant=u.plant,
                rating=u.rated_power,
                droop=u.droop_r,
                p0=p0,
                p_min=u.min_power,
                p_max=u.rated_power,
                inertia_h=u.inertia_h,
                ku=u.agc_factor_ku,
                block=ThermalBlock.for_technology(u.tech, dataset.governors),
            )
        )

    t_m = aggregate_inertia(units, system.s_base)
    k_f = system.agc_gain_kf
    if k_f is None:
        k_f = 1.5 * sum(m.rating / (m.droop * system.f0) for m in machines)
    online = np.ones(len(machines), dtype=bool)

    wind_state = None
    n_eq = 0.0
    if wind_mw > 0:
        if wind_mw > fleet.available_power + 1e-9:
            raise ScenarioError(
                f"wind {wind_mw:.1f} MW exceeds available {fleet.available_power:.1f} MW at v_w"
            )
        curves = PowerCurves.for_fleet(fleet)
        wind_state = steady_state(curves, fleet.two_mass)
        n_eq = equivalent_turbines(wind_mw, fleet)

    relays = RelayBank.for_demand(demand, system) if config.load_shedding else None

    return SimState(
        machines=machines,
        f=system.f0,
        x=np.zeros(sum(m.block.n_states for m in machines)),
        t_m=t_m,
        s_base=system.s_base,
        f0=system.f0,
        damping=system.damping_d,
        demand=demand,
        k_f=k_f,
        t_u=system.agc_time_tu,
        online=online,
        ku=participation_factors([m.ku for m in machines], online),
        relays=relays,
        wind=wind_state,
        wind_n_eq=n_eq,
        wind_mw=wind_mw,
        injection=injection,
    )


# =============================================================================
# SÉRIE TEMPORAL
# =============================================================================


@dataclass
class TimeSeries:
    t: np.ndarray
    f: np.ndarray
    p_t: np.ndarray
    p_j: np.ndarray
    p_w: np.ndarray
    p_d: np.ndarray
    shed: np.ndarray
    t_m: np.ndarray
    trip_time: float
    collapsed: bool = False
    wind_speed_limit: bool = False
    metadata: Dict = field(default_factory=dict)

    COLUMNS = ("t", "f", "P_T", "P_J", "P_w", "P_d", "shed", "T_m")

    def __len__(self) -> int:
        return len(self.t)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            dict(zip(self.COLUMNS, (self.t, self.f, self.p_t, self.p_j, self.p_w, self.p_d, self.shed, self.t_m)))
        )

    def to_csv(self, path) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False)

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, trip_time: float = 1.0, **flags) -> "TimeSeries":
        cols = [frame[c].to_numpy(dtype=float) for c in cls.COLUMNS]
        return cls(*cols, trip_time=trip_time, **flags)

    @classmethod
    def from_csv(cls, path, trip_time: float = 1.0, **flags) -> "TimeSeries":
        return cls.from_frame(pd.read_csv(path), trip_time=trip_time, **flags)


# =============================================================================
# MOTOR DE INTEGRAÇÃO
# =============================================================================


class _Engine:
    """
    Integrador de passo fixo. A cada passo, com a frequência do início do
    passo: controlador e duas massas do vento, AGC e reguladores (todos os
    canais num bloco empilhado); depois RK4 da equação de oscilação com as
    potências mecânicas já atualizadas.
    """

    def __init__(
        self,
        state: SimState,
        config: SimConfig,
        fleet_wind=None,
        controller: Optional[WindControllerParams] = None,
        wind_control: bool = False,
    ):
        self.state = state
        self.config = config
        machines = state.machines
        self.block = ThermalBlock.stack([mc.block for mc in machines])
        self.S = np.array([mc.rating for mc in machines])
        self.R = np.array([mc.droop for mc in machines])
        self.p0 = np.array([mc.p0 for mc in machines])
        self.lo = (np.array([mc.p_min for mc in machines]) - self.p0) / self.S
        self.hi = (np.array([mc.p_max for mc in machines]) - self.p0) / self.S
        self.tirajana = np.array([mc.plant == Plant.TIRAJANA for mc in machines], dtype=float)
        self.online_f = state.online.astype(float)
        self.inj_t = state.injection.get(Plant.TIRAJANA, 0.0)
        self.inj_j = state.injection.get(Plant.JINAMAR, 0.0)
        self.dp = np.zeros(len(machines))
        self.dp_ref = np.zeros(len(machines))

        self.has_wind = state.wind is not None
        self.fleet_wind = fleet_wind
        self.controller = controller
        self.wind_control = wind_control
        self.p_w = 0.0
        if self.has_wind:
            self.curves = PowerCurves.for_fleet(fleet_wind)
            self.two_mass = fleet_wind.two_mass
            self.p_w = aggregate_wind_power(state.wind, fleet_wind, state.wind_n_eq)
        self.max_residual = 0.0

    # -------------------------------------------------------------------------

    def powers(self) -> Tuple[float, float, float]:
        """(P_T, P_J, P_w) em MW no estado atual"""
        p_units = (self.p0 + self.S * self.dp) * self.online_f
        p_tirajana = float(p_units @ self.tirajana)
        p_t = p_tirajana + self.inj_t - self.state.lost_mw
        p_j = float(p_units.sum()) - p_tirajana + self.inj_j
        return p_t, p_j, self.p_w

    def rate(self, f: float, p_t: float, p_j: float) -> float:
        st = self.state
        sb = st.s_base
        return swing_rhs(p_t / sb, p_j / sb, self.p_w / sb, (st.demand - st.shed) / sb, st.t_m, f, st.f0, st.damping)

    def step(self, dt: float) -> None:
        st = self.state
        f = st.f
        delta_f = f - st.f0
        if self.has_wind:
            wind = controller_step(st.wind, f, dt, self.curves, self.controller, st.f0, enabled=self.wind_control)
            self.p_w = aggregate_wind_power(wind, self.fleet_wind, st.wind_n_eq)
            two_mass_step(wind, self.curves.p_aero(wind.omega_rotor), wind.p_sp, dt, self.two_mass)
        if self.config.agc:
            st.agc_integral, ref_mw = agc_step(st.agc_integral, delta_f, st.k_f, st.ku, st.t_u, dt)
            self.dp_ref = ref_mw / self.S
        st.x, self.dp = thermal_block_step(
            self.block, st.x, delta_f, self.dp_ref, dt, self.R, st.f0, (self.lo, self.hi)
        )

        p_t, p_j, _ = self.powers()
        h = 0.5 * dt
        k1 = self.rate(f, p_t, p_j)
        k2 = self.rate(f + h * k1, p_t, p_j)
        k3 = self.rate(f + h * k2, p_t, p_j)
        k4 = self.rate(f + dt * k3, p_t, p_j)
        st.f = f + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    # -------------------------------------------------------------------------

    def trip(self, index: int) -> float:
        """Desliga a unidade: remove potência, inércia e participação no AGC"""
        st = self.state
        mc = st.machines[index]
        p_t, p_j, _ = self.powers()
        before = p_t + p_j
        st.online[index] = False
        self.online_f = st.online.astype(float)
        st.t_m = st.t_m - 2.0 * mc.inertia_h * mc.rating / st.s_base
        st.ku = participation_factors([m.ku for m in st.machines], st.online)
        p_t, p_j, _ = self.powers()
        lost = before - (p_t + p_j)
        logger.info(f"Trip of {mc.id}: {lost:.2f} MW lost, T_m {st.t_m:.4f} s")
        return lost

    def preroll(self) -> None:
        """Confere o regime permanente integrando sem contingência"""
        cfg, st = self.config, self.state
        steps = int(round(cfg.preroll / cfg.dt))
        saved = (st.f, st.x, st.agc_integral, self.dp, self.dp_ref, self.p_w)
        saved_wind = replace(st.wind) if self.has_wind else None
        worst = 0.0
        for _ in range(steps):
            self.step(cfg.dt)
            p_t, p_j, _ = self.powers()
            worst = max(worst, abs(self.rate(st.f, p_t, p_j)))
        st.f, st.x, st.agc_integral, self.dp, self.dp_ref, self.p_w = saved
        st.wind = saved_wind
        if worst >= PREROLL_RATE_LIMIT:
            raise InitializationError(f"pre-roll not in steady state: max |df/dt| = {worst:.3e} Hz/s")
        logger.debug(f"Pre-roll {cfg.preroll:.1f} s: max |df/dt| = {worst:.2e} Hz/s")

    def run(self, trip_index: Optional[int] = None, step_loss: float = 0.0) -> TimeSeries:
        cfg = self.config
        st = self.state
        n_steps = int(round(cfg.t_end / cfg.dt))
        trip_step = int(round(cfg.trip_time / cfg.dt))
        stride = cfg.stride
        table = np.empty((n_steps // stride + 2, len(TimeSeries.COLUMNS)))
        n_rows = 0
        collapsed = False
        speed_limit = False
        lost = 0.0

        def record(t: float) -> None:
            nonlocal n_rows
            p_t, p_j, p_w = self.powers()
            rate = self.rate(st.f, p_t, p_j)
            f_pu = st.f / st.f0
            p_d = st.demand - st.shed
            imbalance = (p_t + p_j + p_w - p_d) / st.s_base - st.damping * (f_pu - 1.0)
            self.max_residual = max(self.max_residual, abs(st.t_m * f_pu * rate / st.f0 - imbalance))
            table[n_rows] = (t, st.f, p_t, p_j, p_w, p_d, st.shed, st.t_m)
            n_rows += 1

        record(0.0)
        for k in range(n_steps):
            if k == trip_step:
                if trip_index is not None:
                    lost = self.trip(trip_index)
                if step_loss:
                    st.lost_mw = step_loss
                    lost = step_loss
            self.step(cfg.dt)
            t = (k + 1) * cfg.dt
            if st.relays is not None:
                st.shed += load_shed_step(st.relays, st.f, cfg.dt)
            if self.has_wind and not speed_limit and st.wind.speed_limit_hit:
                speed_limit = True
                logger.warning(
                    f"Wind speed limit breached at t={t:.3f} s: "
                    f"Ωr={st.wind.omega_rotor:.3f} Ωg={st.wind.omega_gen:.3f} pu"
                )
            if st.f < COLLAPSE_FREQUENCY_HZ:
                collapsed = True
                logger.warning(f"Frequency collapse at t={t:.3f} s (f={st.f:.3f} Hz)")
                record(t)
                break
            if (k + 1) % stride == 0:
                record(t)

        metadata = {
            "config": cfg.model_dump(),
            "f0": st.f0,
            "s_base": st.s_base,
            "damping_d": st.damping,
            "agc_gain_kf": st.k_f,
            "agc_time_tu": st.t_u,
            "demand": st.demand,
            "wind_mw": st.wind_mw,
            "wind_control": self.wind_control,
            "committed": [m.id for m in st.machines],
            "tripped_unit": st.machines[trip_index].id if trip_index is not None else None,
            "imbalance_mw": lost,
            "t_m_final": st.t_m,
            "shed_total": st.shed,
            "collapsed": collapsed,
            "wind_speed_limit": speed_limit,
            "max_balance_residual": self.max_residual,
        }
        if self.has_wind:
            metadata["wind_controller"] = self.controller.model_dump()
            metadata["wind_two_mass"] = self.two_mass.model_dump()
            metadata["wind_final_mode"] = st.wind.mode.value
        columns = table[:n_rows].T.copy()
        return TimeSeries(
            *columns,
            trip_time=cfg.trip_time,
            collapsed=collapsed,
            wind_speed_limit=speed_limit,
            metadata=metadata,
        )


# =============================================================================
# OPERAÇÕES PÚBLICAS
# =============================================================================


def simulate(
    scenario: "Scenario",
    dataset: FleetData,
    wind_control: bool = False,
    config: Optional[SimConfig] = None,
    controller: Optional[WindControllerParams] = None,
) -> TimeSeries:
    """
    Simula a contingência N-1 do cenário.

    Args:
        scenario: célula com despacho e (opcionalmente) unidade desligada
        dataset: frota completa (sistema, reguladores, parque eólico)
        wind_control: habilita o controlador de frequência do vento
        config: parâmetros de integração
        controller: parâmetros do controlador (padrão: os do dataset)

    Returns:
        TimeSeries amostrada; `collapsed` indica queda abaixo de 47 Hz
    """
    config = config or SimConfig()
    controller = controller or dataset.wind.controller
    state = initialize_steady_state(
        scenario.units, scenario.dispatch, scenario.demand, scenario.wind, dataset, config
    )
    engine = _Engine(state, config, dataset.wind, controller, wind_control)
    if config.preroll > 0:
        engine.preroll()

    trip_index = None
    if scenario.tripped_unit is not None:
        ids = [m.id for m in state.machines]
        trip_index = ids.index(scenario.tripped_unit)
    ts = engine.run(trip_index=trip_index)
    ts.metadata["cell"] = list(scenario.index) if scenario.index is not None else None
    ts.metadata["t_m_pre"] = scenario.t_m_pre
    ts.metadata["t_m_post"] = scenario.t_m_post
    level = logger.warning if ts.collapsed else logger.info
    level(
        f"Run {scenario.label} wind_control={'on' if wind_control else 'off'}: "
        f"min f {ts.f.min():.4f} Hz, shed {state.shed:.2f} MW"
    )
    return ts


def simulate_baseline(demand: float, dataset: FleetData, config: Optional[SimConfig] = None) -> TimeSeries:
    """
    Modelo simplificado de máquina única: inércia constante, degrau de
    déficit fixo em fração da demanda, sem deslastre e sem vento.
    """
    config = (config or SimConfig()).model_copy(update={"load_shedding": False})
    base = dataset.baseline
    system = dataset.system
    machine = Machine(
        id="equivalent",
        plant=Plant.TIRAJANA,
        rating=demand,
        droop=base.droop_r,
        p0=demand,
        p_min=0.0,
        p_max=10.0 * demand,
        inertia_h=base.inertia_h,
        ku=1.0,
        block=ThermalBlock.first_order_lag(base.governor_lag),
    )
    online = np.ones(1, dtype=bool)
    state = SimState(
        machines=[machine],
        f=system.f0,
        x=np.zeros(machine.block.n_states),
        t_m=2.0 * base.inertia_h,
        s_base=demand,
        f0=system.f0,
        damping=base.damping_d,
        demand=demand,
        k_f=base.agc_gain_factor * demand / (base.droop_r * system.f0),
        t_u=system.agc_time_tu,
        online=online,
        ku=np.ones(1),
    )
    engine = _Engine(state, config)
    ts = engine.run(step_loss=base.imbalance * demand)
    ts.metadata["baseline"] = base.model_dump()
    ts.metadata["t_m_pre"] = ts.metadata["t_m_post"] = 2.0 * base.inertia_h
    return ts
