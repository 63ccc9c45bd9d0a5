"""
Modelo de dados da frota de geração
Carrega e valida o arquivo YAML do sistema (unidades térmicas, parâmetros
do sistema, deslastre, parque eólico) e oferece a agregação de inércia e a
interpolação do programa de deslastre.
"""
import logging
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from app.core.errors import FleetConfigError, ScenarioError
from app.core.tables import GOVERNOR_DEFAULTS, LOAD_SHED_STEPS

logger = logging.getLogger(__name__)

COST_SEGMENT_COUNT = 10
_TOL = 1e-6


# =============================================================================
# ENUMS
# =============================================================================


class Plant(str, Enum):
    TIRAJANA = "Tirajana"
    JINAMAR = "Jinamar"


class Technology(str, Enum):
    STEAM = "steam"
    GAS = "gas"
    DIESEL = "diesel"
    COMBINED_CYCLE = "combined_cycle"


# =============================================================================
# UNIDADES TÉRMICAS
# =============================================================================


class StartupType(BaseModel):
    model_config = ConfigDict(frozen=True)

    min_offline_hours: float = Field(..., ge=0)
    cost: float = Field(..., ge=0)


class CostSegment(BaseModel):
    model_config = ConfigDict(frozen=True)

    width: float = Field(..., ge=0, description="MW")
    marginal_cost: float = Field(..., ge=0, description="€/MWh")


class ThermalUnit(BaseModel):
    """Registro estático de uma unidade térmica (base da máquina)"""

    model_config = ConfigDict(frozen=True)

    id: str
    plant: Plant
    tech: Technology
    rated_power: float
    min_power: float
    inertia_h: float
    droop_r: float
    agc_factor_ku: float = Field(1.0, ge=0)
    min_up: int = Field(1, ge=1)
    min_down: int = Field(1, ge=1)
    startup_duration: int = Field(1, ge=1)
    startup_types: Tuple[StartupType, ...]
    cost_segments: Tuple[CostSegment, ...]
    no_load_cost: float = Field(0.0, ge=0)
    om_cost: float = Field(0.0, ge=0)
    wear_tear_cost: float = Field(0.0, ge=0)

    @model_validator(mode="after")
    def _check_invariants(self) -> "ThermalUnit":
        if not 0 < self.min_power <= self.rated_power:
            raise ValueError(f"{self.id}: requires 0 < min_power <= rated_power")
        if self.inertia_h <= 0:
            raise ValueError(f"{self.id}: inertia_h must be > 0")
        if not 0 < self.droop_r <= 1:
            raise ValueError(f"{self.id}: droop_r must lie in (0, 1]")

        if len(self.cost_segments) != COST_SEGMENT_COUNT:
            raise ValueError(
                f"{self.id}: cost curve must have exactly {COST_SEGMENT_COUNT} pieces "
                f"(got {len(self.cost_segments)})"
            )
        costs = [s.marginal_cost for s in self.cost_segments]
        if any(b < a for a, b in zip(costs, costs[1:])):
            raise ValueError(f"{self.id}: marginal costs must be non-decreasing (convex curve)")
        width = sum(s.width for s in self.cost_segments)
        if abs(width - (self.rated_power - self.min_power)) > _TOL:
            raise ValueError(
                f"{self.id}: segment widths sum to {width:.6f} MW, "
                f"expected rated_power - min_power = {self.rated_power - self.min_power:.6f} MW"
            )

        if not self.startup_types:
            raise ValueError(f"{self.id}: at least one startup type is required")
        hours = [s.min_offline_hours for s in self.startup_types]
        if any(b <= a for a, b in zip(hours, hours[1:])):
            raise ValueError(f"{self.id}: startup types need strictly increasing min_offline_hours")
        prices = [s.cost for s in self.startup_types]
        if any(b < a for a, b in zip(prices, prices[1:])):
            raise ValueError(f"{self.id}: startup costs must be non-decreasing")
        return self

    @property
    def first_marginal_cost(self) -> float:
        return self.cost_segments[0].marginal_cost

    @property
    def min_power_cost(self) -> float:
        """Custo horário em potência mínima (sem O&M)"""
        return self.no_load_cost + self.first_marginal_cost * self.min_power

    def fuel_cost(self, power: float) -> float:
        """Curva convexa de 10 trechos avaliada em `power` (>= min_power)"""
        cost = self.min_power_cost
        remaining = power - self.min_power
        for seg in self.cost_segments:
            if remaining <= 0:
                break
            take = min(seg.width, remaining)
            cost += take * seg.marginal_cost
            remaining -= take
        return cost

    @property
    def full_load_average_cost(self) -> float:
        return (self.fuel_cost(self.rated_power) + self.om_cost * self.rated_power) / self.rated_power


# =============================================================================
# PARÂMETROS DE SISTEMA
# =============================================================================


class GovernorParams(BaseModel):
    """Constantes dos diagramas de blocos por tecnologia"""

    model_config = ConfigDict(frozen=True)

    TR_g: float = GOVERNOR_DEFAULTS["TR_g"]
    T1_g: float = GOVERNOR_DEFAULTS["T1_g"]
    T2_g: float = GOVERNOR_DEFAULTS["T2_g"]
    T3_g: float = GOVERNOR_DEFAULTS["T3_g"]
    T4_g: float = GOVERNOR_DEFAULTS["T4_g"]
    TD_g: float = GOVERNOR_DEFAULTS["TD_g"]
    R_g: float = GOVERNOR_DEFAULTS["R_g"]
    R_cc: float = GOVERNOR_DEFAULTS["R_cc"]
    H_g: float = GOVERNOR_DEFAULTS["H_g"]
    H_cc: float = GOVERNOR_DEFAULTS["H_cc"]
    T1_d: float = GOVERNOR_DEFAULTS["T1_d"]
    T2_d: float = GOVERNOR_DEFAULTS["T2_d"]
    T3_d: float = GOVERNOR_DEFAULTS["T3_d"]
    T4_d: float = GOVERNOR_DEFAULTS["T4_d"]
    T5_d: float = GOVERNOR_DEFAULTS["T5_d"]
    T6_d: float = GOVERNOR_DEFAULTS["T6_d"]
    K_d: float = GOVERNOR_DEFAULTS["K_d"]
    R_d: float = GOVERNOR_DEFAULTS["R_d"]
    H_d: float = GOVERNOR_DEFAULTS["H_d"]
    TR_s: float = GOVERNOR_DEFAULTS["TR_s"]
    TSM_s: float = GOVERNOR_DEFAULTS["TSM_s"]
    TCH_s: float = GOVERNOR_DEFAULTS["TCH_s"]
    R_s: float = GOVERNOR_DEFAULTS["R_s"]
    H_s: float = GOVERNOR_DEFAULTS["H_s"]

    @model_validator(mode="after")
    def _non_negative(self) -> "GovernorParams":
        negative = [name for name, value in self.model_dump().items() if value < 0]
        if negative:
            raise ValueError(f"governor constants must be >= 0: {', '.join(negative)}")
        return self

    def droop(self, tech: Technology) -> float:
        return {
            Technology.STEAM: self.R_s,
            Technology.GAS: self.R_g,
            Technology.COMBINED_CYCLE: self.R_cc,
            Technology.DIESEL: self.R_d,
        }[tech]

    def inertia(self, tech: Technology) -> float:
        return {
            Technology.STEAM: self.H_s,
            Technology.GAS: self.H_g,
            Technology.COMBINED_CYCLE: self.H_cc,
            Technology.DIESEL: self.H_d,
        }[tech]


class LoadShedStep(BaseModel):
    model_config = ConfigDict(frozen=True)

    threshold: float = Field(..., description="Hz")
    delay: float = Field(..., gt=0, description="s")
    shed_peak: float = Field(..., gt=0, description="MW na demanda de ponta")
    shed_valley: float = Field(..., gt=0, description="MW na demanda de vale")


def _default_shed_steps() -> Tuple[LoadShedStep, ...]:
    return tuple(
        LoadShedStep(threshold=th, delay=d, shed_peak=p, shed_valley=v)
        for th, d, p, v in LOAD_SHED_STEPS
    )


class LoadShedTable(BaseModel):
    model_config = ConfigDict(frozen=True)

    steps: Tuple[LoadShedStep, ...] = Field(default_factory=_default_shed_steps)

    @field_validator("steps")
    @classmethod
    def _eight_steps(cls, v):
        if len(v) != 8:
            raise ValueError(f"load shedding scheme must have 8 steps (got {len(v)})")
        return v


class PowerSystem(BaseModel):
    model_config = ConfigDict(frozen=True)

    f0: float = 50.0
    s_base: float = Field(100.0, description="MVA")
    damping_d: float = Field(1.0, description="pu potência / pu frequência")
    agc_gain_kf: Optional[float] = Field(
        None, description="MW/Hz; None = 1.5x a soma dos ganhos primários em serviço"
    )
    agc_time_tu: float = Field(50.0, gt=0)
    shed_table: LoadShedTable = Field(default_factory=LoadShedTable)
    demand_peak: float
    demand_valley: float

    @model_validator(mode="after")
    def _check_invariants(self) -> "PowerSystem":
        if self.s_base <= 0:
            raise ValueError("s_base must be > 0")
        if self.damping_d < 0:
            raise ValueError("damping_d must be >= 0")
        if self.agc_gain_kf is not None and self.agc_gain_kf < 0:
            raise ValueError("agc_gain_kf must be >= 0")
        if not self.demand_valley < self.demand_peak:
            raise ValueError("demand_valley must be < demand_peak")
        for i, step in enumerate(self.shed_table.steps, start=1):
            if step.threshold > self.f0:
                raise ValueError(f"shedding step {i}: threshold above f0")
        return self


# =============================================================================
# PARQUE EÓLICO
# =============================================================================


class WindControllerParams(BaseModel):
    """Controlador de frequência em três modos (normal / sobreprodução / recuperação)"""

    model_config = ConfigDict(frozen=True)

    op_cap_delta_pop: float = Field(0.15, gt=0, le=1, description="fração da saída pré-evento")
    recovery_x: float = Field(0.95, gt=0, lt=1)
    trigger_hz: float = Field(0.1, gt=0, description="arma quando Δf < -trigger_hz")
    op_full_deviation_hz: float = Field(1.0, gt=0, description="|Δf| em que ΔP_OP atinge o teto")
    op_speed_drop: float = Field(0.05, gt=0, lt=1, description="queda relativa de Ω que encerra a sobreprodução")
    op_max_duration: float = Field(10.0, gt=0, description="s")
    recovery_done: float = Field(0.999, gt=0, le=1, description="Ω/Ω_MPPT que encerra a recuperação")

    @property
    def op_gain(self) -> float:
        """Ganho proporcional (fração por Hz)"""
        return self.op_cap_delta_pop / self.op_full_deviation_hz

    @classmethod
    def preset(cls, name: str, **overrides) -> "WindControllerParams":
        presets = {
            "modified": {"op_cap_delta_pop": 0.15, "recovery_x": 0.95},
            "original": {"op_cap_delta_pop": 0.10, "recovery_x": 0.75},
        }
        if name not in presets:
            raise ValueError(f"unknown controller preset '{name}' (use {', '.join(presets)})")
        return cls(**{**presets[name], **overrides})


class TwoMassParams(BaseModel):
    """Trem de acionamento em duas massas (pu, base da máquina)"""

    model_config = ConfigDict(frozen=True)

    shaft_stiffness: float = Field(0.3, ge=0, description="pu torque / rad elétrico")
    mutual_damping: float = Field(1.5, ge=0, description="pu torque / pu velocidade")
    rotor_inertia_h: float = Field(4.0, gt=0, description="s")
    generator_inertia_h: float = Field(0.6, gt=0, description="s")
    electrical_base: float = Field(314.1592653589793, gt=0, description="rad/s")


class WindFleet(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_wt: int = Field(95, gt=0)
    turbine_rating: float = Field(2.0, gt=0, description="MW")
    installed_capacity: Optional[float] = None
    wind_speed_vw: float = Field(10.25, gt=0)
    capacity_factor_at_vw: float = 0.80
    rated_rotor_speed: float = Field(1.2, gt=0, description="pu na velocidade de vento nominal")
    controller: WindControllerParams = Field(default_factory=WindControllerParams)
    two_mass: TwoMassParams = Field(default_factory=TwoMassParams)

    @model_validator(mode="before")
    @classmethod
    def _default_capacity(cls, data):
        if isinstance(data, dict) and data.get("installed_capacity") is None:
            data = dict(data)
            n_wt = data.get("n_wt", cls.model_fields["n_wt"].default)
            rating = data.get("turbine_rating", cls.model_fields["turbine_rating"].default)
            data["installed_capacity"] = n_wt * rating
        return data

    @model_validator(mode="after")
    def _check_invariants(self) -> "WindFleet":
        expected = self.n_wt * self.turbine_rating
        if abs(self.installed_capacity - expected) > _TOL:
            raise ValueError("installed_capacity must equal n_wt * turbine_rating")
        if not 0 < self.capacity_factor_at_vw <= 1:
            raise ValueError("capacity_factor_at_vw must lie in (0, 1]")
        return self

    @property
    def available_power(self) -> float:
        """MW disponíveis na velocidade de vento fixa"""
        return self.installed_capacity * self.capacity_factor_at_vw


# =============================================================================
# BASELINE E GRADE DE CENÁRIOS
# =============================================================================


class BaselineParams(BaseModel):
    """Modelo de máquina única equivalente dos estudos simplificados"""

    model_config = ConfigDict(frozen=True)

    inertia_h: float = Field(5.0, gt=0, description="s na base da carga")
    imbalance: float = Field(0.10, gt=0, lt=1, description="degrau em fração da demanda")
    droop_r: float = Field(0.125, gt=0, le=1, description="estatismo equivalente na base da carga")
    governor_lag: float = Field(0.6, ge=0, description="s")
    damping_d: float = Field(1.0, ge=0, description="pu na base da carga")
    agc_gain_factor: float = Field(1.5, ge=0)


class ScenarioLevels(BaseModel):
    model_config = ConfigDict(frozen=True)

    demand_levels: Tuple[float, ...] = (300.0, 350.0, 400.0, 450.0, 500.0, 550.0)
    wind_levels: Tuple[float, ...] = (30.0, 60.0, 90.0, 120.0, 150.0)
    representative_hour: int = Field(12, ge=0)
    horizon: int = Field(24, gt=0)
    wind_loss_fraction: float = Field(0.5, ge=0, le=1)

    @field_validator("demand_levels", "wind_levels")
    @classmethod
    def _strictly_increasing(cls, v):
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("levels must be strictly increasing")
        return v


class FleetData(BaseModel):
    """Conteúdo completo do arquivo de configuração"""

    model_config = ConfigDict(frozen=True)

    units: Tuple[ThermalUnit, ...]
    system: PowerSystem
    wind: WindFleet
    governors: GovernorParams = Field(default_factory=GovernorParams)
    baseline: BaselineParams = Field(default_factory=BaselineParams)
    scenarios: ScenarioLevels = Field(default_factory=ScenarioLevels)

    @model_validator(mode="after")
    def _unique_ids(self) -> "FleetData":
        ids = [u.id for u in self.units]
        if len(ids) != len(set(ids)):
            raise ValueError("unit ids must be unique")
        return self

    def unit(self, unit_id: str) -> ThermalUnit:
        for u in self.units:
            if u.id == unit_id:
                return u
        raise KeyError(unit_id)


# =============================================================================
# CARREGAMENTO
# =============================================================================


def _first_error(exc: ValidationError) -> str:
    err = exc.errors()[0]
    where = ".".join(str(p) for p in err.get("loc", ()))
    msg = err.get("msg", "invalid value")
    return f"{where}: {msg}" if where else msg


def _fill_unit_defaults(raw: Dict, governors: GovernorParams) -> Dict:
    """Completa inércia e estatismo omitidos com os valores da tecnologia"""
    unit = dict(raw)
    tech = Technology(unit["tech"])
    unit.setdefault("inertia_h", governors.inertia(tech))
    unit.setdefault("droop_r", governors.droop(tech))
    if "cost_segments" in unit:
        unit["cost_segments"] = [
            seg if isinstance(seg, dict) else {"width": seg[0], "marginal_cost": seg[1]}
            for seg in unit["cost_segments"]
        ]
    if "startup_types" in unit:
        unit["startup_types"] = [
            st if isinstance(st, dict) else {"min_offline_hours": st[0], "cost": st[1]}
            for st in unit["startup_types"]
        ]
    return unit


def parse_fleet(data: Dict) -> FleetData:
    """Valida um dicionário já carregado (mesmo esquema do YAML)"""
    if not isinstance(data, dict):
        raise FleetConfigError("fleet config must be a mapping at the top level")
    try:
        governors = GovernorParams(**(data.get("governors") or {}))
        system_raw = dict(data.get("system") or {})
        if "load_shedding" in system_raw:
            system_raw["shed_table"] = {"steps": system_raw.pop("load_shedding")}
        units = [_fill_unit_defaults(u, governors) for u in data.get("units") or []]
        if not units:
            raise FleetConfigError("fleet config has no thermal units", rule="units")
        return FleetData(
            units=units,
            system=system_raw,
            wind=data.get("wind") or {},
            governors=governors,
            baseline=data.get("baseline") or {},
            scenarios=data.get("scenarios") or {},
        )
    except ValidationError as e:
        rule = _first_error(e)
        raise FleetConfigError(f"invalid fleet config: {rule}", rule=rule) from e
    except (KeyError, TypeError, ValueError) as e:
        raise FleetConfigError(f"invalid fleet config: {e}") from e


def load_dataset(path: str) -> FleetData:
    """Lê e valida o arquivo YAML completo"""
    file = Path(path)
    if not file.is_file():
        raise FileNotFoundError(f"fleet config not found: {path}")
    try:
        with open(file, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except yaml.YAMLError as e:
        raise FleetConfigError(f"cannot parse {path}: {e}") from e

    dataset = parse_fleet(data)
    mix = ", ".join(f"{tech}={n}" for tech, n in fleet_composition(dataset.units).items() if n)
    logger.info(
        f"Fleet loaded from {path}: {len(dataset.units)} thermal units ({mix}), "
        f"{dataset.wind.installed_capacity:.1f} MW wind"
    )
    return dataset


def load_fleet(path: str) -> Tuple[List[ThermalUnit], PowerSystem, WindFleet]:
    """
    Carrega a frota a partir do arquivo de configuração.

    Args:
        path: caminho do YAML

    Returns:
        (unidades térmicas, sistema, parque eólico)
    """
    dataset = load_dataset(path)
    return list(dataset.units), dataset.system, dataset.wind


def fleet_composition(units: Iterable[ThermalUnit]) -> Dict[str, int]:
    counts = {tech.value: 0 for tech in Technology}
    for u in units:
        counts[u.tech.value] += 1
    return counts


# =============================================================================
# OPERAÇÕES
# =============================================================================


def unit_inertia(unit: ThermalUnit, s_base: float) -> float:
    """Contribuição 2·H·S/S_base de uma unidade (s)"""
    return 2.0 * unit.inertia_h * unit.rated_power / s_base


def aggregate_inertia(units: Iterable[ThermalUnit], s_base: float) -> float:
    """
    Constante de tempo mecânica T_m das unidades em serviço, na base do sistema.

    Raises:
        ScenarioError: nenhuma unidade síncrona em serviço
    """
    if s_base <= 0:
        raise ValueError("s_base must be > 0")
    units = list(units)
    if not units:
        raise ScenarioError("no synchronous units committed; system cannot be simulated")
    return sum(unit_inertia(u, s_base) for u in units)


def shed_amount(step: int, demand: float, system: PowerSystem) -> float:
    """
    Carga deslastrada (MW) pelo degrau `step` (1..8), interpolada
    linearmente entre o vale e a ponta.
    """
    steps = system.shed_table.steps
    if not 1 <= step <= len(steps):
        raise ValueError(f"shedding step must be in 1..{len(steps)} (got {step})")
    lo, hi = system.demand_valley, system.demand_peak
    if demand < lo - 1e-9 or demand > hi + 1e-9:
        raise ScenarioError(
            f"demand {demand:.3f} MW outside shedding interpolation range [{lo}, {hi}] MW"
        )
    row = steps[step - 1]
    w = min(max((demand - lo) / (hi - lo), 0.0), 1.0)
    return (1.0 - w) * row.shed_valley + w * row.shed_peak
