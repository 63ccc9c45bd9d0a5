"""
Unit commitment determinístico de 24 h
Despacho por ordem de mérito, requisito de reserva girante, custos de
partida por tipo, trajetórias de partida, solver exato (programação
dinâmica exaustiva sobre modos das unidades) e branch-and-bound.
"""
import logging
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.config import settings
from app.core.errors import GapNotMetError, InfeasibleError, InstanceTooLargeError
from app.core.tables import UC_TOLERANCE
from app.services.fleet import ThermalUnit

logger = logging.getLogger(__name__)

TOL = UC_TOLERANCE
EXACT_MAX_UNITS = 5
EXACT_MAX_HOURS = 8
DEFAULT_OFFLINE_HOURS = 168
CURVE_CACHE_SIZE = 4096


# =============================================================================
# TIPOS
# =============================================================================


class InitialUnitState(BaseModel):
    model_config = ConfigDict(frozen=True)

    on: bool = False
    hours_in_state: int = Field(DEFAULT_OFFLINE_HOURS, ge=1)
    output: float = Field(0.0, ge=0)


class UCInstance(BaseModel):
    """Instância de UC: perfis horários e estado inicial de cada unidade"""

    model_config = ConfigDict(frozen=True)

    units: Tuple[ThermalUnit, ...]
    demand: Tuple[float, ...]
    wind_forecast: Tuple[float, ...]
    likely_wind_loss: Optional[Tuple[float, ...]] = None
    initial_state: Dict[str, InitialUnitState] = Field(default_factory=dict)
    horizon: int = 24
    wind_capacity: Optional[float] = None
    wind_loss_fraction: float = Field(0.5, ge=0, le=1)

    @model_validator(mode="after")
    def _check(self) -> "UCInstance":
        if not self.units:
            raise ValueError("instance needs at least one unit")
        ordered = tuple(sorted(self.units, key=lambda u: u.id))
        object.__setattr__(self, "units", ordered)

        if len(self.demand) != self.horizon or len(self.wind_forecast) != self.horizon:
            raise ValueError(f"demand and wind_forecast must have {self.horizon} hourly values")
        if any(d <= 0 for d in self.demand):
            raise ValueError("demand must be > 0 every hour")
        if any(w < 0 for w in self.wind_forecast):
            raise ValueError("wind_forecast must be >= 0")
        if self.wind_capacity is not None and any(w > self.wind_capacity + TOL for w in self.wind_forecast):
            raise ValueError("wind_forecast exceeds installed wind capacity")

        if self.likely_wind_loss is None:
            loss = tuple(self.wind_loss_fraction * w for w in self.wind_forecast)
            object.__setattr__(self, "likely_wind_loss", loss)
        elif len(self.likely_wind_loss) != self.horizon:
            raise ValueError(f"likely_wind_loss must have {self.horizon} hourly values")

        known = {u.id for u in self.units}
        unknown = set(self.initial_state) - known
        if unknown:
            raise ValueError(f"initial_state for unknown units: {', '.join(sorted(unknown))}")
        return self

    def initial(self, unit_id: str) -> InitialUnitState:
        return self.initial_state.get(unit_id, InitialUnitState())

    def net_demand(self, hour: int) -> float:
        return self.demand[hour] - self.wind_forecast[hour]


class ReserveRequirement(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: float
    demand_increase: float
    wind_loss: float
    largest_unit: float


class CostBreakdown(BaseModel):
    startup: float = 0.0
    fuel: float = 0.0
    om: float = 0.0
    wear_tear: float = 0.0

    @property
    def total(self) -> float:
        return self.startup + self.fuel + self.om + self.wear_tear


class UCSolution(BaseModel):
    """Programação horária de cada unidade térmica"""

    unit_ids: List[str]
    commitment: List[List[int]]
    dispatch: List[List[float]]
    startup: List[List[int]]
    startup_type: List[List[int]]
    startup_cost: List[List[float]]
    cost: CostBreakdown
    reserve_requirement: List[float]
    reserve_margin: List[float]
    status: str = "optimal"
    gap: float = 0.0
    lower_bound: Optional[float] = None
    nodes: int = 0

    @property
    def total_cost(self) -> float:
        return self.cost.total

    def committed_at(self, hour: int) -> List[str]:
        return [uid for uid, row in zip(self.unit_ids, self.commitment) if row[hour]]

    def hour_dispatch(self, hour: int) -> Dict[str, float]:
        """Despacho das unidades em serviço na hora (exclui trajetórias de partida)"""
        return {
            uid: p[hour]
            for uid, row, p in zip(self.unit_ids, self.commitment, self.dispatch)
            if row[hour]
        }

    def dispatch_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.dispatch, index=self.unit_ids)
        frame.index.name = "unit"
        frame.columns = [f"h{h:02d}" for h in range(frame.shape[1])]
        return frame

    def to_dict(self) -> Dict:
        data = self.model_dump()
        data["cost"]["total"] = self.total_cost
        return data


# =============================================================================
# OPERAÇÕES PÚBLICAS
# =============================================================================


def reserve_requirement(
    instance: UCInstance, dispatch: Mapping[str, float], hour: int
) -> ReserveRequirement:
    """
    Reserva girante mínima da hora: máximo entre o aumento de demanda até
    a hora seguinte (zero na última), a perda provável de vento e a maior
    potência despachada entre as unidades em serviço.
    """
    last = instance.horizon - 1
    increase = 0.0 if hour >= last else max(0.0, instance.demand[hour + 1] - instance.demand[hour])
    loss = max(0.0, instance.likely_wind_loss[hour])
    largest = max(dispatch.values(), default=0.0)
    return ReserveRequirement(
        value=max(increase, loss, largest),
        demand_increase=increase,
        wind_loss=loss,
        largest_unit=largest,
    )


def dispatch_hour(committed: Sequence[ThermalUnit], net_demand: float) -> Tuple[Dict[str, float], float]:
    """
    Despacho econômico de uma hora por ordem de mérito.

    Args:
        committed: unidades em serviço
        net_demand: demanda líquida a atender (MW)

    Returns:
        (potência por unidade, custo de combustível em €)

    Raises:
        InfeasibleError: demanda fora da faixa [Σ mínimos, Σ nominais]
    """
    units = sorted(committed, key=lambda u: u.id)
    power, fuel = MeritCurve(units).dispatch(net_demand)
    return {u.id: p for u, p in zip(units, power)}, fuel


def startup_type_index(unit: ThermalUnit, offline_hours: float) -> int:
    """Índice do tipo de partida: maior limiar <= horas fora de serviço"""
    if offline_hours < unit.min_down:
        raise ValueError(
            f"illegal start of {unit.id}: offline {offline_hours} h < min_down {unit.min_down} h"
        )
    index = 0
    for k, st in enumerate(unit.startup_types):
        if st.min_offline_hours <= offline_hours:
            index = k
    return index


def startup_cost(unit: ThermalUnit, offline_hours: float) -> float:
    """Custo de partida em função do tempo fora de serviço"""
    return unit.startup_types[startup_type_index(unit, offline_hours)].cost


def startup_trajectory(unit: ThermalUnit, start_hour: int) -> List[Tuple[int, float]]:
    """
    Rampa linear de 0 até a potência mínima durante startup_duration horas.
    A última entrada é a própria hora de entrada em serviço.
    """
    d = unit.startup_duration
    if d <= 1:
        return []
    return [(start_hour - d + k, unit.min_power * k / d) for k in range(1, d + 1)]


def flat_instance(
    units: Sequence[ThermalUnit],
    demand: float,
    wind: float,
    horizon: int = 24,
    wind_loss_fraction: float = 0.5,
    initial_state: Optional[Mapping[str, InitialUnitState]] = None,
    wind_capacity: Optional[float] = None,
) -> UCInstance:
    return UCInstance(
        units=tuple(units),
        demand=(demand,) * horizon,
        wind_forecast=(wind,) * horizon,
        initial_state=dict(initial_state or {}),
        horizon=horizon,
        wind_loss_fraction=wind_loss_fraction,
        wind_capacity=wind_capacity,
    )


# =============================================================================
# CURVA DE MÉRITO
# =============================================================================


class MeritCurve:
    """
    Custo de um conjunto de unidades em serviço em função da carga líquida:
    todas na potência mínima, depois os trechos em ordem de mérito
    (custo marginal, id da unidade, trecho).
    """

    def __init__(
        self,
        units: Sequence[ThermalUnit],
        steps: Optional[Sequence[Tuple[int, float, float]]] = None,
    ):
        self.units = list(units)
        if steps is None:
            order = sorted(
                (seg.marginal_cost, u.id, k, i, seg.width)
                for i, u in enumerate(self.units)
                for k, seg in enumerate(u.cost_segments)
            )
            steps = [(i, width, price) for price, _, _, i, width in order]
        # (posição da unidade, largura MW, custo marginal €/MWh)
        self.steps = [s for s in steps if s[1] > 0]
        self.floor = sum(u.min_power for u in self.units)
        self.ceiling = sum(u.rated_power for u in self.units)

        load = self.floor
        fuel = sum(u.min_power_cost for u in self.units)
        om = sum(u.om_cost * u.min_power for u in self.units)
        self.loads, self.fuels, self.oms = [load], [fuel], [om]
        for i, width, price in self.steps:
            load += width
            fuel += width * price
            om += width * self.units[i].om_cost
            self.loads.append(load)
            self.fuels.append(fuel)
            self.oms.append(om)

    def dispatch(self, load: float) -> Tuple[List[float], float]:
        """Potência por unidade (na ordem de `units`) e custo de combustível"""
        if load < self.floor - TOL:
            raise InfeasibleError(
                f"net demand {load:.3f} MW below the sum of minimum outputs {self.floor:.3f} MW"
            )
        if load > self.ceiling + TOL:
            raise InfeasibleError(
                f"net demand {load:.3f} MW above the sum of rated outputs {self.ceiling:.3f} MW"
            )
        power = [u.min_power for u in self.units]
        fuel = self.fuels[0]
        remaining = load - self.floor
        for i, width, price in self.steps:
            if remaining <= 0:
                break
            take = min(width, remaining)
            power[i] += take
            fuel += take * price
            remaining -= take
        return power, fuel

    def cost(self, load: float) -> float:
        """Combustível + O&M na carga dada, entre floor e ceiling"""
        k = max(0, bisect_right(self.loads, load) - 1)
        if k >= len(self.steps):
            return self.fuels[-1] + self.oms[-1]
        i, _, price = self.steps[k]
        extra = max(0.0, load - self.loads[k])
        return self.fuels[k] + self.oms[k] + extra * (price + self.units[i].om_cost)

    def reserve_limit(self) -> Optional[float]:
        """
        Maior carga em que a folga girante ainda cobre a maior potência
        despachada. A diferença folga - maior potência só decresce com a
        carga, logo a região viável é [floor, limite]. None se vazia.
        """
        power = [u.min_power for u in self.units]
        largest = max(power, default=0.0)
        load = self.floor
        if self.ceiling - load < largest - TOL:
            return None
        for i, width, _ in self.steps:
            slack = self.ceiling - load
            if slack - width - max(largest, power[i] + width) >= 0:
                load += width
                power[i] += width
                largest = max(largest, power[i])
                continue
            # raiz dentro do trecho: antes ou depois de a unidade virar a maior
            switch = max(0.0, largest - power[i])
            delta = slack - largest
            if delta > switch:
                delta = (slack - power[i]) / 2.0
            return load + max(0.0, delta)
        return load


# =============================================================================
# NÚCLEO DE AVALIAÇÃO
# =============================================================================


@dataclass
class _HourResult:
    power: Dict[int, float]
    fuel: float
    om: float
    requirement: float
    headroom: float
    feasible_reserve: bool

    @property
    def cost(self) -> float:
        return self.fuel + self.om


@dataclass
class _UnitData:
    unit: ThermalUnit
    min_power: float
    rated: float
    om: float
    min_cost: float
    c1: float
    duration: int
    traj_cap: float
    traj_energy: float
    traj_price: float
    cheapest_start: float
    segments: List[Tuple[float, float]]
    envelope: List[Tuple[float, float]] = field(default_factory=list)


@dataclass(frozen=True)
class _Charges:
    """
    Rateio dos custos de partida entre as horas: cobrança por hora em
    serviço ([hora][unidade]) e, para as rampas, preço por MWh e valor fixo
    por hora com rampa. Nenhuma programação paga nas horas mais do que paga
    em partidas, então a soma dos ótimos horários cobrados é um limite inferior.
    """

    on: Tuple[Tuple[float, ...], ...]
    traj_price: Tuple[float, ...]
    traj_fixed: Tuple[float, ...]


def _envelope(u: ThermalUnit) -> List[Tuple[float, float]]:
    """Envoltória convexa de {(0, 0)} ∪ curva de custo (+O&M): relaxação do compromisso"""
    points = [(u.min_power, u.min_power_cost + u.om_cost * u.min_power)]
    for seg in u.cost_segments:
        p, c = points[-1]
        points.append((p + seg.width, c + seg.width * (seg.marginal_cost + u.om_cost)))
    best = min(range(len(points)), key=lambda k: (points[k][1] / points[k][0], k))
    p_star, c_star = points[best]
    pieces = [(c_star / p_star, p_star)]
    for seg in u.cost_segments[best:]:
        if seg.width > 0:
            pieces.append((seg.marginal_cost + u.om_cost, seg.width))
    return pieces


class _Model:
    """Dados pré-calculados de uma instância, compartilhados pelos solvers"""

    def __init__(self, instance: UCInstance):
        self.instance = instance
        self.units = list(instance.units)
        self.n = len(self.units)
        self.H = instance.horizon
        self.data: List[_UnitData] = []
        for u in self.units:
            d = u.startup_duration
            traj_cap = u.min_power * (d - 1) / d if d > 1 else 0.0
            cheapest_start = min(st.cost for st in u.startup_types) + u.wear_tear_cost
            traj_energy = u.min_power * (d - 1) / 2.0 if d > 1 else 0.0
            # cada partida custa ao menos cheapest_start, rateado pela energia da rampa
            surcharge = cheapest_start / traj_energy if traj_energy > 0 else 0.0
            self.data.append(
                _UnitData(
                    unit=u,
                    min_power=u.min_power,
                    rated=u.rated_power,
                    om=u.om_cost,
                    min_cost=u.min_power_cost + u.om_cost * u.min_power,
                    c1=u.first_marginal_cost,
                    duration=d,
                    traj_cap=traj_cap,
                    traj_energy=traj_energy,
                    traj_price=u.first_marginal_cost + u.om_cost + surcharge,
                    cheapest_start=cheapest_start,
                    segments=[(s.marginal_cost + u.om_cost, s.width) for s in u.cost_segments],
                    envelope=_envelope(u),
                )
            )
        # ordem de mérito global: (custo, id da unidade, trecho)
        self.merit = sorted(
            (s.marginal_cost, u.id, k, i, s.width)
            for i, u in enumerate(self.units)
            for k, s in enumerate(u.cost_segments)
        )
        self.max_price = max(
            (s.marginal_cost + u.om_cost for u in self.units for s in u.cost_segments), default=0.0
        )
        self.increase = [
            0.0 if h == self.H - 1 else max(0.0, instance.demand[h + 1] - instance.demand[h])
            for h in range(self.H)
        ]
        self.loss = [max(0.0, x) for x in instance.likely_wind_loss]
        self.base_requirement = [max(a, b) for a, b in zip(self.increase, self.loss)]
        self.initial = [instance.initial(u.id) for u in self.units]
        self.no_charges = _Charges(
            on=tuple((0.0,) * self.n for _ in range(self.H)),
            traj_price=tuple(d.traj_price for d in self.data),
            traj_fixed=(0.0,) * self.n,
        )
        self._hour_cache: Dict[Tuple, Optional[_HourResult]] = {}
        self._curves: Dict[Tuple[int, ...], MeritCurve] = {}

    # -------------------------------------------------------------------------

    def curve(self, on: Tuple[int, ...]) -> MeritCurve:
        curve = self._curves.get(on)
        if curve is None:
            if len(self._curves) >= CURVE_CACHE_SIZE:
                self._curves.clear()
            pos = {i: k for k, i in enumerate(on)}
            steps = [(pos[i], width, price) for price, _, _, i, width in self.merit if i in pos]
            curve = MeritCurve([self.units[i] for i in on], steps)
            self._curves[on] = curve
        return curve

    def first_start_hour(self, i: int) -> int:
        """Primeira hora em que a unidade pode (re)entrar em serviço"""
        unit, d, init = self.units[i], self.data[i], self.initial[i]
        if init.on:
            return max(0, unit.min_up - init.hours_in_state) + max(unit.min_down, d.duration - 1, 1)
        return max(unit.min_down - init.hours_in_state, d.duration - 1, 0)

    def first_start_cost(self, i: int) -> float:
        """Menor custo (partida + desgaste) da primeira partida de uma unidade fora de serviço"""
        unit = self.units[i]
        offline = self.initial[i].hours_in_state + self.first_start_hour(i)
        k = startup_type_index(unit, offline)
        return min(st.cost for st in unit.startup_types[k:]) + unit.wear_tear_cost

    def ramp_possible(self, i: int, h: int) -> bool:
        """A hora h pode pertencer a uma rampa de partida da unidade i"""
        d = self.data[i].duration
        if d <= 1 or h > self.H - 2:
            return False
        return h + d - 1 >= self.first_start_hour(i)

    def dispatch_set(
        self, h: int, on: Tuple[int, ...], net: float, curve: Optional[MeritCurve] = None
    ) -> Optional[_HourResult]:
        """Despacho por mérito do conjunto `on` e checagem da reserva girante"""
        curve = curve or self.curve(on)
        if not curve.floor - TOL <= net <= curve.ceiling + TOL:
            return None
        powers, fuel = curve.dispatch(min(max(net, curve.floor), curve.ceiling))
        power = dict(zip(on, powers))
        om = sum(self.data[i].om * p for i, p in power.items())
        requirement = max(self.base_requirement[h], max(powers))
        headroom = curve.ceiling - sum(powers)
        return _HourResult(
            power=power,
            fuel=fuel,
            om=om,
            requirement=requirement,
            headroom=headroom,
            feasible_reserve=headroom >= requirement - TOL,
        )

    def evaluate_hour(self, h: int, on: Tuple[int, ...], traj: Tuple[Tuple[int, float], ...]) -> Optional[_HourResult]:
        """Despacho exato da hora para o conjunto `on` com trajetórias fixas"""
        key = (h, on, traj)
        if key in self._hour_cache:
            return self._hour_cache[key]

        traj_mw = sum(mw for _, mw in traj)
        net = self.instance.net_demand(h) - traj_mw
        result = None
        if on:
            result = self.dispatch_set(h, on, net)
            if result is not None:
                for i, mw in traj:
                    result.fuel += self.data[i].c1 * mw
                    result.om += self.data[i].om * mw
        elif abs(net) <= TOL and self.base_requirement[h] <= TOL:
            fuel = sum(self.data[i].c1 * mw for i, mw in traj)
            om = sum(self.data[i].om * mw for i, mw in traj)
            result = _HourResult({}, fuel, om, 0.0, 0.0, True)

        self._hour_cache[key] = result
        return result

    def hour_value(
        self, h: int, on: Tuple[int, ...], options: Sequence[int], charges: "_Charges"
    ) -> float:
        """
        Limite inferior do custo da hora (mais cobranças) com o conjunto `on`
        em serviço e rampas possíveis das unidades em `options`; inf se inviável.
        Rampa aliviando a carga líquida custa ao menos o menor preço e o menor
        valor fixo entre as opções.
        """
        net = self.instance.net_demand(h)
        base = self.base_requirement[h]
        column = charges.on[h]
        charged = sum(column[i] for i in on)
        price = min((charges.traj_price[j] for j in options), default=math.inf)
        fixed = min((charges.traj_fixed[j] for j in options), default=0.0)
        ramp_cap = sum(self.data[j].traj_cap for j in options)

        if not on:
            if base > TOL or net < -TOL:
                return math.inf
            if net <= TOL:
                return charged
            return price * net + fixed + charged if net <= ramp_cap + TOL else math.inf

        curve = self.curve(on)
        best = math.inf
        res = self.dispatch_set(h, on, net, curve)
        if res is not None and res.feasible_reserve:
            best = res.cost
        if not options or ramp_cap <= 0:
            return best + charged

        limit = curve.reserve_limit()
        if limit is None:
            return best + charged
        low = max(curve.floor, net - ramp_cap)
        high = min(limit, curve.ceiling - base, net)
        if low <= high + TOL:
            # mínimo de uma função linear por partes: extremos e pontos de quebra
            points = [low, min(max(high, low), curve.ceiling)]
            points.extend(y for y in curve.loads if low < y < high)
            for y in points:
                if y >= net - TOL:
                    continue
                value = curve.cost(y) + price * (net - y) + fixed
                if value < best:
                    best = value
        return best + charged

    def relaxed_hour_bound(
        self,
        h: int,
        status: Sequence[Optional[int]],
        traj: Sequence[Tuple[int, float]],
        optional_traj: Sequence[int],
        charges: Optional["_Charges"] = None,
    ) -> float:
        """
        Limite inferior da hora com compromisso relaxado: unidades fixas em
        serviço na mínima, livres pela envoltória convexa, rampas possíveis
        como recurso opcional. Retorna inf se inviável.
        """
        charges = charges or self.no_charges
        column = charges.on[h]
        traj_mw = sum(mw for _, mw in traj)
        net = self.instance.net_demand(h) - traj_mw
        cost = sum((self.data[i].c1 + self.data[i].om) * mw for i, mw in traj)

        pieces: List[Tuple[float, float]] = []
        floor = 0.0
        capacity = 0.0
        optional_cap = 0.0
        for i, s in enumerate(status):
            d = self.data[i]
            if s == 1:
                floor += d.min_power
                capacity += d.rated
                cost += d.min_cost + column[i]
                pieces.extend(d.segments)
            elif s is None:
                capacity += d.rated
                cost += min(0.0, column[i])
                pieces.extend(d.envelope)
        for i in optional_traj:
            d = self.data[i]
            if d.traj_cap > 0:
                optional_cap += d.traj_cap
                pieces.append((charges.traj_price[i], d.traj_cap))

        if floor > net + TOL:
            return math.inf
        if capacity + optional_cap < net - TOL:
            return math.inf
        headroom_max = capacity - max(floor, net - optional_cap)
        if headroom_max < self.base_requirement[h] - TOL:
            return math.inf

        remaining = net - floor
        for price, width in sorted(pieces):
            if remaining <= 0:
                break
            take = min(width, remaining)
            cost += take * price
            remaining -= take
        if remaining > TOL:
            return math.inf
        return cost

    # -------------------------------------------------------------------------

    def commitment_violations(self, u: Sequence[Sequence[int]]) -> List[str]:
        """Tempos mínimos em serviço/fora de serviço e viabilidade das rampas"""
        problems = []
        for i, d in enumerate(self.data):
            unit = d.unit
            init = self.initial[i]
            prev = 1 if init.on else 0
            run = init.hours_in_state
            run_in_horizon = 0
            for h in range(self.H):
                cur = u[i][h]
                if cur == prev:
                    run += 1
                    run_in_horizon += 1
                    continue
                if prev == 1 and run < unit.min_up:
                    problems.append(f"{unit.id}: on-run of {run} h ending at hour {h - 1} < min_up {unit.min_up} h")
                if prev == 0:
                    if run < unit.min_down:
                        problems.append(
                            f"{unit.id}: off-run of {run} h ending at hour {h - 1} < min_down {unit.min_down} h"
                        )
                    if d.duration > 1 and run_in_horizon < d.duration - 1:
                        problems.append(
                            f"{unit.id}: start at hour {h} leaves no room for a {d.duration} h startup trajectory"
                        )
                prev = cur
                run = 1
                run_in_horizon = 1
        return problems

    def starts(self, u: Sequence[Sequence[int]]) -> List[Tuple[int, int, int]]:
        """(unidade, hora, horas fora de serviço) para cada partida"""
        events = []
        for i in range(self.n):
            init = self.initial[i]
            prev = 1 if init.on else 0
            off = 0 if init.on else init.hours_in_state
            for h in range(self.H):
                if u[i][h] == 1 and prev == 0:
                    events.append((i, h, off))
                off = 0 if u[i][h] == 1 else off + 1
                prev = u[i][h]
        return events

    def trajectories(self, starts: Sequence[Tuple[int, int, int]]) -> Dict[int, List[Tuple[int, float]]]:
        by_hour: Dict[int, List[Tuple[int, float]]] = {}
        for i, h, _ in starts:
            for hour, mw in startup_trajectory(self.units[i], h)[:-1]:
                if 0 <= hour < self.H:
                    by_hour.setdefault(hour, []).append((i, mw))
        return by_hour

    def price(self, u: Sequence[Sequence[int]], **extra) -> UCSolution:
        """Precifica uma matriz de compromisso completa"""
        problems = self.commitment_violations(u)
        if problems:
            raise InfeasibleError(problems[0])

        starts = self.starts(u)
        traj = self.trajectories(starts)
        cost = CostBreakdown()
        dispatch = [[0.0] * self.H for _ in range(self.n)]
        startup = [[0] * self.H for _ in range(self.n)]
        st_type = [[-1] * self.H for _ in range(self.n)]
        st_cost = [[0.0] * self.H for _ in range(self.n)]

        for i, h, off in starts:
            unit = self.units[i]
            k = startup_type_index(unit, off)
            startup[i][h] = 1
            st_type[i][h] = k
            st_cost[i][h] = unit.startup_types[k].cost
            cost.startup += unit.startup_types[k].cost
            cost.wear_tear += unit.wear_tear_cost

        requirement, margin = [], []
        for h in range(self.H):
            on = tuple(i for i in range(self.n) if u[i][h])
            hour_traj = tuple(sorted(traj.get(h, [])))
            res = self.evaluate_hour(h, on, hour_traj)
            if res is None:
                raise InfeasibleError(f"hour {h}: committed units cannot balance net demand", hour=h)
            if not res.feasible_reserve:
                raise InfeasibleError(
                    f"hour {h}: spinning reserve {res.headroom:.3f} MW below requirement {res.requirement:.3f} MW",
                    hour=h,
                )
            for i, p in res.power.items():
                dispatch[i][h] = p
            for i, mw in hour_traj:
                dispatch[i][h] = mw
            cost.fuel += res.fuel
            cost.om += res.om
            requirement.append(res.requirement)
            margin.append(res.headroom - res.requirement)

        return UCSolution(
            unit_ids=[x.id for x in self.units],
            commitment=[list(map(int, row)) for row in u],
            dispatch=dispatch,
            startup=startup,
            startup_type=st_type,
            startup_cost=st_cost,
            cost=cost,
            reserve_requirement=requirement,
            reserve_margin=margin,
            **extra,
        )


def evaluate_schedule(instance: UCInstance, commitment: Sequence[Sequence[int]]) -> UCSolution:
    """Precifica (e valida) uma matriz de compromisso [unidade][hora]"""
    return _Model(instance).price(commitment)


# =============================================================================
# SOLVER DE UMA HORA
# =============================================================================


def solve_single_hour(
    model: "_Model",
    hour: int,
    forced_on: Tuple[int, ...] = (),
    forced_off: Tuple[int, ...] = (),
    trajectory_options: Tuple[int, ...] = (),
    charges: Optional[_Charges] = None,
) -> Tuple[float, Tuple[int, ...]]:
    """
    Melhor conjunto de unidades para uma hora isolada (sem acoplamento
    temporal), por enumeração com poda pelo limite relaxado. Sem
    `trajectory_options` nem `charges` o resultado é exato; caso contrário
    é um limite inferior do custo da hora somado às cobranças que ela carrega.

    Returns:
        (custo, conjunto de índices); (inf, ()) se inviável
    """
    n = model.n
    charges = charges or model.no_charges
    order = sorted(range(n), key=lambda i: (model.units[i].full_load_average_cost, model.units[i].id))
    status: List[Optional[int]] = [None] * n
    for i in forced_on:
        status[i] = 1
    for i in forced_off:
        status[i] = 0
    free = [i for i in order if status[i] is None]
    best = [math.inf, ()]

    def dfs(k: int) -> None:
        if k == len(free):
            on = tuple(i for i in range(n) if status[i] == 1)
            options = [j for j in trajectory_options if status[j] != 1]
            value = model.hour_value(hour, on, options, charges)
            if value < best[0] - TOL:
                best[0] = value
                best[1] = on
            return
        i = free[k]
        for v in (1, 0):
            status[i] = v
            options = [j for j in trajectory_options if status[j] != 1]
            bound = model.relaxed_hour_bound(hour, status, [], options, charges)
            if bound < best[0] - TOL:
                dfs(k + 1)
        status[i] = None

    dfs(0)
    return best[0], best[1]


def hour_optimal_set(instance: UCInstance, hour: int) -> Tuple[float, List[str]]:
    """Conjunto de custo mínimo de uma hora isolada, sem restrições temporais"""
    model = _Model(instance)
    cost, on = solve_single_hour(model, hour)
    if cost == math.inf:
        raise InfeasibleError(f"hour {hour}: no unit set meets demand and reserve", hour=hour)
    return cost, [model.units[i].id for i in on]


# =============================================================================
# SOLVER EXATO (ESCALA DE ORÁCULO)
# =============================================================================


def _unit_modes(d: _UnitData, init: InitialUnitState):
    """Estados de um gerador e transições válidas para a programação dinâmica"""
    unit = d.unit
    cap_on = unit.min_up
    cap_off = max(unit.min_down, int(math.ceil(unit.startup_types[-1].min_offline_hours)), 1)

    start_state = ("on", min(init.hours_in_state, cap_on)) if init.on else ("off", min(init.hours_in_state, cap_off))

    def transitions(state):
        """(próximo estado, horas fora na partida ou None)"""
        kind = state[0]
        out = []
        if kind == "on":
            k = state[1]
            out.append((("on", min(k + 1, cap_on)), None))
            if k >= unit.min_up:
                if d.duration > 1:
                    out.append((("ramp", 1, 0), None))
                else:
                    out.append((("off", 1), None))
        elif kind == "off":
            k = state[1]
            out.append((("off", min(k + 1, cap_off)), None))
            if d.duration > 1:
                out.append((("ramp", 1, k), None))
            elif k >= unit.min_down:
                out.append((("on", 1), k))
        else:
            _, j, before = state
            if j < d.duration - 1:
                out.append((("ramp", j + 1, before), None))
            else:
                offline = before + d.duration - 1
                if offline >= unit.min_down:
                    out.append((("on", 1), offline))
        if kind == "on" and d.duration > 1 and state[1] >= unit.min_up:
            # desligar e permanecer fora também é possível sem iniciar rampa
            out.append((("off", 1), None))
        return out

    return start_state, transitions


def solve_exact(instance: UCInstance) -> UCSolution:
    """
    Ótimo global por enumeração exaustiva dos modos das unidades hora a hora
    (programação dinâmica sobre todas as matrizes de compromisso viáveis).

    Raises:
        InstanceTooLargeError: mais de 5 unidades ou 8 horas
        InfeasibleError: nenhuma programação atende demanda e reserva
    """
    if len(instance.units) > EXACT_MAX_UNITS or instance.horizon > EXACT_MAX_HOURS:
        raise InstanceTooLargeError(
            f"exhaustive enumeration limited to {EXACT_MAX_UNITS} units x {EXACT_MAX_HOURS} h "
            f"(got {len(instance.units)} x {instance.horizon})"
        )
    model = _Model(instance)
    n, H = model.n, model.H
    machines = [_unit_modes(model.data[i], model.initial[i]) for i in range(n)]

    # estado conjunto -> (custo acumulado, histórico de modos)
    frontier: Dict[Tuple, Tuple[float, Tuple]] = {tuple(m[0] for m in machines): (0.0, ())}
    for h in range(H):
        nxt: Dict[Tuple, Tuple[float, Tuple]] = {}
        for state in sorted(frontier, key=repr):
            acc, history = frontier[state]
            options = [machines[i][1](state[i]) for i in range(n)]
            for combo in product(*options):
                new_state = tuple(s for s, _ in combo)
                start_cost = 0.0
                for i, (_, offline) in enumerate(combo):
                    if offline is not None:
                        unit = model.units[i]
                        start_cost += startup_cost(unit, offline) + unit.wear_tear_cost
                on = tuple(i for i, s in enumerate(new_state) if s[0] == "on")
                traj = tuple(
                    (i, model.data[i].min_power * s[1] / model.data[i].duration)
                    for i, s in enumerate(new_state)
                    if s[0] == "ramp"
                )
                res = model.evaluate_hour(h, on, traj)
                if res is None or not res.feasible_reserve:
                    continue
                total = acc + start_cost + res.cost
                prev = nxt.get(new_state)
                if prev is None or total < prev[0] - 1e-9:
                    nxt[new_state] = (total, history + (new_state,))
        frontier = nxt
        if not frontier:
            raise InfeasibleError(f"hour {h}: no commitment meets demand and reserve", hour=h)

    # rampa sem entrada em serviço dentro do horizonte não é uma partida
    finished = [s for s in frontier if all(m[0] != "ramp" for m in s)]
    if not finished:
        raise InfeasibleError("no commitment completes its startups within the horizon")
    best_state = min(finished, key=lambda s: (frontier[s][0], repr(s)))
    _, history = frontier[best_state]
    u = [[1 if history[h][i][0] == "on" else 0 for h in range(H)] for i in range(n)]
    solution = model.price(u, status="optimal", gap=0.0)
    solution.lower_bound = solution.total_cost
    logger.debug(f"Exact UC: {n} units x {H} h, cost {solution.total_cost:.2f}")
    return solution


# =============================================================================
# BRANCH-AND-BOUND
# =============================================================================

# (distribuição das cobranças por hora, rampa cobrada só pelo preço por MWh)
CHARGE_SCHEMES = (("uniform", False), ("need", False), ("need", True))


def _forced_status(model: _Model) -> List[List[Optional[int]]]:
    """Fixações impostas pelo estado inicial (tempos mínimos e rampas)"""
    forced: List[List[Optional[int]]] = [[None] * model.H for _ in range(model.n)]
    for i, d in enumerate(model.data):
        init = model.initial[i]
        unit = d.unit
        if init.on:
            for h in range(min(model.H, max(0, unit.min_up - init.hours_in_state))):
                forced[i][h] = 1
        else:
            for h in range(min(model.H, model.first_start_hour(i))):
                forced[i][h] = 0
    return forced


def _start_charges(
    model: _Model,
    forced: List[List[Optional[int]]],
    hour_sets: Sequence[Tuple[int, ...]],
    spread: str = "uniform",
    lean: bool = False,
) -> _Charges:
    """
    Cobranças horárias que rateiam custos de partida.

    Rampas: cada partida paga ao menos a partida mais barata da unidade;
    a energia da rampa é cobrada até o preço marginal mais alto da frota e
    o resto vira valor fixo por hora de rampa (zero com `lean`).
    Horas em serviço: só unidades inicialmente fora de serviço, com o que
    sobra da primeira partida, distribuído uniformemente ou nas horas em
    que a unidade está no ótimo horário (`spread="need"`).
    """
    n, H = model.n, model.H
    on = [[0.0] * n for _ in range(H)]
    prices, fixed = [], []
    for i, d in enumerate(model.data):
        ramp_budget = 0.0
        sigma = tau = 0.0
        if d.duration > 1 and d.traj_energy > 0:
            sigma = min(max(0.0, model.max_price - d.c1 - d.om), d.cheapest_start / d.traj_energy)
            ramp_budget = sigma * d.traj_energy if lean else d.cheapest_start
            tau = (ramp_budget - sigma * d.traj_energy) / (d.duration - 1)
        prices.append(d.c1 + d.om + sigma)
        fixed.append(tau)

        if model.initial[i].on:
            continue
        first = model.first_start_hour(i)
        hours = [h for h in range(first, H) if forced[i][h] != 0]
        if not hours:
            continue
        budget = model.first_start_cost(i) - ramp_budget
        if budget <= 0:
            continue
        weights = {h: 1.0 for h in hours}
        if spread == "need":
            needed = {h: 1.0 for h in hours if i in hour_sets[h]}
            if needed:
                weights = needed
        total = sum(weights.values())
        for h, w in weights.items():
            on[h][i] = budget * w / total

    return _Charges(
        on=tuple(tuple(row) for row in on),
        traj_price=tuple(prices),
        traj_fixed=tuple(fixed),
    )


def _root_bound(
    model: _Model, forced: List[List[Optional[int]]], charges: _Charges
) -> Tuple[List[float], List[Tuple[int, ...]]]:
    """Ótimos horários cobrados: limite inferior por hora e conjunto que o atinge"""
    n = model.n
    values, sets = [], []
    cache: Dict[Tuple, Tuple[float, Tuple[int, ...]]] = {}
    for h in range(model.H):
        on = tuple(i for i in range(n) if forced[i][h] == 1)
        off = tuple(i for i in range(n) if forced[i][h] == 0)
        options = tuple(j for j in range(n) if forced[j][h] != 1 and model.ramp_possible(j, h))
        key = (model.instance.net_demand(h), model.base_requirement[h], on, off, options, charges.on[h])
        if key not in cache:
            cache[key] = solve_single_hour(model, h, on, off, options, charges)
        value, best_set = cache[key]
        values.append(value)
        sets.append(best_set)
    return values, sets


def _heuristic(model: _Model, hour_sets: List[Tuple[int, ...]]) -> Optional[UCSolution]:
    """Conjuntos ótimos por hora, reparados para respeitar tempos mínimos"""
    u = [[1 if i in hour_sets[h] else 0 for h in range(model.H)] for i in range(model.n)]
    for i, d in enumerate(model.data):
        unit = d.unit
        row = u[i]
        h = 0
        while h < model.H:
            if row[h] == 1 and (h == 0 or row[h - 1] == 0):
                end = h
                while end < model.H and row[end] == 1:
                    end += 1
                for k in range(end, min(model.H, h + unit.min_up)):
                    row[k] = 1
                h = max(end, h + 1)
            else:
                h += 1
        # lacunas curtas entre períodos em serviço ficam em serviço
        gap_limit = max(unit.min_down, d.duration - 1)
        h = 0
        while h < model.H:
            if row[h] == 0 and h > 0 and row[h - 1] == 1:
                end = h
                while end < model.H and row[end] == 0:
                    end += 1
                if end < model.H and end - h < gap_limit:
                    for k in range(h, end):
                        row[k] = 1
                h = end
            else:
                h += 1
    try:
        return model.price(u)
    except InfeasibleError:
        return None


def _period_moves(row: Sequence[int]) -> List[List[int]]:
    """Vizinhos de um perfil: remove, encurta ou estende um período, ou une dois"""
    H = len(row)
    runs = []
    h = 0
    while h < H:
        if row[h]:
            start = h
            while h < H and row[h]:
                h += 1
            runs.append((start, h - 1))
        else:
            h += 1

    def variant(lo: int, hi: int, value: int) -> List[int]:
        new = list(row)
        new[lo : hi + 1] = [value] * (hi - lo + 1)
        return new

    moves = []
    for start, end in runs:
        moves.append(variant(start, end, 0))
        if end > start:
            moves.append(variant(start, start, 0))
            moves.append(variant(end, end, 0))
        if start > 0:
            moves.append(variant(start - 1, start - 1, 1))
        if end < H - 1:
            moves.append(variant(end + 1, end + 1, 1))
    for (_, end), (start, _) in zip(runs, runs[1:]):
        moves.append(variant(end + 1, start - 1, 1))
    return moves


def _improve(model: _Model, solution: UCSolution, max_rounds: int = 50) -> UCSolution:
    """Busca local de primeira melhora sobre os períodos em serviço de cada unidade"""
    best = solution
    for _ in range(max_rounds):
        improved = False
        for i in range(model.n):
            for row in _period_moves(best.commitment[i]):
                trial = [row if k == i else r for k, r in enumerate(best.commitment)]
                try:
                    candidate = model.price(trial)
                except InfeasibleError:
                    continue
                if candidate.total_cost < best.total_cost - TOL:
                    best = candidate
                    improved = True
                    break
        if not improved:
            break
    return best


def solve_bnb(
    instance: UCInstance,
    gap_target: Optional[float] = None,
    node_budget: Optional[int] = None,
) -> UCSolution:
    """
    Branch-and-bound sobre os binários de compromisso (unidade, hora) em
    ordem lexicográfica.

    O limite global é a soma dos ótimos horários exatos (regra de reserva
    completa) com os custos de partida rateados entre as horas; o incumbente
    vem dos ótimos horários reparados e melhorados por busca local. Nós com
    limite >= incumbente/(1+gap) são podados.

    Args:
        instance: instância de UC
        gap_target: gap relativo aceito (padrão settings.UC_GAP_TARGET; 0 exige o ótimo)
        node_budget: máximo de nós explorados (padrão settings.UC_NODE_BUDGET)

    Returns:
        UCSolution com status "optimal", "within_gap" ou "gap_not_met"

    Raises:
        InfeasibleError: instância sem solução viável
        GapNotMetError: orçamento esgotado sem nenhuma solução viável
    """
    gap_target = settings.UC_GAP_TARGET if gap_target is None else gap_target
    node_budget = settings.UC_NODE_BUDGET if node_budget is None else node_budget
    model = _Model(instance)
    n, H = model.n, model.H
    forced = _forced_status(model)

    # ótimos horários exatos sem rampas: sementes da heurística
    hour_sets: List[Tuple[int, ...]] = []
    exact_cache: Dict[Tuple, Tuple[int, ...]] = {}
    for h in range(H):
        on = tuple(i for i in range(n) if forced[i][h] == 1)
        off = tuple(i for i in range(n) if forced[i][h] == 0)
        key = (instance.net_demand(h), model.base_requirement[h], on, off)
        if key not in exact_cache:
            exact_cache[key] = solve_single_hour(model, h, on, off)[1]
        hour_sets.append(exact_cache[key])

    def gap_met(cost: float, bound: float) -> bool:
        return cost <= bound * (1.0 + gap_target) + TOL

    incumbent: Optional[UCSolution] = None
    lower_bound = -math.inf
    for spread, lean in CHARGE_SCHEMES:
        charges = _start_charges(model, forced, hour_sets, spread, lean)
        values, sets = _root_bound(model, forced, charges)
        if lower_bound == -math.inf:
            bad = next((h for h, v in enumerate(values) if v == math.inf), None)
            if bad is not None:
                raise InfeasibleError(f"hour {bad}: demand plus reserve exceeds what the fleet can offer", hour=bad)
        lower_bound = max(lower_bound, sum(values))
        logger.debug(f"B&B root bound ({spread}, lean={lean}): {sum(values):.2f}")

        for seed in (hour_sets, sets):
            candidate = _heuristic(model, seed)
            if candidate is not None and (incumbent is None or candidate.total_cost < incumbent.total_cost - TOL):
                incumbent = _improve(model, candidate)
        if incumbent is not None and gap_met(incumbent.total_cost, lower_bound):
            break

    best_cost = incumbent.total_cost if incumbent is not None else math.inf
    preferred = incumbent.commitment if incumbent is not None else [
        [1 if i in hour_sets[h] else 0 for h in range(H)] for i in range(n)
    ]
    status: List[List[Optional[int]]] = [row[:] for row in forced]

    traj_at: List[List[Tuple[int, float]]] = [[] for _ in range(H)]
    hour_lb = [0.0] * H
    fixed_start_cost = [0.0]

    def optional_traj(h: int, pos_unit: int, pos_hour: int) -> List[int]:
        opts = []
        for j, d in enumerate(model.data):
            if not model.ramp_possible(j, h):
                continue
            if j > pos_unit:
                if status[j][h] != 1:
                    opts.append(j)
            elif j == pos_unit and status[j][h] != 1 and h + d.duration - 1 >= pos_hour:
                opts.append(j)
        return opts

    def recompute(h: int, pos_unit: int, pos_hour: int) -> None:
        column = [status[i][h] for i in range(n)]
        hour_lb[h] = model.relaxed_hour_bound(h, column, traj_at[h], optional_traj(h, pos_unit, pos_hour))

    for h in range(H):
        recompute(h, -1, 0)

    nodes = [0]
    exhausted = [False]
    proven = [incumbent is not None and gap_met(best_cost, lower_bound)]
    best = [incumbent, best_cost]

    def run_state(i: int, h: int) -> Tuple[int, int, int]:
        """(status anterior, duração do período, duração dentro do horizonte)"""
        init = model.initial[i]
        prev = 1 if init.on else 0
        run, inside = init.hours_in_state, 0
        for k in range(h):
            v = status[i][k]
            if v == prev:
                run += 1
                inside += 1
            else:
                prev, run, inside = v, 1, 1
        return prev, run, inside

    def implied_hours(i: int, h: int, v: int, prev: int, run: int, inside: int) -> int:
        """Horas seguintes a h obrigadas a repetir v pelos tempos mínimos"""
        unit, d = model.units[i], model.data[i]
        if v == prev:
            run, inside = run + 1, inside + 1
        else:
            run, inside = 1, 1
        if v == 1:
            need = unit.min_up - run
        else:
            need = unit.min_down - run
            if d.duration > 1:
                need = max(need, d.duration - 1 - inside)
        return max(0, min(need, H - 1 - h))

    def dfs(pos: int) -> None:
        if proven[0]:
            return
        if nodes[0] >= node_budget:
            exhausted[0] = True
            return
        nodes[0] += 1

        if pos == n * H:
            try:
                candidate = model.price(status)
            except InfeasibleError:
                return
            if candidate.total_cost < best[1] - TOL:
                best[0], best[1] = candidate, candidate.total_cost
                logger.debug(f"B&B incumbent {candidate.total_cost:.2f} after {nodes[0]} nodes")
                if gap_met(best[1], lower_bound):
                    proven[0] = True
            return

        i, h = divmod(pos, H)
        unit = model.units[i]
        d = model.data[i]
        prev, run, inside = run_state(i, h)
        first = preferred[i][h]
        choices = (first, 1 - first) if forced[i][h] is None else (forced[i][h],)

        for v in choices:
            if v != prev:
                if prev == 1 and run < unit.min_up:
                    continue
                if prev == 0 and (run < unit.min_down or (d.duration > 1 and inside < d.duration - 1)):
                    continue

            saved_status = status[i][h]
            status[i][h] = v
            implied = []
            for k in range(h + 1, h + 1 + implied_hours(i, h, v, prev, run, inside)):
                if status[i][k] is None:
                    status[i][k] = v
                    implied.append(k)
            touched = [h] + implied
            added_cost = 0.0
            if v == 1 and prev == 0:
                added_cost = startup_cost(unit, run) + unit.wear_tear_cost
                for hour, mw in startup_trajectory(unit, h)[:-1]:
                    traj_at[hour].append((i, mw))
                    touched.append(hour)
            fixed_start_cost[0] += added_cost
            saved_lb = {k: hour_lb[k] for k in touched}
            for k in saved_lb:
                recompute(k, i, h + 1)

            bound = sum(hour_lb) + fixed_start_cost[0]
            if bound < best[1] / (1.0 + gap_target) - TOL:
                dfs(pos + 1)

            for k, val in saved_lb.items():
                hour_lb[k] = val
            if v == 1 and prev == 0:
                for hour, _ in startup_trajectory(unit, h)[:-1]:
                    traj_at[hour].pop()
            for k in implied:
                status[i][k] = None
            fixed_start_cost[0] -= added_cost
            status[i][h] = saved_status
            if proven[0] or exhausted[0]:
                return

    dfs(0)

    solution = best[0]
    if solution is None:
        if exhausted[0]:
            raise GapNotMetError(f"no feasible schedule found within {node_budget} nodes")
        raise InfeasibleError("no commitment schedule satisfies demand, reserve and min up/down times")

    if exhausted[0] or proven[0]:
        bound = min(lower_bound, solution.total_cost)
    else:
        # árvore esgotada: nada melhora o incumbente em mais que o gap alvo
        bound = min(solution.total_cost, max(lower_bound, solution.total_cost / (1.0 + gap_target)))
    gap = 0.0 if solution.total_cost <= 0 else max(0.0, (solution.total_cost - bound) / solution.total_cost)
    if gap <= 1e-9:
        state = "optimal"
    elif gap <= gap_target:
        state = "within_gap"
    else:
        state = "gap_not_met"

    solution.status = state
    solution.gap = gap
    solution.lower_bound = bound
    solution.nodes = nodes[0]
    log = logger.warning if state == "gap_not_met" else logger.info
    log(f"B&B UC: cost {solution.total_cost:.2f} EUR, gap {gap:.4%}, {nodes[0]} nodes, status {state}")
    return solution


# =============================================================================
# VALIDAÇÃO
# =============================================================================


def validate_solution(instance: UCInstance, sol: UCSolution) -> List[str]:
    """
    Confere balanço, limites das unidades, tempos mínimos, regra de reserva
    e precificação das partidas. Lista vazia = solução viável e bem precificada.
    """
    model = _Model(instance)
    n, H = model.n, model.H
    violations: List[str] = []

    ids = [u.id for u in model.units]
    if sol.unit_ids != ids:
        return [f"unit ids {sol.unit_ids} do not match instance units {ids}"]
    if len(sol.commitment) != n or any(len(r) != H for r in sol.commitment):
        return ["commitment matrix has the wrong shape"]
    if len(sol.dispatch) != n or any(len(r) != H for r in sol.dispatch):
        return ["dispatch matrix has the wrong shape"]

    u = sol.commitment
    violations.extend(model.commitment_violations(u))

    starts = model.starts(u)
    traj = model.trajectories(starts)
    expected_traj = {(i, h): mw for h, items in traj.items() for i, mw in items}

    fuel = om = 0.0
    for h in range(H):
        dispatch = {}
        for i, unit in enumerate(model.units):
            p = sol.dispatch[i][h]
            if u[i][h]:
                if p < unit.min_power - TOL or p > unit.rated_power + TOL:
                    violations.append(
                        f"bounds: {unit.id} hour {h} output {p:.6f} MW outside [{unit.min_power}, {unit.rated_power}]"
                    )
                dispatch[unit.id] = p
                fuel += unit.fuel_cost(p)
                om += unit.om_cost * p
            else:
                allowed = expected_traj.get((i, h), 0.0)
                if abs(p - allowed) > TOL:
                    violations.append(f"bounds: {unit.id} hour {h} output {p:.6f} MW while offline")
                fuel += unit.first_marginal_cost * p
                om += unit.om_cost * p

        total = sum(sol.dispatch[i][h] for i in range(n)) + instance.wind_forecast[h]
        if abs(total - instance.demand[h]) > TOL:
            violations.append(f"balance: hour {h} supply {total:.6f} MW != demand {instance.demand[h]:.6f} MW")

        req = reserve_requirement(instance, dispatch, h)
        headroom = sum(model.units[i].rated_power - sol.dispatch[i][h] for i in range(n) if u[i][h])
        if headroom < req.value - TOL:
            violations.append(f"reserve: hour {h} headroom {headroom:.6f} MW < requirement {req.value:.6f} MW")

    start_total = wear = 0.0
    start_hours = {(i, h): off for i, h, off in starts}
    for i, unit in enumerate(model.units):
        for h in range(H):
            billed = sol.startup_cost[i][h]
            if (i, h) in start_hours:
                off = start_hours[(i, h)]
                try:
                    expected = startup_cost(unit, off)
                except ValueError:
                    continue
                if abs(billed - expected) > TOL:
                    violations.append(
                        f"pricing: {unit.id} hour {h} startup billed {billed:.6f} EUR, "
                        f"expected {expected:.6f} EUR after {off} h offline"
                    )
                start_total += expected
                wear += unit.wear_tear_cost
            elif abs(billed) > TOL:
                violations.append(f"pricing: {unit.id} hour {h} startup cost billed without a start")

    for name, expected, got in (
        ("startup", start_total, sol.cost.startup),
        ("fuel", fuel, sol.cost.fuel),
        ("om", om, sol.cost.om),
        ("wear_tear", wear, sol.cost.wear_tear),
    ):
        if abs(expected - got) > max(TOL, 1e-9 * abs(expected)):
            violations.append(f"pricing: {name} cost {got:.6f} EUR, expected {expected:.6f} EUR")
    return violations


# =============================================================================
# SERIALIZAÇÃO
# =============================================================================


def instance_from_dict(data: Mapping, units: Sequence[ThermalUnit], wind_capacity: Optional[float] = None) -> UCInstance:
    """Constrói a instância a partir do YAML de instância (unidades vêm da frota)"""
    horizon = int(data.get("horizon", len(data["demand"])))
    selected = data.get("units")
    chosen = [u for u in units if selected is None or u.id in selected]
    initial = {
        uid: InitialUnitState(**state) for uid, state in (data.get("initial_state") or {}).items()
    }
    return UCInstance(
        units=tuple(chosen),
        demand=tuple(float(x) for x in data["demand"]),
        wind_forecast=tuple(float(x) for x in data.get("wind_forecast", [0.0] * horizon)),
        likely_wind_loss=(
            tuple(float(x) for x in data["likely_wind_loss"]) if data.get("likely_wind_loss") is not None else None
        ),
        initial_state=initial,
        horizon=horizon,
        wind_capacity=wind_capacity,
        wind_loss_fraction=float(data.get("wind_loss_fraction", 0.5)),
    )


def instance_to_dict(instance: UCInstance) -> Dict:
    return {
        "horizon": instance.horizon,
        "units": [u.id for u in instance.units],
        "demand": list(instance.demand),
        "wind_forecast": list(instance.wind_forecast),
        "likely_wind_loss": list(instance.likely_wind_loss),
        "initial_state": {uid: s.model_dump() for uid, s in instance.initial_state.items()},
    }
