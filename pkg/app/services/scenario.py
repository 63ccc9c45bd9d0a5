"""
Grade de cenários demanda × vento
Para cada par monta uma instância de UC de perfil plano, resolve, toma a
hora representativa e constrói a contingência N-1 (desligamento da maior
unidade em serviço). Também orquestra a varredura de simulações.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.config import settings
from app.core.errors import FrequencyToolkitError, InfeasibleError, ScenarioError
from app.services.fleet import FleetData, ThermalUnit, aggregate_inertia
from app.services.freqsim import SimConfig, TimeSeries, participation_factors, simulate, simulate_baseline
from app.services.metrics import CellResult, evaluate
from app.services.ucsched import (
    DEFAULT_OFFLINE_HOURS,
    InitialUnitState,
    UCSolution,
    flat_instance,
    hour_optimal_set,
    solve_bnb,
)

logger = logging.getLogger(__name__)


# =============================================================================
# TIPOS
# =============================================================================


class Scenario(BaseModel):
    """Uma célula da grade: despacho da hora representativa e contingência"""

    model_config = ConfigDict(frozen=True)

    index: Optional[Tuple[int, int]] = None
    demand: float
    wind: float
    hour: int = 12
    units: Tuple[ThermalUnit, ...] = ()
    dispatch: Dict[str, float] = Field(default_factory=dict)
    s_base: float = 100.0
    solution: Optional[UCSolution] = None
    status: str = "ok"
    message: Optional[str] = None
    tripped_unit: Optional[str] = None
    t_m_pre: Optional[float] = None
    t_m_post: Optional[float] = None
    imbalance_mw: float = 0.0
    imbalance_pct: float = 0.0
    ku_post: Dict[str, float] = Field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.status == "ok"

    @property
    def label(self) -> str:
        where = f"({self.index[0]},{self.index[1]}) " if self.index is not None else ""
        return f"cell {where}{self.demand:.0f} MW / {self.wind:.0f} MW wind"

    @classmethod
    def from_dispatch(
        cls,
        units: Sequence[ThermalUnit],
        dispatch: Dict[str, float],
        demand: float,
        wind: float = 0.0,
        s_base: float = 100.0,
        **extra,
    ) -> "Scenario":
        """Cenário a partir de um despacho dado (sem UC)"""
        return cls(
            units=tuple(sorted(units, key=lambda u: u.id)),
            dispatch=dict(dispatch),
            demand=demand,
            wind=wind,
            s_base=s_base,
            **extra,
        )


class ScenarioGrid(BaseModel):
    demand_levels: Tuple[float, ...]
    wind_levels: Tuple[float, ...]
    cells: List[Scenario]

    @model_validator(mode="after")
    def _check(self) -> "ScenarioGrid":
        for name, levels in (("demand", self.demand_levels), ("wind", self.wind_levels)):
            if any(b <= a for a, b in zip(levels, levels[1:])):
                raise ValueError(f"{name} levels must be strictly increasing")
        if len(self.cells) != len(self.demand_levels) * len(self.wind_levels):
            raise ValueError("grid must hold one cell per demand x wind pair")
        return self

    def cell(self, row: int, col: int) -> Scenario:
        if not (0 <= row < len(self.demand_levels) and 0 <= col < len(self.wind_levels)):
            raise ScenarioError(
                f"cell ({row},{col}) outside the {len(self.demand_levels)}x{len(self.wind_levels)} grid"
            )
        return self.cells[row * len(self.wind_levels) + col]

    @property
    def feasible_cells(self) -> List[Scenario]:
        return [c for c in self.cells if c.feasible]


# =============================================================================
# CONTINGÊNCIA N-1
# =============================================================================


def apply_n1(scenario: Scenario) -> Scenario:
    """
    Desliga a unidade de maior despacho (empate: menor id).

    Raises:
        ScenarioError: cenário inviável ou com menos de duas unidades
    """
    if not scenario.feasible:
        raise ScenarioError(f"{scenario.label} has no schedule ({scenario.status})")
    if len(scenario.units) < 2:
        raise ScenarioError(f"{scenario.label}: N-1 needs at least 2 committed units")

    tripped = min(scenario.units, key=lambda u: (-scenario.dispatch[u.id], u.id))
    t_m_pre = aggregate_inertia(scenario.units, scenario.s_base)
    t_m_post = t_m_pre - 2.0 * tripped.inertia_h * tripped.rated_power / scenario.s_base
    online = [u.id != tripped.id for u in scenario.units]
    ku = participation_factors([u.agc_factor_ku for u in scenario.units], online)
    imbalance = scenario.dispatch[tripped.id]
    return scenario.model_copy(
        update={
            "tripped_unit": tripped.id,
            "t_m_pre": t_m_pre,
            "t_m_post": t_m_post,
            "imbalance_mw": imbalance,
            "imbalance_pct": 100.0 * imbalance / scenario.demand,
            "ku_post": {u.id: float(k) for u, k in zip(scenario.units, ku) if u.id != tripped.id},
        }
    )


# =============================================================================
# CONSTRUÇÃO DA GRADE
# =============================================================================


def solve_cell(index: Tuple[int, int], demand: float, wind: float, dataset: FleetData) -> Scenario:
    """Resolve o UC de perfil plano de uma célula e aplica o N-1"""
    levels = dataset.scenarios
    hour = levels.representative_hour
    base = Scenario(index=index, demand=demand, wind=wind, hour=hour, s_base=dataset.system.s_base)
    units = list(dataset.units)
    try:
        template = flat_instance(
            units, demand, wind, levels.horizon, levels.wind_loss_fraction,
            wind_capacity=dataset.wind.installed_capacity,
        )
        _, best = hour_optimal_set(template, hour)
        # estado inicial coerente com o conjunto ótimo da hora
        initial = {
            u.id: InitialUnitState(on=u.id in best, hours_in_state=DEFAULT_OFFLINE_HOURS)
            for u in units
        }
        instance = template.model_copy(update={"initial_state": initial})
        solution = solve_bnb(instance)
        committed = [u for u in instance.units if u.id in solution.committed_at(hour)]
        scenario = base.model_copy(
            update={
                "units": tuple(committed),
                "dispatch": solution.hour_dispatch(hour),
                "solution": solution,
            }
        )
        if solution.status == "gap_not_met":
            logger.warning(f"{scenario.label}: UC gap {solution.gap:.2%} above target")
            scenario = scenario.model_copy(update={"message": "gap_not_met"})
        return apply_n1(scenario)
    except InfeasibleError as e:
        logger.error(f"{base.label}: infeasible ({e})")
        return base.model_copy(update={"status": "infeasible", "message": str(e)})
    except FrequencyToolkitError as e:
        logger.error(f"{base.label}: {e}")
        return base.model_copy(update={"status": "error", "message": str(e)})


def _solve_cell_args(args) -> Scenario:
    return solve_cell(*args)


def build_grid(
    demand_levels: Sequence[float],
    wind_levels: Sequence[float],
    dataset: FleetData,
    jobs: Optional[int] = None,
) -> ScenarioGrid:
    """
    Monta a grade de cenários, resolvendo as células em paralelo.

    Raises:
        ScenarioError: nível de vento acima da capacidade do parque
    """
    jobs = jobs or settings.SWEEP_JOBS
    fleet = dataset.wind
    for w in wind_levels:
        if w > fleet.installed_capacity + 1e-9:
            raise ScenarioError(f"wind level {w} MW exceeds installed capacity {fleet.installed_capacity} MW")
        if w > fleet.available_power + 1e-9:
            raise ScenarioError(
                f"wind level {w} MW exceeds the {fleet.available_power:.1f} MW available at v_w"
            )
    tasks = [
        ((r, c), float(d), float(w), dataset)
        for r, d in enumerate(demand_levels)
        for c, w in enumerate(wind_levels)
    ]
    logger.info(f"Building {len(tasks)} scenario cells with {jobs} worker(s)")
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            cells = list(pool.map(_solve_cell_args, tasks))
    else:
        cells = [solve_cell(*t) for t in tasks]
    grid = ScenarioGrid(demand_levels=tuple(demand_levels), wind_levels=tuple(wind_levels), cells=cells)
    logger.info(f"Grid ready: {len(grid.feasible_cells)}/{len(cells)} feasible cells")
    return grid


# =============================================================================
# VARREDURA
# =============================================================================


def run_cell(
    scenario: Scenario, dataset: FleetData, config: SimConfig
) -> Tuple[CellResult, Dict[str, TimeSeries]]:
    """Simula uma célula com e sem controle do vento e no modo simplificado"""
    result = CellResult.from_scenario(scenario)
    series: Dict[str, TimeSeries] = {}
    if not scenario.feasible:
        return result, series
    try:
        for key, attr, control in (("without", "without", False), ("with", "with_", True)):
            ts = simulate(scenario, dataset, wind_control=control, config=config)
            series[key] = ts
            setattr(result, attr, evaluate(ts))
        ts = simulate_baseline(scenario.demand, dataset, config)
        series["baseline"] = ts
        result.baseline = evaluate(ts)
    except FrequencyToolkitError as e:
        logger.error(f"{scenario.label}: simulation failed ({e})")
        result.status = "error"
        result.message = str(e)
    return result, series


def _run_cell_args(args):
    return run_cell(*args)


def run_sweep(
    grid: ScenarioGrid, dataset: FleetData, config: SimConfig, jobs: Optional[int] = None
) -> List[Tuple[CellResult, Dict[str, TimeSeries]]]:
    """Todas as células × {sem, com controle} (+ modo simplificado), em ordem de índice"""
    jobs = jobs or settings.SWEEP_JOBS
    tasks = [(cell, dataset, config) for cell in grid.cells]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell_args, tasks))
    else:
        results = [run_cell(*t) for t in tasks]
    done = sum(1 for r, _ in results if r.status == "ok")
    logger.info(f"Sweep finished: {done}/{len(results)} cells simulated")
    return results
