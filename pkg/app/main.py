"""
Ponto de entrada de linha de comando
Subcomandos: uc (resolve uma instância de unit commitment), simulate
(uma célula da grade ou o modo simplificado) e sweep (grade completa com
e sem controle de frequência do vento).
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Tuple

import yaml

from app.config import settings
from app.core.errors import EXIT_CODES, FleetConfigError, FrequencyToolkitError, InfeasibleError
from app.services.fleet import FleetData, WindControllerParams, load_dataset, load_fleet
from app.services.freqsim import SimConfig, simulate, simulate_baseline
from app.services.metrics import evaluate, summarize
from app.services.reporting import format_uc_report, write_sweep, write_timeseries, write_uc_solution
from app.services.scenario import build_grid, run_sweep, solve_cell
from app.services.ucsched import instance_from_dict, solve_bnb, validate_solution

logger = logging.getLogger(__name__)

DEFAULT_CELL = "5,3"


def _configure_logging() -> None:
    # Configuração de Logs (stderr; stdout fica para as linhas de métricas)
    logging.basicConfig(
        level=getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )


def _parse_cell(text: str) -> Tuple[int, int]:
    try:
        row, col = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"cell must be 'ROW,COL' (got '{text}')")
    return row, col


def _sim_config(args) -> SimConfig:
    overrides = {}
    if args.dt is not None:
        overrides["dt"] = args.dt
    if args.t_end is not None:
        overrides["t_end"] = args.t_end
    return SimConfig(**overrides)


def _controller(dataset: FleetData, name: Optional[str]) -> Optional[WindControllerParams]:
    if name is None:
        return None
    current = dataset.wind.controller.model_dump(exclude={"op_cap_delta_pop", "recovery_x"})
    return WindControllerParams.preset(name, **current)


# =============================================================================
# SUBCOMANDOS
# =============================================================================


def cmd_uc(args) -> int:
    """Resolve a instância de UC e grava a solução"""
    units, _, wind = load_fleet(args.config)
    instance_path = Path(args.instance)
    if not instance_path.is_file():
        raise FileNotFoundError(f"instance file not found: {instance_path}")
    with open(instance_path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    try:
        instance = instance_from_dict(raw, units, wind_capacity=wind.installed_capacity)
    except (KeyError, TypeError, ValueError) as e:
        raise FleetConfigError(f"invalid instance file {instance_path}: {e}") from e

    solution = solve_bnb(instance, gap_target=args.gap, node_budget=args.node_budget)
    problems = validate_solution(instance, solution)
    for p in problems:
        logger.error(f"Solution check failed: {p}")

    write_uc_solution(solution, Path(args.out), instance)
    print(format_uc_report(solution))
    if solution.status == "gap_not_met":
        return EXIT_CODES["gap_not_met"]
    return EXIT_CODES["ok"] if not problems else EXIT_CODES["usage"]


def cmd_simulate(args) -> int:
    """Simula uma célula (ou o modo simplificado) e imprime as métricas"""
    dataset = load_dataset(args.config)
    config = _sim_config(args)
    levels = dataset.scenarios
    row, col = args.cell
    if not (0 <= row < len(levels.demand_levels) and 0 <= col < len(levels.wind_levels)):
        raise FleetConfigError(
            f"cell ({row},{col}) outside the {len(levels.demand_levels)}x{len(levels.wind_levels)} grid"
        )
    demand, wind = levels.demand_levels[row], levels.wind_levels[col]
    out_dir = Path(args.out)

    if args.baseline:
        ts = simulate_baseline(demand, dataset, config)
        tag = "baseline"
    else:
        scenario = solve_cell((row, col), demand, wind, dataset)
        if scenario.status == "infeasible":
            raise InfeasibleError(f"{scenario.label}: {scenario.message}")
        if not scenario.feasible:
            raise FrequencyToolkitError(f"{scenario.label}: {scenario.message}")
        control = args.wind_control == "on"
        ts = simulate(scenario, dataset, control, config, _controller(dataset, args.controller))
        tag = f"wind_{args.wind_control}"

    path = out_dir / f"timeseries_cell_{row}_{col}_{tag}.csv"
    write_timeseries(ts, path)
    metrics = evaluate(ts)
    print(f"cell={row},{col} mode={tag} {metrics.line()}")
    return EXIT_CODES["collapse"] if ts.collapsed else EXIT_CODES["ok"]


def cmd_sweep(args) -> int:
    """Grade completa: 30 células × {sem, com controle}, mais o modo simplificado"""
    dataset = load_dataset(args.config)
    config = _sim_config(args)
    jobs = args.jobs or settings.SWEEP_JOBS
    levels = dataset.scenarios
    grid = build_grid(levels.demand_levels, levels.wind_levels, dataset, jobs=jobs)
    results = run_sweep(grid, dataset, config, jobs=jobs)
    cells = [r for r, _ in results]
    try:
        summary = summarize(cells)
    except ValueError as e:
        raise InfeasibleError(f"sweep produced no simulated cell: {e}") from e
    write_sweep(results, summary, levels.demand_levels, levels.wind_levels, Path(args.out))
    print(
        f"cells={summary.cells} simulated={summary.feasible_cells} "
        f"improved={summary.cells_improved} worsened={summary.cells_worsened} "
        f"nadir_gain_mhz={summary.mean_nadir_gain_mhz:.3f}"
    )
    return EXIT_CODES["ok"]


# =============================================================================
# PARSER
# =============================================================================


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridfreq",
        description="Frequency security of an isolated power system under N-1 contingencies",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=settings.FLEET_CONFIG, help="fleet YAML")
        p.add_argument("--out", default=settings.OUTPUT_DIR, help="output directory")

    def sim_flags(p):
        p.add_argument("--dt", type=float, default=None, help="integration step (s)")
        p.add_argument("--t-end", dest="t_end", type=float, default=None, help="simulated time (s)")

    p_uc = sub.add_parser("uc", help="solve a unit commitment instance")
    common(p_uc)
    p_uc.add_argument("--instance", required=True, help="instance YAML (demand, wind, initial state)")
    p_uc.add_argument("--gap", type=float, default=None, help="relative gap target (0 = prove optimality)")
    p_uc.add_argument("--node-budget", dest="node_budget", type=int, default=None, help="branch-and-bound node limit")
    p_uc.set_defaults(func=cmd_uc)

    p_sim = sub.add_parser("simulate", help="simulate one grid cell")
    common(p_sim)
    sim_flags(p_sim)
    p_sim.add_argument("--cell", type=_parse_cell, default=_parse_cell(DEFAULT_CELL), help="ROW,COL")
    p_sim.add_argument("--wind-control", choices=("on", "off"), default="off")
    p_sim.add_argument("--baseline", action="store_true", help="constant-inertia 10%% step model")
    p_sim.add_argument("--controller", choices=("original", "modified"), default=None)
    p_sim.set_defaults(func=cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="run the demand x wind grid")
    common(p_sweep)
    sim_flags(p_sweep)
    p_sweep.add_argument("--jobs", type=int, default=None, help="parallel workers")
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_CODES["usage"]
    except InfeasibleError as e:
        where = f" (hour {e.hour})" if e.hour is not None else ""
        print(f"infeasible{where}: {e}", file=sys.stderr)
        return e.exit_code
    except FrequencyToolkitError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_CODES["usage"]


if __name__ == "__main__":
    sys.exit(main())
