"""
Serviço de relatórios
Grava soluções de UC, séries temporais com metadados, resultados da
varredura, resumo em texto alinhado e matrizes de dados para gráficos.
"""
import logging
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import yaml
from jinja2 import Environment, FileSystemLoader

from app.config import settings
from app.services.freqsim import TimeSeries
from app.services.metrics import SETTINGS, CellResult, SweepSummary
from app.services.ucsched import UCInstance, UCSolution, instance_to_dict

logger = logging.getLogger(__name__)

TEMPLATES_DIR = Path(__file__).resolve().parent.parent / "templates"
_env = Environment(loader=FileSystemLoader(str(TEMPLATES_DIR)), keep_trailing_newline=True)


def plain(obj):
    """Converte numpy/enum/tuplas para tipos serializáveis em YAML"""
    if isinstance(obj, dict):
        return {str(plain(k)): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [plain(v) for v in obj.tolist()]
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def write_yaml(data: Dict, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(plain(data), fh, sort_keys=False)


# =============================================================================
# UC
# =============================================================================


def write_uc_solution(
    solution: UCSolution, out_dir: Path, instance: Optional[UCInstance] = None
) -> Tuple[Path, Path]:
    """
    uc_solution.yaml (estruturado) + uc_dispatch.csv (unidade × hora).
    Com a instância, grava também uc_instance.yaml com os dados efetivos
    (perda provável de vento e estados iniciais já resolvidos).
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    yaml_path = out_dir / "uc_solution.yaml"
    csv_path = out_dir / "uc_dispatch.csv"
    write_yaml(solution.to_dict(), yaml_path)
    if instance is not None:
        write_yaml(instance_to_dict(instance), out_dir / "uc_instance.yaml")
    solution.dispatch_frame().to_csv(csv_path, float_format="%.6f")
    logger.info(f"UC solution written to {yaml_path}")
    return yaml_path, csv_path


def format_uc_report(solution: UCSolution) -> str:
    c = solution.cost
    lines = [
        f"status={solution.status} gap={solution.gap:.6f} nodes={solution.nodes}",
        f"cost_total={c.total:.2f} startup={c.startup:.2f} fuel={c.fuel:.2f} "
        f"om={c.om:.2f} wear_tear={c.wear_tear:.2f}",
        "reserve_margin=" + ",".join(f"{m:.3f}" for m in solution.reserve_margin),
    ]
    return "\n".join(lines)


# =============================================================================
# SÉRIES TEMPORAIS
# =============================================================================


def write_timeseries(ts: TimeSeries, path: Path) -> Path:
    """CSV da série e sidecar <nome>_meta.yaml com todos os parâmetros efetivos"""
    path = Path(path)
    ts.to_csv(path)
    meta_path = path.with_name(path.stem + "_meta.yaml")
    write_yaml({**ts.metadata, "trip_time": ts.trip_time}, meta_path)
    return meta_path


# =============================================================================
# VARREDURA
# =============================================================================


def _matrix_file(path: Path, demand_levels, wind_levels, values: np.ndarray, title: str) -> None:
    """Matriz demanda × vento no layout 'nonuniform matrix' do gnuplot"""
    lines = [f"# {title}", "# rows: demand (MW), columns: wind (MW)"]
    lines.append(" ".join([str(len(wind_levels))] + [f"{w:g}" for w in wind_levels]))
    for d, row in zip(demand_levels, values):
        lines.append(" ".join([f"{d:g}"] + ["nan" if np.isnan(v) else f"{v:.10g}" for v in row]))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def plot_matrices(results: Sequence[CellResult], demand_levels, wind_levels) -> Dict[str, np.ndarray]:
    grids = {}
    for setting in ("without", "with"):
        for metric in ("nadir", "rocof", "shed_total"):
            grid = np.full((len(demand_levels), len(wind_levels)), np.nan)
            for r in results:
                m = r.metrics(setting)
                if m is not None:
                    grid[r.index[0], r.index[1]] = getattr(m, metric)
            grids[f"{metric}_{setting}"] = grid
    return grids


def render_summary(summary: SweepSummary, results: Sequence[CellResult], demand_levels, wind_levels) -> str:
    template = _env.get_template("summary.txt.j2")
    return template.render(
        title=f"{settings.PROJECT_NAME}: frequency response over the demand x wind grid",
        summary=summary,
        labels=SETTINGS,
        demand_levels=[f"{d:g}" for d in demand_levels],
        wind_levels=[f"{w:g}" for w in wind_levels],
        failures=[r for r in results if r.status != "ok"],
    )


def run_file_name(index: Tuple[int, int], setting: str) -> str:
    return f"cell_{index[0]}_{index[1]}_{setting}.csv"


def write_sweep(
    results: Sequence[Tuple[CellResult, Dict[str, TimeSeries]]],
    summary: SweepSummary,
    demand_levels,
    wind_levels,
    out_dir: Path,
) -> List[Path]:
    """Coletor único: grava todos os artefatos da varredura em ordem de célula"""
    out_dir.mkdir(parents=True, exist_ok=True)
    runs_dir = out_dir / "runs"
    written = []
    for cell, series in results:
        for setting, ts in series.items():
            path = runs_dir / run_file_name(cell.index, setting)
            write_timeseries(ts, path)
            written.append(path)

    cells = [c for c, _ in results]
    frame = pd.DataFrame([c.to_row() for c in cells])
    frame.to_csv(out_dir / "sweep_results.csv", index=False)
    summary.frame().to_csv(out_dir / "summary.csv", index=False)
    write_yaml(summary.model_dump(exclude={"rows"}), out_dir / "summary_counts.yaml")
    (out_dir / "summary.txt").write_text(
        render_summary(summary, cells, demand_levels, wind_levels), encoding="utf-8"
    )
    for name, grid in plot_matrices(cells, demand_levels, wind_levels).items():
        _matrix_file(out_dir / f"plot_{name}.dat", demand_levels, wind_levels, grid, name)
    written.extend(
        [out_dir / "sweep_results.csv", out_dir / "summary.csv", out_dir / "summary.txt"]
    )
    logger.info(f"Sweep artifacts written to {out_dir}")
    return written
