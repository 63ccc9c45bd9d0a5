"""
Métricas de segurança de frequência
Nadir, RoCoF na janela pós-desligamento, deslastre total, erro de regime
e as estatísticas comparativas da varredura (média e variância).
"""
import logging
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel

from app.core.tables import ROCOF_WINDOW

if TYPE_CHECKING:
    from app.services.freqsim import TimeSeries
    from app.services.scenario import Scenario

logger = logging.getLogger(__name__)

SETTINGS = {
    "without": "without wind control",
    "with": "with wind control",
    "baseline": "baseline (constant inertia, 10% step)",
}
SUMMARY_METRICS = ("nadir", "rocof", "inertia_change", "shed_total")


# =============================================================================
# MÉTRICAS POR EXECUÇÃO
# =============================================================================


def nadir(ts: "TimeSeries") -> float:
    """Menor frequência a partir do instante do desligamento (Hz)"""
    if len(ts) == 0:
        raise ValueError("empty time series")
    after = ts.f[ts.t >= ts.trip_time - 1e-12]
    if after.size == 0:
        raise ValueError("time series ends before the trip")
    return float(after.min())


def rocof(ts: "TimeSeries", window: Tuple[float, float] = ROCOF_WINDOW) -> float:
    """
    Taxa de variação da frequência entre trip+0.3 s e trip+0.5 s (Hz/s),
    negativa em subfrequência; interpolação linear entre amostras.
    """
    t0, t1 = ts.trip_time + window[0], ts.trip_time + window[1]
    if len(ts) == 0 or t0 < ts.t[0] - 1e-12 or t1 > ts.t[-1] + 1e-12:
        raise ValueError(f"RoCoF window [{t0:.3f}, {t1:.3f}] s outside the series")
    f0, f1 = np.interp([t0, t1], ts.t, ts.f)
    return float((f1 - f0) / (t1 - t0))


def shed_total(ts: "TimeSeries") -> float:
    """Deslastre acumulado ao final (MW)"""
    return float(ts.shed[-1]) if len(ts) else 0.0


def steady_state_error(ts: "TimeSeries", f0: float = 50.0) -> float:
    return float(ts.f[-1] - f0)


class FrequencyMetrics(BaseModel):
    nadir: float
    rocof: float
    rocof_magnitude: float
    shed_total: float
    steady_state_error: float
    inertia_change: float
    collapsed: bool = False
    wind_speed_limit: bool = False

    def line(self) -> str:
        """Linha legível por máquina para stdout"""
        return (
            f"nadir={self.nadir:.6f} rocof={self.rocof:.6f} rocof_abs={self.rocof_magnitude:.6f} "
            f"shed={self.shed_total:.3f} ss_error={self.steady_state_error:.6f} "
            f"inertia_change={self.inertia_change:.6f} collapse={int(self.collapsed)}"
        )


def evaluate(ts: "TimeSeries", f0: Optional[float] = None) -> FrequencyMetrics:
    f0 = f0 if f0 is not None else ts.metadata.get("f0", 50.0)
    try:
        slope = rocof(ts)
    except ValueError:
        # colapso antes do fim da janela
        slope = float("nan")
    return FrequencyMetrics(
        nadir=nadir(ts),
        rocof=slope,
        rocof_magnitude=abs(slope),
        shed_total=shed_total(ts),
        steady_state_error=steady_state_error(ts, f0),
        inertia_change=float(ts.t_m[0] - ts.t_m[-1]),
        collapsed=ts.collapsed,
        wind_speed_limit=ts.wind_speed_limit,
    )


# =============================================================================
# RESULTADOS DA VARREDURA
# =============================================================================


class CellResult(BaseModel):
    index: Tuple[int, int]
    demand: float
    wind: float
    status: str = "ok"
    message: Optional[str] = None
    committed: int = 0
    tripped_unit: Optional[str] = None
    imbalance_mw: float = 0.0
    imbalance_pct: float = 0.0
    t_m_pre: Optional[float] = None
    t_m_post: Optional[float] = None
    uc_cost: Optional[float] = None
    uc_gap: Optional[float] = None
    without: Optional[FrequencyMetrics] = None
    with_: Optional[FrequencyMetrics] = None
    baseline: Optional[FrequencyMetrics] = None

    @classmethod
    def from_scenario(cls, scenario: "Scenario") -> "CellResult":
        sol = scenario.solution
        return cls(
            index=scenario.index or (0, 0),
            demand=scenario.demand,
            wind=scenario.wind,
            status=scenario.status,
            message=scenario.message,
            committed=len(scenario.units),
            tripped_unit=scenario.tripped_unit,
            imbalance_mw=scenario.imbalance_mw,
            imbalance_pct=scenario.imbalance_pct,
            t_m_pre=scenario.t_m_pre,
            t_m_post=scenario.t_m_post,
            uc_cost=sol.total_cost if sol is not None else None,
            uc_gap=sol.gap if sol is not None else None,
        )

    def metrics(self, setting: str) -> Optional[FrequencyMetrics]:
        return {"without": self.without, "with": self.with_, "baseline": self.baseline}[setting]

    def to_row(self) -> Dict:
        row = {
            "row": self.index[0],
            "col": self.index[1],
            "demand": self.demand,
            "wind": self.wind,
            "status": self.status,
            "message": self.message or "",
            "committed": self.committed,
            "tripped_unit": self.tripped_unit or "",
            "imbalance_mw": self.imbalance_mw,
            "imbalance_pct": self.imbalance_pct,
            "t_m_pre": self.t_m_pre,
            "t_m_post": self.t_m_post,
            "uc_cost": self.uc_cost,
            "uc_gap": self.uc_gap,
        }
        for setting in SETTINGS:
            m = self.metrics(setting)
            for name in FrequencyMetrics.model_fields:
                row[f"{setting}_{name}"] = getattr(m, name) if m is not None else None
        return row


class SweepSummary(BaseModel):
    """Tabela μ/σ² por métrica e configuração, mais contagens da varredura"""

    rows: List[Dict]
    cells: int
    feasible_cells: int
    shed_cells_without: int
    shed_cells_with: int
    cells_improved: int
    cells_worsened: int
    mean_nadir_gain_mhz: float

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=["setting", "metric", "mean", "variance", "n"])


def summarize(results: Sequence[CellResult]) -> SweepSummary:
    """
    Média e variância populacional de nadir, RoCoF, variação de inércia e
    deslastre sobre as células simuladas, para cada configuração.
    """
    ok = [r for r in results if r.status == "ok" and r.without is not None and r.with_ is not None]
    if not ok:
        raise ValueError("no feasible cell to summarize")

    rows = []
    for setting in SETTINGS:
        values = [r.metrics(setting) for r in ok if r.metrics(setting) is not None]
        for metric in SUMMARY_METRICS:
            data = np.array([getattr(m, metric) for m in values], dtype=float)
            data = data[~np.isnan(data)]
            rows.append(
                {
                    "setting": setting,
                    "metric": metric,
                    "mean": float(data.mean()) if data.size else float("nan"),
                    "variance": float(data.var(ddof=0)) if data.size else float("nan"),
                    "n": int(data.size),
                }
            )

    tol = 1e-9
    improved = sum(1 for r in ok if r.with_.shed_total < r.without.shed_total - tol)
    worsened = sum(1 for r in ok if r.with_.shed_total > r.without.shed_total + tol)
    gain = np.mean([r.with_.nadir - r.without.nadir for r in ok]) * 1000.0
    if worsened:
        logger.warning(f"Wind control increased load shedding in {worsened} cell(s)")
    return SweepSummary(
        rows=rows,
        cells=len(results),
        feasible_cells=len(ok),
        shed_cells_without=sum(1 for r in ok if r.without.shed_total > tol),
        shed_cells_with=sum(1 for r in ok if r.with_.shed_total > tol),
        cells_improved=improved,
        cells_worsened=worsened,
        mean_nadir_gain_mhz=float(gain),
    )
