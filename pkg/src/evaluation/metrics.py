# src/evaluation/metrics.py
from dataclasses import dataclass, asdict, field
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.numerics.functions import check_same_shape
from src.utils.errors import MetricUndefinedError

R2_BANDS = ((0.99, ">=0.99"), (0.95, "0.95-0.99"), (0.90, "0.90-0.95"))


@dataclass
class EvalReport:
    """Reporte de evaluación; None = no disponible"""
    r2: Optional[float]
    ec: int
    ec_true: Optional[int] = None
    zero_leakage: Optional[float] = None
    snr_realized_db: Optional[float] = None
    extra: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def r_squared(X_true: np.ndarray, X_pred: np.ndarray) -> float:
    """R² agrupado sobre todas las entradas (ceros incluidos)"""
    X_true = np.asarray(X_true, dtype=np.float64)
    X_pred = np.asarray(X_pred, dtype=np.float64)
    check_same_shape(X_true, X_pred, "R²")
    ss_tot = float(np.sum((X_true - X_true.mean()) ** 2)) if X_true.size else 0.0
    if ss_tot == 0.0:
        raise MetricUndefinedError("R² indefinido: X_true es constante", term="r2")
    ss_res = float(np.sum((X_true - X_pred) ** 2))
    return 1.0 - ss_res / ss_tot


def r_squared_or_none(X_true: np.ndarray, X_pred: np.ndarray) -> Optional[float]:
    try:
        return r_squared(X_true, X_pred)
    except MetricUndefinedError:
        return None


def realized_snr_db(signal: np.ndarray, noise: np.ndarray) -> Optional[float]:
    """10·log10(potencia de señal / potencia de ruido)"""
    noise_power = float(np.mean(np.square(noise))) if np.size(noise) else 0.0
    signal_power = float(np.mean(np.square(signal))) if np.size(signal) else 0.0
    if noise_power == 0.0 or signal_power == 0.0:
        return None
    return 10.0 * np.log10(signal_power / noise_power)


def r2_band(r2: Optional[float]) -> str:
    """Banda de R² de un checkpoint"""
    if r2 is None:
        return "n/a"
    for lower, label in R2_BANDS:
        if r2 >= lower:
            return label
    return "<0.90"


def ec_curve(checkpoints: Sequence[Any], ground_truth_n: Optional[int] = None) -> pd.DataFrame:
    """Serie (iteración, EC, R²) por checkpoint"""
    rows = [
        {
            "iteration": ckpt.iteration,
            "ec": ckpt.ec,
            "r2": ckpt.r2,
            "band": r2_band(ckpt.r2),
            "ec_true": ground_truth_n,
        }
        for ckpt in checkpoints
    ]
    return pd.DataFrame(rows, columns=["iteration", "ec", "r2", "band", "ec_true"])


def _mean_sd(values: Sequence[float]):
    values = np.asarray([v for v in values if v is not None], dtype=np.float64)
    if values.size == 0:
        return None, None
    sd = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
    return float(values.mean()), sd


def aggregate_replicates(curves: Iterable[pd.DataFrame]) -> pd.DataFrame:
    """Media y desviación estándar (insesgada) por iteración entre réplicas"""
    stacked = pd.concat([c.assign(replicate=i) for i, c in enumerate(curves)], ignore_index=True)
    rows = []
    for iteration, group in stacked.groupby("iteration", sort=True):
        ec_mean, ec_sd = _mean_sd(group["ec"].tolist())
        r2_mean, r2_sd = _mean_sd([v for v in group["r2"].tolist() if pd.notna(v)])
        rows.append({
            "iteration": iteration,
            "replicates": int(group["replicate"].nunique()),
            "ec_mean": ec_mean,
            "ec_sd": ec_sd,
            "r2_mean": r2_mean,
            "r2_sd": r2_sd,
            "band": r2_band(r2_mean),
        })
    return pd.DataFrame(rows)


def summarize(values: Sequence[float]) -> Dict[str, Optional[float]]:
    mean, sd = _mean_sd(values)
    return {"mean": mean, "sd": sd}
