# src/evaluation/bench.py
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from src.baselines.matching import zero_leakage_or_none
from src.baselines.mcr_als import mcr_als_fit
from src.baselines.nmf import nmf_fit, sparse_nmf_fit
from src.evaluation.metrics import aggregate_replicates, ec_curve, r_squared_or_none, summarize
from src.numerics.rng import Rng
from src.solver.model import prune
from src.solver.trainer import TrainResult, train
from src.synth.generator import GroundTruth, generate_dataset
from src.utils.config import Settings, SolverSettings
from src.utils.errors import ArgumentError, TrainingDivergedError
from src.utils.logger import logger

METHODS = ("sparse-eb-gmcr", "eb-gmcr", "nmf", "sparse-nmf", "mcr-als")


@dataclass
class MethodFit:
    method: str
    ec: int
    X_hat: np.ndarray
    S_hat: np.ndarray
    curve: Optional[pd.DataFrame] = None


def fit_method(method: str, X: np.ndarray, n_true: int, cfg: Settings, rng: Rng) -> MethodFit:
    """Ajustar un método; los baselines usan el rango verdadero"""
    base = cfg.baseline
    if method in ("sparse-eb-gmcr", "eb-gmcr"):
        hp = cfg.solver.model_copy(update={"static_gate": method == "sparse-eb-gmcr"})
        result = _train_or_last_good(X, hp, rng, label=f"bench:{method}")
        best = result.best
        pruned, _ = prune(best.state, X, cfg.solver.usage_threshold)
        X_hat = best.state.forward(X, train_mode=False).X_g
        return MethodFit(method, best.ec, X_hat, pruned.dictionary.hardened(), ec_curve(result.checkpoints, n_true))
    if method == "nmf":
        pair = nmf_fit(X, n_true, base.nmf_iters, rng, tol=base.tol)
    elif method == "sparse-nmf":
        pair = sparse_nmf_fit(X, n_true, base.nmf_iters, rng, alpha=base.sparse_nmf_alpha, tol=base.tol)
    elif method == "mcr-als":
        pair = mcr_als_fit(X, n_true, base.mcr_als_iters, rng, tol=base.tol, ridge=base.ridge)
    else:
        raise ArgumentError(f"Método desconocido: {method}")
    return MethodFit(method, pair.rank, pair.reconstruct(), pair.S_hat)


def _train_or_last_good(X: np.ndarray, hp: SolverSettings, rng: Rng, label: str) -> TrainResult:
    """En la rejilla, una divergencia no detiene el resto: se usa el último checkpoint válido"""
    try:
        return train(X, hp, rng=rng, label=label)
    except TrainingDivergedError as e:
        logger.warning(f"[{label}] {e}; se usa el último checkpoint válido")
        return e.result


def score(fit: MethodFit, truth: GroundTruth) -> Dict[str, object]:
    return {
        "method": fit.method,
        "ec": fit.ec,
        "r2": r_squared_or_none(truth.X_noisy, fit.X_hat),
        "r2_clean": r_squared_or_none(truth.X_clean, fit.X_hat),
        "zero_leakage": zero_leakage_or_none(fit.S_hat, truth.S_true),
    }


def _job(cell: Tuple[int, int, float], replicate: int, methods: List[str], cfg: Settings, root: Rng):
    n_true, multiple, snr_db = cell
    synth = cfg.synth.model_copy(update={"n_true": n_true, "dataset_multiple": multiple, "snr_db": snr_db})
    key = f"{n_true}/{multiple}/{snr_db:g}/{replicate}"
    truth = generate_dataset(synth, root.derive(f"data/{key}"))
    rows, curves = [], []
    for method in methods:
        fit = fit_method(method, truth.X_noisy, n_true, cfg, root.derive(f"{method}/{key}"))
        rows.append({"n_true": n_true, "multiple": multiple, "snr_db": snr_db, "replicate": replicate,
                     **score(fit, truth)})
        if fit.curve is not None:
            curves.append(fit.curve.assign(method=method, n_true=n_true, multiple=multiple, snr_db=snr_db,
                                           replicate=replicate))
    logger.info(f"Bench {key}: " + ", ".join(f"{r['method']} EC={r['ec']} R²={r['r2']}" for r in rows))
    return rows, curves


def run_bench(cfg: Settings, methods: Optional[List[str]] = None, workers: int = 1) -> Dict[str, pd.DataFrame]:
    """Rejilla métodos x réplicas x (N, tamaño, SNR); retorna tablas listas para graficar"""
    methods = list(methods or cfg.bench.methods)
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise ArgumentError(f"Métodos desconocidos: {sorted(unknown)}")
    root = Rng(cfg.seed).derive("bench")
    cells = list(product(cfg.bench.n_true, cfg.bench.multiples, cfg.bench.snr_db))
    jobs = [(cell, r) for cell in cells for r in range(cfg.bench.replicates)]

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        outputs = list(pool.map(lambda job: _job(job[0], job[1], methods, cfg, root), jobs))

    runs = pd.DataFrame([row for rows, _ in outputs for row in rows])
    summary_rows = []
    for (n_true, multiple, snr_db, method), group in runs.groupby(["n_true", "multiple", "snr_db", "method"],
                                                                   sort=True):
        ec = summarize(group["ec"].tolist())
        r2 = summarize([v for v in group["r2"].tolist() if pd.notna(v)])
        leak = summarize([v for v in group["zero_leakage"].tolist() if pd.notna(v)])
        summary_rows.append({
            "n_true": n_true, "multiple": multiple, "snr_db": snr_db, "method": method,
            "replicates": len(group),
            "ec_mean": ec["mean"], "ec_sd": ec["sd"],
            "r2_mean": r2["mean"], "r2_sd": r2["sd"],
            "zero_leakage_mean": leak["mean"], "zero_leakage_sd": leak["sd"],
        })

    curve_tables = []
    all_curves = [c for _, curves in outputs for c in curves]
    for (n_true, multiple, snr_db), method in product(cells, methods):
        selected = [c for c in all_curves
                    if c["method"].iloc[0] == method and c["n_true"].iloc[0] == n_true
                    and c["multiple"].iloc[0] == multiple and c["snr_db"].iloc[0] == snr_db]
        if selected:
            curve_tables.append(aggregate_replicates(selected).assign(method=method, n_true=n_true,
                                                                       multiple=multiple, snr_db=snr_db))
    return {
        "runs": runs,
        "summary": pd.DataFrame(summary_rows),
        "ec_curves": pd.concat(curve_tables, ignore_index=True) if curve_tables else pd.DataFrame(),
    }
