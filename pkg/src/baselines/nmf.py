# src/baselines/nmf.py
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from src.numerics.functions import as_matrix
from src.numerics.rng import Rng
from src.utils.errors import ArgumentError
from src.utils.logger import logger

EPS = 1e-12


@dataclass
class FactorPair:
    """Factores no negativos X ≈ C_hat · S_hat"""
    C_hat: np.ndarray
    S_hat: np.ndarray
    n_iters: int
    final_loss: float
    loss_trace: List[float] = field(default_factory=list)
    method: str = "nmf"

    @property
    def rank(self) -> int:
        return self.S_hat.shape[0]

    def reconstruct(self) -> np.ndarray:
        return self.C_hat @ self.S_hat


def check_inputs(X: np.ndarray, k: int) -> np.ndarray:
    X = as_matrix(X, "X")
    if np.any(X < 0):
        raise ArgumentError("X debe ser no negativa")
    if k < 1 or k > min(X.shape):
        raise ArgumentError(f"K={k} fuera de rango para X de forma {X.shape}")
    return X


def normalize_rows(C: np.ndarray, S: np.ndarray):
    """Filas de S con norma unitaria; la escala pasa a C"""
    norms = np.linalg.norm(S, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    return C * safe, S / safe[:, None]


def initial_factors(X: np.ndarray, k: int, rng: Rng):
    scale = np.sqrt(X.mean() / k) if X.size and X.mean() > 0 else 1.0
    C = rng.uniform(0.0, 1.0, (X.shape[0], k)) * scale
    S = rng.uniform(0.0, 1.0, (k, X.shape[1])) * scale
    return C, S


def squared_error(X: np.ndarray, C: np.ndarray, S: np.ndarray) -> float:
    return float(np.sum((X - C @ S) ** 2))


def nmf_fit(X: np.ndarray, k: int, iters: int, rng: Rng, tol: float = 0.0) -> FactorPair:
    """NMF por actualizaciones multiplicativas (error cuadrático)"""
    X = check_inputs(X, k)
    C, S = initial_factors(X, k, rng)
    trace = [squared_error(X, C, S)]
    for it in range(1, iters + 1):
        C *= (X @ S.T) / (C @ (S @ S.T) + EPS)
        S *= (C.T @ X) / ((C.T @ C) @ S + EPS)
        trace.append(squared_error(X, C, S))
        if tol and abs(trace[-2] - trace[-1]) <= tol * max(trace[-2], EPS):
            break
    C, S = normalize_rows(C, S)
    logger.debug(f"NMF K={k}: {len(trace) - 1} iteraciones, error={trace[-1]:.6g}")
    return FactorPair(C, S, len(trace) - 1, trace[-1], trace, method="nmf")


def sparse_nmf_fit(X: np.ndarray, k: int, iters: int, rng: Rng, alpha: float = 0.1,
                   tol: float = 0.0) -> FactorPair:
    """NMF con penalización L1 sobre C y filas de S normalizadas en cada iteración"""
    X = check_inputs(X, k)
    if alpha < 0:
        raise ArgumentError(f"alpha debe ser >= 0: {alpha}")
    C, S = initial_factors(X, k, rng)
    C, S = normalize_rows(C, S)

    def objective() -> float:
        return squared_error(X, C, S) + alpha * float(C.sum())

    trace = [objective()]
    for it in range(1, iters + 1):
        C *= (X @ S.T) / (C @ (S @ S.T) + alpha / 2.0 + EPS)
        S *= (C.T @ X) / ((C.T @ C) @ S + EPS)
        C, S = normalize_rows(C, S)
        trace.append(objective())
        if tol and abs(trace[-2] - trace[-1]) <= tol * max(trace[-2], EPS):
            break
    return FactorPair(C, S, len(trace) - 1, squared_error(X, C, S), trace, method="sparse-nmf")
