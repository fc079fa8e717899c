# src/baselines/matching.py
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from src.utils.errors import ArgumentError, MetricUndefinedError


def cosine_matrix(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    na = np.linalg.norm(A, axis=1, keepdims=True)
    nb = np.linalg.norm(B, axis=1, keepdims=True)
    return (A / np.where(na > 0, na, 1.0)) @ (B / np.where(nb > 0, nb, 1.0)).T


def match_components(S_hat: np.ndarray, S_true: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Asignación húngara que maximiza la similitud coseno; retorna (filas de S_hat, filas de S_true)"""
    if S_hat.ndim != 2 or S_true.ndim != 2 or S_hat.shape[1] != S_true.shape[1]:
        raise ArgumentError(f"Formas incompatibles: {S_hat.shape} vs {S_true.shape}")
    if S_hat.shape[0] == 0 or S_true.shape[0] == 0:
        return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
    rows, cols = linear_sum_assignment(-cosine_matrix(S_hat, S_true))
    return rows, cols


def zero_leakage(S_hat: np.ndarray, S_true: np.ndarray) -> float:
    """|S_hat| medio en los índices donde el componente verdadero emparejado es exactamente 0"""
    S_hat = np.asarray(S_hat, dtype=np.float64)
    S_true = np.asarray(S_true, dtype=np.float64)
    rows, cols = match_components(S_hat, S_true)
    if rows.size == 0:
        raise MetricUndefinedError("Fuga indefinida: no hay componentes emparejados", term="zero_leakage")
    zeros = S_true[cols] == 0
    if not zeros.any():
        raise MetricUndefinedError("Fuga indefinida: los componentes emparejados no tienen ceros", term="zero_leakage")
    return float(np.abs(S_hat[rows])[zeros].mean())


def zero_leakage_or_none(S_hat: np.ndarray, S_true: np.ndarray) -> Optional[float]:
    try:
        return zero_leakage(S_hat, S_true)
    except MetricUndefinedError:
        return None
