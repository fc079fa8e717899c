# src/baselines/mcr_als.py
import numpy as np
from scipy.optimize import nnls

from src.baselines.nmf import EPS, FactorPair, check_inputs, normalize_rows, squared_error
from src.numerics.functions import as_matrix
from src.numerics.rng import Rng
from src.utils.logger import logger


def _augment(A: np.ndarray, ridge: float) -> np.ndarray:
    return np.vstack([A, np.sqrt(ridge) * np.eye(A.shape[1])])


def nnls_rows(A: np.ndarray, B: np.ndarray, ridge: float = 1e-8) -> np.ndarray:
    """Resolver min ||A x - b|| con x >= 0 para cada columna b de B"""
    if np.linalg.matrix_rank(A) < A.shape[1]:
        logger.warning(f"Sistema con rango deficiente ({A.shape}); se usa ridge={ridge:g}")
        A = _augment(A, ridge)
        B = np.vstack([B, np.zeros((A.shape[0] - B.shape[0], B.shape[1]))])
    out = np.zeros((A.shape[1], B.shape[1]))
    for j in range(B.shape[1]):
        if np.any(B[:, j]):
            out[:, j], _ = nnls(A, B[:, j])
    return out


def solve_concentrations(X: np.ndarray, S: np.ndarray, ridge: float = 1e-8) -> np.ndarray:
    """C >= 0 que minimiza ||X - C S|| con S fijo"""
    X = as_matrix(X, "X")
    return nnls_rows(S.T, X.T, ridge).T


def solve_components(X: np.ndarray, C: np.ndarray, ridge: float = 1e-8) -> np.ndarray:
    """S >= 0 que minimiza ||X - C S|| con C fijo"""
    return nnls_rows(C, X, ridge)


def mcr_als_fit(X: np.ndarray, k: int, iters: int, rng: Rng, tol: float = 0.0,
                ridge: float = 1e-8) -> FactorPair:
    """MCR-ALS: mínimos cuadrados no negativos alternados"""
    X = check_inputs(X, k)
    # Inicialización con filas de X (o aleatoria si son nulas)
    picks = rng.choice(X.shape[0], k)
    S = X[picks].copy()
    zero_rows = ~np.any(S > 0, axis=1)
    S[zero_rows] = rng.uniform(0.0, 1.0, (int(zero_rows.sum()), X.shape[1]))
    S /= np.linalg.norm(S, axis=1, keepdims=True)
    C = np.zeros((X.shape[0], k))

    if not np.any(X):
        return FactorPair(C, np.zeros_like(S), 0, 0.0, [0.0], method="mcr-als")

    trace = []
    for it in range(1, iters + 1):
        C = nnls_rows(S.T, X.T, ridge).T
        S = nnls_rows(C, X, ridge)
        C, S = normalize_rows(C, S)
        trace.append(squared_error(X, C, S))
        if tol and len(trace) > 1 and abs(trace[-2] - trace[-1]) <= tol * max(trace[-2], EPS):
            break
    logger.debug(f"MCR-ALS K={k}: {len(trace)} iteraciones, error={trace[-1]:.6g}")
    return FactorPair(C, S, len(trace), trace[-1], trace, method="mcr-als")
