# src/numerics/functions.py
import numpy as np
from scipy.special import expit

from src.utils.errors import ArgumentError, NumericError


def as_matrix(values, name: str = "matrix") -> np.ndarray:
    """Convertir a matriz float64 2D (ensancha enteros) y verificar finitud"""
    matrix = np.asarray(values, dtype=np.float64)
    if matrix.ndim != 2:
        raise ArgumentError(f"{name} debe ser 2D, recibido ndim={matrix.ndim}")
    return ensure_finite(name, matrix)


def ensure_finite(name: str, values):
    if not np.all(np.isfinite(values)):
        raise NumericError("valores no finitos", term=name)
    return values


def check_same_shape(a: np.ndarray, b: np.ndarray, what: str = "matrices"):
    if np.shape(a) != np.shape(b):
        raise ArgumentError(f"Formas incompatibles de {what}: {np.shape(a)} vs {np.shape(b)}")


def sigmoid(x):
    return expit(x)


def softplus(x):
    return np.logaddexp(0.0, x)


def binary_entropy_from_logits(a):
    """H(σ(a)) en nats, estable: softplus(a) - a·σ(a)"""
    return softplus(a) - a * sigmoid(a)


def binary_entropy_grad(a):
    """dH(σ(a))/da = -a·σ(a)·(1-σ(a))"""
    p = sigmoid(a)
    return -a * p * (1.0 - p)
