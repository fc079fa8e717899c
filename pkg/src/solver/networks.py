# src/solver/networks.py
from dataclasses import dataclass, replace
from typing import Dict, Optional, Sequence

import numpy as np

from src.numerics.functions import ensure_finite
from src.numerics.rng import Rng, gaussian
from src.utils.errors import ArgumentError


@dataclass
class MLPCache:
    """Valores intermedios del forward, necesarios para el backward"""
    inputs: np.ndarray
    hidden: np.ndarray
    out: np.ndarray


@dataclass
class MLP:
    """Red d -> h -> K con una capa oculta tanh y salida afín"""
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    input_scale: float = 1.0

    @classmethod
    def initialize(cls, d: int, hidden: int, k: int, rng: Rng, input_scale: float = 1.0) -> "MLP":
        return cls(
            w1=gaussian(rng, 0.0, 1.0 / np.sqrt(d), (d, hidden)),
            b1=np.zeros(hidden),
            w2=gaussian(rng, 0.0, 1.0 / np.sqrt(hidden), (hidden, k)),
            b2=np.zeros(k),
            input_scale=input_scale,
        )

    @classmethod
    def zeros(cls, d: int, hidden: int, k: int) -> "MLP":
        return cls(np.zeros((d, hidden)), np.zeros(hidden), np.zeros((hidden, k)), np.zeros(k))

    @property
    def in_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def out_dim(self) -> int:
        return self.w2.shape[1]

    def forward(self, X: np.ndarray) -> MLPCache:
        if X.ndim != 2 or X.shape[1] != self.in_dim:
            raise ArgumentError(f"Entrada con {X.shape[-1]} columnas, se esperaban {self.in_dim}")
        inputs = X / self.input_scale
        hidden = np.tanh(inputs @ self.w1 + self.b1)
        return MLPCache(inputs, hidden, hidden @ self.w2 + self.b2)

    def backward(self, cache: MLPCache, grad_out: np.ndarray) -> Dict[str, np.ndarray]:
        grad_hidden = (grad_out @ self.w2.T) * (1.0 - cache.hidden ** 2)
        return {
            "w1": cache.inputs.T @ grad_hidden,
            "b1": grad_hidden.sum(axis=0),
            "w2": cache.hidden.T @ grad_out,
            "b2": grad_out.sum(axis=0),
        }

    def params(self) -> Dict[str, np.ndarray]:
        return {"w1": self.w1, "b1": self.b1, "w2": self.w2, "b2": self.b2}

    def with_params(self, values: Dict[str, np.ndarray]) -> "MLP":
        for name, value in values.items():
            ensure_finite(name, value)
        return replace(self, **values)

    def select_outputs(self, keep: Sequence[int]) -> "MLP":
        """Conservar solo las salidas indicadas"""
        keep = np.asarray(keep, dtype=int)
        return replace(self, w2=self.w2[:, keep].copy(), b2=self.b2[keep].copy())

    def copy(self) -> "MLP":
        return replace(self, w1=self.w1.copy(), b1=self.b1.copy(), w2=self.w2.copy(), b2=self.b2.copy())
