# src/solver/static_gate.py
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.numerics.functions import check_same_shape, sigmoid
from src.numerics.rng import Rng
from src.utils.errors import ArgumentError


@dataclass
class StaticGateParams:
    """Energías aprendibles de usar / no usar cada índice de cada componente"""
    e_on: np.ndarray
    e_off: np.ndarray
    temperature: float = 1.0

    def __post_init__(self):
        check_same_shape(self.e_on, self.e_off, "e_on y e_off")

    @classmethod
    def zeros(cls, k: int, d: int, temperature: float = 1.0) -> "StaticGateParams":
        # e_on = e_off: soft = 0.5 al inicio
        return cls(np.zeros((k, d)), np.zeros((k, d)), temperature)

    @property
    def shape(self):
        return self.e_on.shape

    @property
    def logits(self) -> np.ndarray:
        return self.e_off - self.e_on

    def probabilities(self) -> np.ndarray:
        """P(hard = 1) bajo ruido de Gumbel, independiente de la temperatura"""
        return sigmoid(self.logits)

    def hard(self) -> np.ndarray:
        # empate -> 0 (se prefiere la dispersión)
        return (self.e_on < self.e_off).astype(np.float64)

    def select_rows(self, keep) -> "StaticGateParams":
        return StaticGateParams(self.e_on[keep].copy(), self.e_off[keep].copy(), self.temperature)

    def copy(self) -> "StaticGateParams":
        return StaticGateParams(self.e_on.copy(), self.e_off.copy(), self.temperature)


@dataclass
class GateMask:
    soft: np.ndarray
    hard: np.ndarray


def soft_mask(params: StaticGateParams, rng: Optional[Rng], train_mode: bool,
              noise: Optional[np.ndarray] = None) -> GateMask:
    """Máscara Gumbel-sigmoide; sin ruido fuera de entrenamiento"""
    tau = params.temperature
    if tau <= 0:
        raise ArgumentError(f"La temperatura debe ser > 0: {tau}")
    logits = params.logits
    if train_mode:
        if noise is None:
            noise = rng.gumbel_difference(logits.shape)  # g_on - g_off
        logits = logits + noise
    soft = sigmoid(logits / tau)
    return GateMask(soft=soft, hard=(logits > 0).astype(np.float64))


def apply_mask(S: np.ndarray, mask: GateMask, hardened: bool) -> np.ndarray:
    """S ⊙ soft (entrenamiento) o S ⊙ hard (inferencia, ceros exactos)"""
    gate = mask.hard if hardened else mask.soft
    check_same_shape(S, gate, "componentes y máscara")
    if hardened:
        return np.where(gate > 0, S, 0.0)
    return S * gate


def gate_energy(params: StaticGateParams) -> float:
    """‖[e_on, e_off]‖²"""
    return float(np.sum(params.e_on ** 2) + np.sum(params.e_off ** 2))


def static_cardinality(params: StaticGateParams) -> float:
    """Fracción esperada de índices abiertos, sumada sobre componentes

    Un componente con todos sus índices abiertos cuenta como una selección completa.
    """
    k, d = params.shape
    if k == 0 or d == 0:
        return 0.0
    return float(np.sum(params.probabilities()) / d)
