# src/solver/dynamic_gate.py
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.numerics.functions import sigmoid
from src.numerics.rng import Rng
from src.solver.networks import MLP
from src.utils.errors import ArgumentError


@dataclass
class EnergyPredictor:
    """Predice energías de selección por muestra y componente"""
    network: MLP
    temperature: float = 1.0

    @property
    def budget(self) -> int:
        return self.network.out_dim

    def copy(self) -> "EnergyPredictor":
        return EnergyPredictor(self.network.copy(), self.temperature)


@dataclass
class SelectionGate:
    energies: np.ndarray
    probs: np.ndarray
    delta_soft: np.ndarray
    delta_hard: np.ndarray


def predict_energies(f_e: EnergyPredictor, X_o: np.ndarray) -> np.ndarray:
    """Matriz B x K de energías"""
    return f_e.network.forward(X_o).out


def sample_gates(energies: np.ndarray, rng: Optional[Rng], temperature: float, train_mode: bool,
                 noise: Optional[np.ndarray] = None) -> SelectionGate:
    """Compuertas δ relajadas (Gumbel-sigmoide) y endurecidas"""
    if train_mode and temperature <= 0:
        raise ArgumentError(f"La temperatura debe ser > 0: {temperature}")
    tau = temperature if temperature > 0 else 1.0
    logits = -energies
    if train_mode:
        if noise is None:
            noise = rng.gumbel_difference(energies.shape)
        logits = logits + noise
    delta_soft = sigmoid(logits / tau)
    return SelectionGate(
        energies=energies,
        probs=sigmoid(-energies),
        delta_soft=delta_soft,
        delta_hard=(logits > 0).astype(np.float64),
    )


def selection_energy(energies: np.ndarray) -> float:
    """‖E‖² promediada sobre las filas del lote"""
    if energies.shape[0] == 0:
        return 0.0
    return float(np.sum(energies ** 2) / energies.shape[0])


def expected_cardinality(probs: np.ndarray) -> float:
    """Número esperado de componentes seleccionados por muestra"""
    if probs.shape[0] == 0:
        return 0.0
    return float(np.sum(probs) / probs.shape[0])
