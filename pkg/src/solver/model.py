# src/solver/model.py
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from src.numerics.functions import as_matrix, ensure_finite, softplus
from src.numerics.rng import Rng, gaussian
from src.solver.dynamic_gate import EnergyPredictor, SelectionGate, sample_gates
from src.solver.networks import MLP
from src.solver.static_gate import GateMask, StaticGateParams, apply_mask, soft_mask
from src.utils.errors import ArgumentError
from src.utils.logger import logger


@dataclass
class ComponentDictionary:
    """Diccionario no negativo S (K x d) con compuertas estáticas

    gated=False desactiva la compuerta estática (EB-gMCR denso): máscara toda en unos.
    """
    S: np.ndarray
    static_gate: StaticGateParams
    gated: bool = True

    def __post_init__(self):
        if self.S.shape != self.static_gate.shape:
            raise ArgumentError(f"S {self.S.shape} y compuertas {self.static_gate.shape} no coinciden")

    @property
    def budget(self) -> int:
        return self.S.shape[0]

    @property
    def dimension(self) -> int:
        return self.S.shape[1]

    def hardened(self) -> np.ndarray:
        """S' = S ⊙ hard, con ceros exactos"""
        if not self.gated:
            return self.S.copy()
        return np.where(self.static_gate.hard() > 0, self.S, 0.0)

    def mask(self, rng: Optional[Rng], train_mode: bool) -> GateMask:
        if not self.gated:
            ones = np.ones_like(self.S)
            return GateMask(soft=ones, hard=ones)
        return soft_mask(self.static_gate, rng, train_mode)

    def empty_components(self) -> np.ndarray:
        """Índices de componentes sin entradas no nulas tras endurecer"""
        return np.flatnonzero(~np.any(self.hardened() != 0, axis=1))

    def project(self):
        """Proyección a S >= 0 tras cada paso de gradiente"""
        np.maximum(self.S, 0.0, out=self.S)

    def select(self, keep) -> "ComponentDictionary":
        return ComponentDictionary(self.S[keep].copy(), self.static_gate.select_rows(keep), self.gated)

    def copy(self) -> "ComponentDictionary":
        return ComponentDictionary(self.S.copy(), self.static_gate.copy(), self.gated)


@dataclass
class ConcentrationPredictor:
    """Predice concentraciones no negativas: output_scale · softplus(red(X))"""
    network: MLP
    output_scale: float = 1.0

    def copy(self) -> "ConcentrationPredictor":
        return ConcentrationPredictor(self.network.copy(), self.output_scale)


@dataclass
class GeneratedBatch:
    X_g: np.ndarray
    gates: SelectionGate
    concentrations: np.ndarray
    mask: GateMask


@dataclass
class SolverState:
    """Todos los parámetros de un solver"""
    dictionary: ComponentDictionary
    energy: EnergyPredictor
    concentration: ConcentrationPredictor

    @classmethod
    def initialize(cls, d: int, budget: int, hidden: int, rng: Rng, data_scale: float = 1.0,
                   gated: bool = True) -> "SolverState":
        # S ~ |N(0, 1/√d)|
        S = np.abs(gaussian(rng.derive("components"), 0.0, 1.0 / np.sqrt(d), (budget, d)))
        return cls(
            dictionary=ComponentDictionary(S, StaticGateParams.zeros(budget, d), gated),
            energy=EnergyPredictor(MLP.initialize(d, hidden, budget, rng.derive("energy"), data_scale)),
            concentration=ConcentrationPredictor(
                MLP.initialize(d, hidden, budget, rng.derive("concentration"), data_scale),
                output_scale=data_scale,
            ),
        )

    @property
    def budget(self) -> int:
        return self.dictionary.budget

    @property
    def dimension(self) -> int:
        return self.dictionary.dimension

    def set_temperature(self, tau: float):
        self.energy.temperature = tau
        self.dictionary.static_gate.temperature = tau

    def params(self) -> Dict[str, np.ndarray]:
        """Vista plana de los parámetros entrenables"""
        values = {
            "S": self.dictionary.S,
            "e_on": self.dictionary.static_gate.e_on,
            "e_off": self.dictionary.static_gate.e_off,
        }
        for prefix, net in (("energy", self.energy.network), ("concentration", self.concentration.network)):
            for name, value in net.params().items():
                values[f"{prefix}.{name}"] = value
        return values

    def set_params(self, values: Dict[str, np.ndarray]):
        for name, value in values.items():
            ensure_finite(name, value)
        gate = self.dictionary.static_gate
        self.dictionary.S = values.get("S", self.dictionary.S)
        gate.e_on = values.get("e_on", gate.e_on)
        gate.e_off = values.get("e_off", gate.e_off)
        for prefix, holder in (("energy", self.energy), ("concentration", self.concentration)):
            updates = {n.split(".", 1)[1]: v for n, v in values.items() if n.startswith(prefix + ".")}
            if updates:
                holder.network = holder.network.with_params(updates)

    def select(self, keep) -> "SolverState":
        keep = np.asarray(keep, dtype=int)
        return SolverState(
            dictionary=self.dictionary.select(keep),
            energy=EnergyPredictor(self.energy.network.select_outputs(keep), self.energy.temperature),
            concentration=ConcentrationPredictor(
                self.concentration.network.select_outputs(keep), self.concentration.output_scale
            ),
        )

    def copy(self) -> "SolverState":
        return SolverState(self.dictionary.copy(), self.energy.copy(), self.concentration.copy())

    def forward(self, X_o: np.ndarray, rng: Optional[Rng] = None, train_mode: bool = False) -> GeneratedBatch:
        return forward(self.dictionary, self.concentration, self.energy, X_o, rng, train_mode)


def predict_concentrations(f_c: ConcentrationPredictor, X_o: np.ndarray) -> np.ndarray:
    """Concentraciones B x K >= 0"""
    return f_c.output_scale * softplus(f_c.network.forward(X_o).out)


def forward(dictionary: ComponentDictionary, f_c: ConcentrationPredictor, f_e: EnergyPredictor,
            X_o: np.ndarray, rng: Optional[Rng], train_mode: bool) -> GeneratedBatch:
    """X_g = (δ ⊙ C) · S' (superposición lineal)"""
    X_o = as_matrix(X_o, "X_o")
    if X_o.shape[1] != dictionary.dimension:
        raise ArgumentError(f"X_o tiene {X_o.shape[1]} columnas, el diccionario {dictionary.dimension}")

    energies = f_e.network.forward(X_o).out
    gates = sample_gates(energies, rng, f_e.temperature, train_mode)
    concentrations = predict_concentrations(f_c, X_o)
    mask = dictionary.mask(rng, train_mode)

    if train_mode:
        weights = gates.delta_soft * concentrations
        components = apply_mask(dictionary.S, mask, hardened=False)
    else:
        weights = np.where(gates.delta_hard > 0, concentrations, 0.0)
        components = apply_mask(dictionary.S, mask, hardened=True)
    return GeneratedBatch(weights @ components, gates, concentrations, mask)


def mean_selection_probability(state: SolverState, X: np.ndarray) -> np.ndarray:
    """Probabilidad media de selección sin ruido, por componente"""
    X = as_matrix(X, "dataset")
    if X.shape[0] == 0:
        return np.zeros(state.budget)
    probs = sample_gates(state.energy.network.forward(X).out, None, 1.0, train_mode=False).probs
    return probs.mean(axis=0)


def prune(state: SolverState, dataset: np.ndarray, threshold: float = 0.05) -> Tuple[SolverState, np.ndarray]:
    """Eliminar componentes con probabilidad media de uso < threshold"""
    usage = mean_selection_probability(state, dataset)
    keep = np.flatnonzero(usage >= threshold)
    if keep.size == 0 and state.budget > 0:
        logger.warning("La poda eliminó todos los componentes (ajuste degenerado)")
    return state.select(keep), keep
