# src/solver/objective.py
from dataclasses import dataclass, asdict
from typing import Dict, Optional, Tuple

import numpy as np

from src.numerics.functions import (
    as_matrix,
    binary_entropy_from_logits,
    binary_entropy_grad,
    ensure_finite,
    sigmoid,
    softplus,
)
from src.numerics.rng import Rng
from src.solver.dynamic_gate import expected_cardinality, selection_energy
from src.solver.model import SolverState
from src.solver.static_gate import gate_energy, static_cardinality
from src.utils.config import SolverSettings
from src.utils.errors import ArgumentError, NumericError


@dataclass
class LossBreakdown:
    """Los cinco términos aditivos de la energía total"""
    recon: float
    usage: float
    dyn_energy: float
    static_energy: float
    ambiguity: float
    total: float

    @classmethod
    def from_terms(cls, recon: float, usage: float, dyn_energy: float, static_energy: float,
                   ambiguity: float) -> "LossBreakdown":
        terms = {
            "recon": recon,
            "usage": usage,
            "dyn_energy": dyn_energy,
            "static_energy": static_energy,
            "ambiguity": ambiguity,
        }
        for name, value in terms.items():
            if not np.isfinite(value):
                raise NumericError("término de la pérdida no finito", term=name)
        return cls(**terms, total=recon + usage + dyn_energy + static_energy + ambiguity)

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass
class LossWeights:
    lambda_prime: float
    lambda_e: float
    lambda_amb: float
    lambda_static: float = 1.0

    @classmethod
    def from_settings(cls, hp: SolverSettings, d: int) -> "LossWeights":
        weights = cls(hp.resolve_lambda_prime(d), hp.lambda_e, hp.lambda_amb, hp.lambda_static)
        if min(weights.lambda_prime, weights.lambda_e, weights.lambda_amb, weights.lambda_static) < 0:
            raise ArgumentError("Los multiplicadores de la pérdida deben ser >= 0")
        return weights


@dataclass
class GateNoise:
    """Ruido logístico fijo (diferencia de dos Gumbel) para ambas compuertas"""
    dynamic: np.ndarray
    static: np.ndarray

    @classmethod
    def draw(cls, rng: Rng, batch: int, budget: int, d: int) -> "GateNoise":
        return cls(rng.gumbel_difference((batch, budget)), rng.gumbel_difference((budget, d)))

    @classmethod
    def zeros(cls, batch: int, budget: int, d: int) -> "GateNoise":
        return cls(np.zeros((batch, budget)), np.zeros((budget, d)))


def evaluate(X_o: np.ndarray, state: SolverState, weights: LossWeights, noise: GateNoise,
             with_grads: bool = True) -> Tuple[LossBreakdown, Optional[Dict[str, np.ndarray]]]:
    """Pérdida relajada y sus gradientes analíticos para el ruido dado"""
    X_o = as_matrix(X_o, "X_o")
    batch, d = X_o.shape
    if d != state.dimension:
        raise ArgumentError(f"X_o tiene {d} columnas, el solver {state.dimension}")

    gate = state.dictionary.static_gate
    S = state.dictionary.S
    tau_d = state.energy.temperature
    tau_s = gate.temperature
    if tau_d <= 0 or tau_s <= 0:
        raise ArgumentError("Las temperaturas deben ser > 0")
    scale = state.concentration.output_scale

    # Forward
    e_cache = state.energy.network.forward(X_o)
    c_cache = state.concentration.network.forward(X_o)
    E = e_cache.out
    Z = c_cache.out
    C = scale * softplus(Z)
    delta = sigmoid((-E + noise.dynamic) / tau_d)
    gated = state.dictionary.gated
    a_static = gate.e_off - gate.e_on
    M = sigmoid((a_static + noise.static) / tau_s) if gated else np.ones_like(S)
    S_eff = S * M
    W = delta * C
    residual = W @ S_eff - X_o
    P = sigmoid(-E)

    # Sin compuerta estática no hay términos estáticos
    n_gates = P.size + (a_static.size if gated else 0)
    entropy = 0.0
    if n_gates:
        entropy = np.sum(binary_entropy_from_logits(-E))
        if gated:
            entropy += np.sum(binary_entropy_from_logits(a_static))
        entropy /= n_gates

    cardinality = expected_cardinality(P)
    if gated:
        cardinality += weights.lambda_static * static_cardinality(gate)

    breakdown = LossBreakdown.from_terms(
        recon=float(np.sum(residual ** 2) / batch) if batch else 0.0,
        usage=weights.lambda_prime * cardinality,
        dyn_energy=weights.lambda_e * selection_energy(E),
        static_energy=weights.lambda_e * gate_energy(gate) if gated else 0.0,
        ambiguity=weights.lambda_amb * float(entropy),
    )
    if not with_grads:
        return breakdown, None

    # Backward
    G = 2.0 * residual / max(batch, 1)
    grad_W = G @ S_eff.T
    grad_S_eff = W.T @ G
    grad_S = grad_S_eff * M

    ent_scale = weights.lambda_amb / n_gates if n_gates else 0.0
    if gated:
        grad_z_static = grad_S_eff * S * M * (1.0 - M) / tau_s
        p_static = sigmoid(a_static)
        grad_a_static = (
            grad_z_static
            + ent_scale * binary_entropy_grad(a_static)
            + (weights.lambda_prime * weights.lambda_static / d) * p_static * (1.0 - p_static)
        )
        grad_e_off = grad_a_static + 2.0 * weights.lambda_e * gate.e_off
        grad_e_on = -grad_a_static + 2.0 * weights.lambda_e * gate.e_on
    else:
        grad_e_off = np.zeros_like(gate.e_off)
        grad_e_on = np.zeros_like(gate.e_on)

    grad_delta = grad_W * C
    grad_C = grad_W * delta
    grad_E = -grad_delta * delta * (1.0 - delta) / tau_d
    if batch:
        grad_E = grad_E - (weights.lambda_prime / batch) * P * (1.0 - P)
        grad_E = grad_E + (2.0 * weights.lambda_e / batch) * E
    grad_E = grad_E - ent_scale * binary_entropy_grad(-E)
    grad_Z = grad_C * scale * sigmoid(Z)

    grads = {"S": grad_S, "e_on": grad_e_on, "e_off": grad_e_off}
    for prefix, net, cache, grad_out in (
        ("energy", state.energy.network, e_cache, grad_E),
        ("concentration", state.concentration.network, c_cache, grad_Z),
    ):
        for name, value in net.backward(cache, grad_out).items():
            grads[f"{prefix}.{name}"] = value
    for name, value in grads.items():
        ensure_finite(f"grad[{name}]", value)
    return breakdown, grads


def loss(X_o: np.ndarray, state: SolverState, hp: SolverSettings, rng: Optional[Rng],
         train_mode: bool) -> LossBreakdown:
    """Energía total: ruido de Gumbel en entrenamiento, relajación sin ruido en otro caso"""
    X_o = as_matrix(X_o, "X_o")
    weights = LossWeights.from_settings(hp, state.dimension)
    if train_mode:
        noise = GateNoise.draw(rng, X_o.shape[0], state.budget, state.dimension)
    else:
        noise = GateNoise.zeros(X_o.shape[0], state.budget, state.dimension)
    breakdown, _ = evaluate(X_o, state, weights, noise, with_grads=False)
    return breakdown


def energy_balance(breakdown: LossBreakdown) -> float:
    """Cociente término estático / término de uso"""
    if breakdown.usage == 0:
        return float("inf") if breakdown.static_energy > 0 else 0.0
    return breakdown.static_energy / breakdown.usage
