# src/numerics/optim.py
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from src.numerics.functions import check_same_shape, ensure_finite


@dataclass
class AdamState:
    """Momentos de Adam para un parámetro"""
    first_moment: np.ndarray
    second_moment: np.ndarray
    step_count: int = 0
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def zeros_like(cls, param: np.ndarray, **hyper) -> "AdamState":
        return cls(np.zeros_like(param, dtype=np.float64), np.zeros_like(param, dtype=np.float64), **hyper)


def adam_step(param: np.ndarray, grad: np.ndarray, state: AdamState) -> np.ndarray:
    """Actualización de Adam con corrección de sesgo; retorna el parámetro nuevo"""
    check_same_shape(param, grad, "parámetro y gradiente")
    check_same_shape(param, state.first_moment, "parámetro y estado de Adam")
    ensure_finite("gradient", grad)

    state.step_count += 1
    state.first_moment *= state.beta1
    state.first_moment += (1.0 - state.beta1) * grad
    state.second_moment *= state.beta2
    state.second_moment += (1.0 - state.beta2) * (grad * grad)

    bc1 = 1.0 - state.beta1 ** state.step_count
    bc2 = 1.0 - state.beta2 ** state.step_count
    denom = np.sqrt(state.second_moment / bc2) + state.epsilon
    return param - (state.learning_rate / bc1) * state.first_moment / denom


@dataclass
class Adam:
    """Un AdamState por grupo de parámetros"""
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    states: Dict[str, AdamState] = field(default_factory=dict)

    def step(self, params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]) -> Dict[str, np.ndarray]:
        updated = {}
        for name, value in params.items():
            if name not in self.states:
                self.states[name] = AdamState.zeros_like(
                    value,
                    learning_rate=self.learning_rate,
                    beta1=self.beta1,
                    beta2=self.beta2,
                    epsilon=self.epsilon,
                )
            updated[name] = adam_step(value, grads[name], self.states[name])
        return updated
