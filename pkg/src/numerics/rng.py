# src/numerics/rng.py
import hashlib
from dataclasses import dataclass, field
from typing import Tuple, Union

import numpy as np

from src.utils.errors import ArgumentError

Shape = Union[int, Tuple[int, ...]]

_UINT64 = 2 ** 64


@dataclass
class Rng:
    """Generador determinista basado en contador (Philox) con sub-streams"""
    seed: int
    stream_id: int = 0
    generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name, value in (("seed", self.seed), ("stream_id", self.stream_id)):
            if not 0 <= int(value) < _UINT64:
                raise ArgumentError(f"{name} debe ser un entero de 64 bits sin signo: {value}")
        self.seed = int(self.seed)
        self.stream_id = int(self.stream_id)
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.Philox(sequence))

    def derive(self, name: Union[str, int]) -> "Rng":
        """Sub-stream independiente identificado por nombre"""
        digest = hashlib.sha256(f"{self.stream_id}/{name}".encode()).digest()
        return Rng(self.seed, int.from_bytes(digest[:8], "little"))

    def uniform(self, low: float, high: float, shape: Shape) -> np.ndarray:
        return self.generator.uniform(low, high, size=shape)

    def random(self, shape: Shape) -> np.ndarray:
        return self.generator.random(size=shape)

    def integers(self, low: int, high: int, shape: Shape = None):
        """Enteros en [low, high)"""
        return self.generator.integers(low, high, size=shape)

    def choice(self, n: int, k: int) -> np.ndarray:
        """k índices distintos de range(n)"""
        return self.generator.choice(n, size=k, replace=False)

    def gumbel(self, shape: Shape) -> np.ndarray:
        return self.generator.gumbel(0.0, 1.0, size=shape)

    def gumbel_difference(self, shape: Shape) -> np.ndarray:
        """g1 - g2 con g1, g2 ~ Gumbel(0, 1) (ruido logístico)"""
        return self.gumbel(shape) - self.gumbel(shape)


def gaussian(rng: Rng, mean: float, std: float, shape: Shape) -> np.ndarray:
    """Muestras normales i.i.d."""
    if std < 0:
        raise ArgumentError(f"std debe ser >= 0: {std}")
    if std == 0:
        return np.full(shape, float(mean))
    return rng.generator.normal(mean, std, size=shape)
