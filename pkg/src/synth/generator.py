# src/synth/generator.py
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.evaluation.metrics import realized_snr_db
from src.numerics.rng import Rng, gaussian
from src.utils.config import SynthSettings
from src.utils.errors import ArgumentError
from src.utils.logger import logger


@dataclass
class GroundTruth:
    """Componentes, concentraciones y compuertas verdaderas con las mezclas generadas"""
    S_true: np.ndarray
    C_true: np.ndarray
    delta_true: np.ndarray
    X_clean: np.ndarray
    X_noisy: np.ndarray
    snr_realized_db: Optional[float] = None

    @property
    def n_true(self) -> int:
        return self.S_true.shape[0]

    @property
    def support(self) -> np.ndarray:
        return self.S_true != 0


def sample_components(cfg: SynthSettings, rng: Rng) -> np.ndarray:
    """N componentes dispersos de norma unitaria"""
    d, ratio = cfg.d, cfg.sparsity_ratio
    if d < 2:
        raise ArgumentError(f"d debe ser >= 2: {d}")
    if d * (1.0 - ratio) < 1.0:
        raise ArgumentError(f"Con d={d} y sparsity_ratio={ratio} se espera menos de 1 entrada no nula")

    keep = rng.random((cfg.n_true, d)) >= ratio
    # Redibujar filas vacías
    empty = ~keep.any(axis=1)
    while empty.any():
        keep[empty] = rng.random((int(empty.sum()), d)) >= ratio
        empty = ~keep.any(axis=1)

    magnitudes = np.abs(gaussian(rng, 0.0, 1.0, (cfg.n_true, d)))
    S = np.where(keep, magnitudes, 0.0)
    return S / np.linalg.norm(S, axis=1, keepdims=True)


def draw_noise(X_clean: np.ndarray, snr_db: Optional[float], rng: Rng) -> np.ndarray:
    """Ruido gaussiano con la SNR objetivo sobre la potencia media del dataset"""
    if snr_db is None or np.isinf(snr_db):
        return np.zeros_like(X_clean)
    if not np.isfinite(snr_db):
        raise ArgumentError(f"snr_db inválida: {snr_db}")
    power = float(np.mean(X_clean ** 2)) if X_clean.size else 0.0
    std = np.sqrt(power / 10.0 ** (snr_db / 10.0))
    return gaussian(rng, 0.0, std, X_clean.shape)


def add_noise_quantize(X_clean: np.ndarray, snr_db: Optional[float], rng: Optional[Rng],
                       noise: Optional[np.ndarray] = None) -> np.ndarray:
    """Sumar ruido, recortar en 0 y redondear a enteros

    Si se pasa `noise` ya muestreado se usa tal cual y `rng` no se consume.
    """
    if noise is None:
        noise = draw_noise(X_clean, snr_db, rng)
    noisy = X_clean + noise
    return np.rint(np.maximum(noisy, 0.0))


def sample_mixtures(cfg: SynthSettings, S_true: np.ndarray, rng: Rng) -> GroundTruth:
    """Mezclas por superposición de subconjuntos activos de componentes"""
    n_true = S_true.shape[0]
    low, high = cfg.active_per_sample
    if high > n_true:
        raise ArgumentError(f"active_per_sample={cfg.active_per_sample} excede N={n_true}")
    if not 1 <= low <= high:
        raise ArgumentError(f"active_per_sample inválido: {cfg.active_per_sample}")

    n_samples = cfg.dataset_multiple * n_true
    mix_rng = rng.derive("mixtures")
    delta = np.zeros((n_samples, n_true))
    for b in range(n_samples):
        k = int(mix_rng.integers(low, high + 1))
        delta[b, mix_rng.choice(n_true, k)] = 1.0
    C_true = delta * mix_rng.uniform(cfg.conc_low, cfg.conc_high, (n_samples, n_true))
    X_clean = C_true @ S_true

    noise = draw_noise(X_clean, cfg.snr_db, rng.derive("noise"))
    X_noisy = add_noise_quantize(X_clean, cfg.snr_db, None, noise=noise)
    return GroundTruth(
        S_true=S_true,
        C_true=C_true,
        delta_true=delta,
        X_clean=X_clean,
        X_noisy=X_noisy,
        snr_realized_db=realized_snr_db(X_clean, noise),
    )


def generate_dataset(cfg: SynthSettings, rng: Optional[Rng] = None) -> GroundTruth:
    """Componentes + mezclas para una configuración"""
    rng = rng or Rng(cfg.seed)
    S_true = sample_components(cfg, rng.derive("components"))
    truth = sample_mixtures(cfg, S_true, rng.derive("samples"))
    logger.info(
        f"Dataset sintético: N={cfg.n_true}, d={cfg.d}, muestras={truth.X_noisy.shape[0]}, "
        f"dispersión media={1.0 - truth.support.mean():.4f}, SNR real={truth.snr_realized_db}"
    )
    return truth
