# src/decontam/fixtures.py
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from src.decontam.chromatogram import Chromatogram
from src.numerics.rng import Rng, gaussian
from src.synth.generator import add_noise_quantize, draw_noise
from src.utils.errors import ArgumentError


@dataclass
class ContaminationFixture:
    """Proceso limpio (N componentes) + proceso de contaminación disjunto (M componentes)"""
    clean: List[Chromatogram]
    polluted: List[Chromatogram]
    polluted_clean_part: List[np.ndarray]
    S_clean: np.ndarray
    S_pollution: np.ndarray
    pollution_channels: List[int]
    clean_channels: List[int]


def _components(rng: Rng, n: int, channels: np.ndarray, d: int, sparsity: float) -> np.ndarray:
    S = np.zeros((n, d))
    for i in range(n):
        keep = rng.random(channels.size) >= sparsity
        if not keep.any():
            keep[int(rng.integers(0, channels.size))] = True
        S[i, channels[keep]] = np.abs(gaussian(rng, 0.0, 1.0, int(keep.sum())))
    return S / np.linalg.norm(S, axis=1, keepdims=True)


def _mixtures(rng: Rng, S: np.ndarray, scans: int, active: Sequence[int], conc: Sequence[float]) -> np.ndarray:
    n = S.shape[0]
    C = np.zeros((scans, n))
    for b in range(scans):
        k = int(rng.integers(active[0], min(active[1], n) + 1))
        idx = rng.choice(n, k)
        C[b, idx] = rng.uniform(conc[0], conc[1], k)
    return C @ S


def make_contamination_fixture(n_clean_components: int = 12, n_pollution_components: int = 2,
                               mz_start: int = 200, n_channels: int = 96,
                               pollution_markers: Sequence[int] = (207, 281), extra_pollution_channels: int = 4,
                               n_clean: int = 8, n_polluted: int = 4, scans: int = 120,
                               scan_interval: float = 1.0, sparsity: float = 0.8,
                               snr_db: Optional[float] = 30.0, seed: int = 7) -> ContaminationFixture:
    """Cromatogramas sintéticos limpios y contaminados con canales de contaminación exclusivos"""
    if n_clean_components < 1 or n_pollution_components < 1:
        raise ArgumentError("Se necesita al menos un componente en cada proceso")
    rng = Rng(seed)
    mz_axis = np.arange(mz_start, mz_start + n_channels)
    markers = [m for m in pollution_markers if mz_start <= m < mz_start + n_channels]
    others = np.setdiff1d(mz_axis, markers)
    extra = rng.derive("channels").choice(others.size, min(extra_pollution_channels, others.size))
    pollution_mz = sorted(set(markers) | set(others[extra].tolist()))
    pollution_idx = np.searchsorted(mz_axis, pollution_mz)
    clean_idx = np.setdiff1d(np.arange(n_channels), pollution_idx)

    S_clean = _components(rng.derive("clean-components"), n_clean_components, clean_idx, n_channels, sparsity)
    S_pollution = _components(rng.derive("pollution-components"), n_pollution_components, pollution_idx,
                              n_channels, 0.0)
    rt_axis = np.arange(scans) * scan_interval

    def make(kind: str, i: int, polluted: bool):
        sub = rng.derive(f"{kind}-{i}")
        X_clean = _mixtures(sub.derive("mix"), S_clean, scans, (2, 6), (10.0, 1000.0))
        X = X_clean.copy()
        if polluted:
            X += _mixtures(sub.derive("pollution"), S_pollution, scans, (1, 2), (10.0, 1000.0))
        X = add_noise_quantize(X, snr_db, None, noise=draw_noise(X_clean, snr_db, sub.derive("noise")))
        label = "polluted" if polluted else "clean"
        return Chromatogram(rt_axis, mz_axis, X, label=label, name=f"{label}_{i:03d}"), X_clean

    clean = [make("clean", i, False)[0] for i in range(n_clean)]
    polluted, parts = [], []
    for i in range(n_polluted):
        chrom, part = make("polluted", i, True)
        polluted.append(chrom)
        parts.append(part)
    return ContaminationFixture(
        clean=clean,
        polluted=polluted,
        polluted_clean_part=parts,
        S_clean=S_clean,
        S_pollution=S_pollution,
        pollution_channels=[int(m) for m in pollution_mz],
        clean_channels=[int(m) for m in mz_axis[clean_idx]],
    )
