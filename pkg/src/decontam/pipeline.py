# src/decontam/pipeline.py
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from src.baselines.matching import cosine_matrix
from src.decontam.chromatogram import Chromatogram
from src.decontam.windows import WindowPlan, window_split
from src.evaluation.metrics import r_squared_or_none
from src.numerics.rng import Rng
from src.solver.checkpoint import SolverCheckpoint, load_checkpoint, save_checkpoint
from src.solver.trainer import train, trivial_checkpoint
from src.utils.config import SolverSettings
from src.utils.errors import ArgumentError
from src.utils.io import read_json, write_json
from src.utils.logger import logger


@dataclass
class SolverSet:
    """Un solver independiente por ventana de RT"""
    plan: WindowPlan
    checkpoints: Dict[int, SolverCheckpoint]
    mz_axis: np.ndarray

    def save(self, directory: Union[str, Path]):
        directory = Path(directory)
        files = {}
        for index, ckpt in sorted(self.checkpoints.items()):
            name = f"window_{index:03d}.json"
            save_checkpoint(directory / name, ckpt)
            files[str(index)] = name
        write_json(directory / "solvers.json", {
            "plan": self.plan.to_dict(),
            "mz_axis": self.mz_axis.tolist(),
            "checkpoints": files,
        })

    @classmethod
    def load(cls, directory: Union[str, Path]) -> "SolverSet":
        directory = Path(directory)
        payload = read_json(directory / "solvers.json")
        checkpoints = {int(k): load_checkpoint(directory / v) for k, v in payload["checkpoints"].items()}
        return cls(WindowPlan.from_dict(payload["plan"]), checkpoints, np.asarray(payload["mz_axis"]))


@dataclass
class CleanResult:
    cleaned: Chromatogram
    residual: np.ndarray
    per_window: pd.DataFrame = field(default_factory=pd.DataFrame)

    @property
    def per_window_r2(self) -> List[Optional[float]]:
        return self.per_window["recon_r2"].tolist() if len(self.per_window) else []


def _fit_window(index: int, X: np.ndarray, hp: SolverSettings, rng: Rng) -> SolverCheckpoint:
    if not np.any(X):
        logger.warning(f"Ventana {index} sin señal: solver trivial (EC 0)")
        return trivial_checkpoint(X.shape[1], hp)
    return train(X, hp, rng=rng, label=f"ventana-{index}").best


def fit_clean_process(clean: Sequence[Chromatogram], plan: WindowPlan, hp: SolverSettings,
                      rng: Optional[Rng] = None, workers: int = 1) -> SolverSet:
    """Entrenar un solver por ventana con los scans limpios de esa ventana"""
    if not clean:
        raise ArgumentError("Se necesita al menos un cromatograma limpio")
    mz_axis = clean[0].mz_axis
    for chrom in clean:
        if not np.array_equal(chrom.mz_axis, mz_axis):
            raise ArgumentError(f"Eje m/z distinto en {chrom.name}")
    rng = rng or Rng(hp.seed)

    stacked: Dict[int, List[np.ndarray]] = {}
    for chrom in clean:
        for batch in window_split(chrom, plan):
            stacked.setdefault(batch.window.index, []).append(batch.X)
    jobs = {index: np.vstack(parts) for index, parts in sorted(stacked.items())}
    logger.info(f"Entrenando {len(jobs)} solvers de ventana con {len(clean)} cromatogramas limpios")

    # Sub-stream por índice de ventana: el resultado no depende del orden de ejecución
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        futures = {
            index: pool.submit(_fit_window, index, X, hp, rng.derive(f"window-{index}"))
            for index, X in jobs.items()
        }
        checkpoints = {index: future.result() for index, future in futures.items()}
    return SolverSet(plan, checkpoints, np.asarray(mz_axis))


def _reconstruct(ckpt: SolverCheckpoint, X: np.ndarray) -> np.ndarray:
    X_g = ckpt.state.forward(X, train_mode=False).X_g
    # Scans sin señal no contienen componentes
    X_g[~np.any(X, axis=1)] = 0.0
    return np.maximum(X_g, 0.0)


def clean(polluted: Chromatogram, solvers: SolverSet, mode: str = "reconstruct",
          pollution_solvers: Optional[SolverSet] = None, quantize: bool = True) -> CleanResult:
    """Limpieza por reconstrucción (o por resta del proceso de contaminación)"""
    if polluted.n_channels != solvers.mz_axis.size or not np.array_equal(polluted.mz_axis, solvers.mz_axis):
        raise ArgumentError(
            f"{polluted.n_channels} canales en el cromatograma, {solvers.mz_axis.size} en los solvers"
        )
    if mode == "subtract" and pollution_solvers is None:
        raise ArgumentError("El modo 'subtract' requiere solvers del proceso de contaminación")
    if mode not in ("reconstruct", "subtract"):
        raise ArgumentError(f"Modo desconocido: {mode}")

    source = pollution_solvers if mode == "subtract" else solvers
    cleaned = np.zeros_like(polluted.intensities)
    rows_info = []
    for batch in window_split(polluted, solvers.plan):
        index = batch.window.index
        if index not in source.checkpoints:
            raise ArgumentError(f"No hay solver para la ventana {index}")
        ckpt = source.checkpoints[index]
        X_g = _reconstruct(ckpt, batch.X)
        part = X_g if mode == "reconstruct" else np.maximum(batch.X - X_g, 0.0)
        if quantize:
            part = np.rint(part)
        cleaned[batch.rows] = part
        rows_info.append({
            "window": index,
            "start": batch.window.start,
            "end": batch.window.end,
            "scans": batch.rows.stop - batch.rows.start,
            "train_r2": ckpt.r2,
            "train_ec": ckpt.ec,
            "recon_r2": r_squared_or_none(batch.X, part),
        })

    residual = polluted.intensities - cleaned
    return CleanResult(
        cleaned=polluted.with_intensities(cleaned, label="clean"),
        residual=residual,
        per_window=pd.DataFrame(rows_info),
    )


def pollution_channels_report(result: CleanResult, channels: Sequence[int],
                              polluted: Optional[Chromatogram] = None) -> pd.DataFrame:
    """Intensidad total por canal antes/después de limpiar y % de reducción"""
    cleaned = result.cleaned
    before_matrix = polluted.intensities if polluted is not None else cleaned.intensities + result.residual
    rows = []
    for mz in channels:
        j = cleaned.channel_index(mz)
        before = float(before_matrix[:, j].sum())
        after = float(cleaned.intensities[:, j].sum())
        reduction = 100.0 * (before - after) / before if before > 0 else 0.0
        rows.append({"mz": int(mz), "before": before, "after": after, "reduction_pct": reduction})
    return pd.DataFrame(rows, columns=["mz", "before", "after", "reduction_pct"])


def verify_set_uniqueness(S_clean: Optional[np.ndarray], S_pollution: Optional[np.ndarray],
                          tol: float = 1e-9) -> Optional[bool]:
    """|S_M| + |S_N| = |S_M ∪ S_N|: ningún componente de un conjunto está en el otro (salvo escala)"""
    if S_clean is None or S_pollution is None:
        return None  # no verificable sin verdad de referencia
    if S_clean.shape[0] == 0 or S_pollution.shape[0] == 0:
        return True
    return bool(np.max(cosine_matrix(S_clean, S_pollution)) < 1.0 - tol)
