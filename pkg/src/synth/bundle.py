# src/synth/bundle.py
from pathlib import Path
from typing import Tuple, Union

from src.synth.generator import GroundTruth
from src.utils.config import SynthSettings
from src.utils.io import read_json, read_matrix_csv, write_json, write_matrix_csv

MATRICES = ("X_noisy", "X_clean", "S_true", "C_true", "delta_true")
SIDECAR = "dataset.json"


def write_bundle(directory: Union[str, Path], truth: GroundTruth, cfg: SynthSettings) -> Path:
    """CSV por matriz + sidecar JSON con la configuración"""
    directory = Path(directory)
    for name in MATRICES:
        matrix = getattr(truth, name)
        prefix = "ch" if name.startswith(("X_", "S_")) else "k"
        write_matrix_csv(directory / f"{name}.csv", matrix, [f"{prefix}{j}" for j in range(matrix.shape[1])])
    write_json(directory / SIDECAR, {
        "config": cfg.model_dump(mode="json"),
        "seed": cfg.seed,
        "n_samples": int(truth.X_noisy.shape[0]),
        "snr_realized_db": truth.snr_realized_db,
    })
    return directory


def read_bundle(directory: Union[str, Path]) -> Tuple[GroundTruth, SynthSettings]:
    directory = Path(directory)
    sidecar = read_json(directory / SIDECAR)
    matrices = {name: read_matrix_csv(directory / f"{name}.csv") for name in MATRICES}
    truth = GroundTruth(**matrices, snr_realized_db=sidecar.get("snr_realized_db"))
    return truth, SynthSettings(**sidecar["config"])
