# src/decontam/chromatogram.py
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Union

import numpy as np
import pandas as pd

from src.utils.errors import ArgumentError, DataIOError
from src.utils.io import frame_to_csv, read_csv_frame, read_json, write_json

LABELS = ("clean", "polluted", "unknown")


@dataclass
class Chromatogram:
    """Matriz scans x canales m/z con su eje de tiempos de retención"""
    rt_axis: np.ndarray
    mz_axis: np.ndarray
    intensities: np.ndarray
    label: str = "unknown"
    name: str = ""

    def __post_init__(self):
        self.rt_axis = np.asarray(self.rt_axis, dtype=np.float64)
        self.mz_axis = np.asarray(self.mz_axis, dtype=np.int64)
        self.intensities = np.asarray(self.intensities, dtype=np.float64)
        if self.label not in LABELS:
            raise ArgumentError(f"Etiqueta desconocida: {self.label}")
        if self.intensities.shape != (self.rt_axis.size, self.mz_axis.size):
            raise ArgumentError(
                f"Intensidades {self.intensities.shape} no coinciden con ejes "
                f"({self.rt_axis.size}, {self.mz_axis.size})"
            )
        if np.any(np.diff(self.rt_axis) <= 0):
            raise ArgumentError("rt_axis debe ser estrictamente creciente")
        if np.any(self.intensities < 0) or not np.all(np.isfinite(self.intensities)):
            raise ArgumentError("Las intensidades deben ser finitas y no negativas")

    @property
    def n_scans(self) -> int:
        return self.rt_axis.size

    @property
    def n_channels(self) -> int:
        return self.mz_axis.size

    @property
    def tic(self) -> np.ndarray:
        """Cromatograma de iones totales"""
        return self.intensities.sum(axis=1)

    def channel_index(self, mz: int) -> int:
        hits = np.flatnonzero(self.mz_axis == int(mz))
        if hits.size == 0:
            raise ArgumentError(f"Canal m/z {mz} no está en el eje ({self.mz_axis[0]}..{self.mz_axis[-1]})")
        return int(hits[0])

    def with_intensities(self, intensities: np.ndarray, label: str = None) -> "Chromatogram":
        return replace(self, intensities=intensities, label=label or self.label)


def read_chromatogram_csv(path: Union[str, Path], label: str = "unknown") -> Chromatogram:
    """Primera columna: RT en segundos; resto: canales con su m/z en la cabecera"""
    path = Path(path)
    frame = read_csv_frame(path)
    if frame.shape[1] < 2:
        raise DataIOError("Se esperaba una columna RT y al menos un canal", path=str(path), line=1)
    try:
        mz_axis = [int(float(h)) for h in frame.columns[1:]]
    except ValueError as e:
        raise DataIOError(f"Cabecera m/z inválida: {e}", path=str(path), line=1) from e
    # pandas renombra cabeceras repetidas ("207" -> "207.1"), que volverían a leerse como 207
    repeated = sorted({m for m in mz_axis if mz_axis.count(m) > 1})
    if repeated:
        raise DataIOError(f"Canales m/z repetidos en la cabecera: {repeated}", path=str(path), line=1)

    rt = frame.iloc[:, 0].to_numpy(dtype=np.float64)
    steps = np.flatnonzero(np.diff(rt) <= 0)
    if steps.size:
        raise DataIOError("RT no creciente", path=str(path), line=int(steps[0]) + 3)
    intensities = frame.iloc[:, 1:].to_numpy(dtype=np.float64)
    negative = np.flatnonzero(np.any(intensities < 0, axis=1))
    if negative.size:
        raise DataIOError("Intensidad negativa", path=str(path), line=int(negative[0]) + 2)
    return Chromatogram(rt, mz_axis, intensities, label=label, name=path.stem)


def write_chromatogram_csv(path: Union[str, Path], chrom: Chromatogram):
    frame = pd.DataFrame(chrom.intensities, columns=[str(m) for m in chrom.mz_axis])
    frame.insert(0, "rt", chrom.rt_axis)
    frame_to_csv(path, frame)


def read_manifest(path: Union[str, Path]) -> List[Chromatogram]:
    """Manifiesto JSON: {"files": [{"path": ..., "label": "clean|polluted|unknown"}]}"""
    path = Path(path)
    payload = read_json(path)
    entries = payload.get("files")
    if not isinstance(entries, list):
        raise DataIOError("El manifiesto debe contener una lista 'files'", path=str(path))
    chroms = []
    for entry in entries:
        if "path" not in entry:
            raise DataIOError(f"Entrada sin 'path': {entry}", path=str(path))
        label = entry.get("label", "unknown")
        if label not in LABELS:
            raise DataIOError(f"Etiqueta desconocida '{label}'", path=str(path))
        chroms.append(read_chromatogram_csv(path.parent / entry["path"], label=label))
    return chroms


def write_manifest(directory: Union[str, Path], chroms: List[Chromatogram], name: str = "manifest.json") -> Path:
    directory = Path(directory)
    entries = []
    for i, chrom in enumerate(chroms):
        filename = f"{chrom.name or f'{chrom.label}_{i:03d}'}.csv"
        write_chromatogram_csv(directory / filename, chrom)
        entries.append({"path": filename, "label": chrom.label})
    write_json(directory / name, {"files": entries})
    return directory / name
