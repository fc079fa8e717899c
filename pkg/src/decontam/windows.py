# src/decontam/windows.py
import math
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from src.decontam.chromatogram import Chromatogram
from src.utils.errors import ArgumentError
from src.utils.logger import logger


@dataclass
class Window:
    index: int
    start: float
    end: float
    rows: slice


@dataclass
class WindowPlan:
    """Partición del eje RT en intervalos [start, end) sin huecos"""
    window_length: float
    windows: List[Window]

    def rows_for(self, rt_axis: np.ndarray) -> List[slice]:
        """Filas de un eje RT concreto dentro de cada ventana"""
        if rt_axis.size and (rt_axis[0] < self.windows[0].start or rt_axis[-1] >= self.windows[-1].end):
            raise ArgumentError("El plan de ventanas no cubre el eje RT")
        edges = [w.start for w in self.windows] + [self.windows[-1].end]
        cuts = np.searchsorted(rt_axis, edges, side="left")
        return [slice(int(cuts[i]), int(cuts[i + 1])) for i in range(len(self.windows))]

    def to_dict(self):
        return {
            "window_length": self.window_length,
            "windows": [{"index": w.index, "start": w.start, "end": w.end,
                         "rows": [w.rows.start, w.rows.stop]} for w in self.windows],
        }

    @classmethod
    def from_dict(cls, payload) -> "WindowPlan":
        return cls(payload["window_length"], [
            Window(w["index"], w["start"], w["end"], slice(*w["rows"])) for w in payload["windows"]
        ])


@dataclass
class MixtureBatch:
    """Filas de un cromatograma dentro de una ventana (una muestra por scan)"""
    X: np.ndarray
    window: Window
    rows: slice


def plan_windows(rt_axis: np.ndarray, window_length: float = 60.0) -> WindowPlan:
    """Ventanas de longitud fija alineadas a múltiplos de window_length"""
    if window_length <= 0:
        raise ArgumentError(f"window_length debe ser > 0: {window_length}")
    rt_axis = np.asarray(rt_axis, dtype=np.float64)
    if rt_axis.size == 0:
        raise ArgumentError("Eje RT vacío")
    origin = math.floor(rt_axis[0] / window_length) * window_length
    count = int(math.floor((rt_axis[-1] - origin) / window_length)) + 1
    windows = []
    for i in range(count):
        windows.append(Window(i, origin + i * window_length, origin + (i + 1) * window_length, slice(0, 0)))
    plan = WindowPlan(window_length, windows)
    for window, rows in zip(windows, plan.rows_for(rt_axis)):
        window.rows = rows
    return plan


def window_split(chrom: Chromatogram, plan: WindowPlan) -> List[MixtureBatch]:
    """Lotes por ventana; las ventanas vacías se omiten"""
    batches = []
    for window, rows in zip(plan.windows, plan.rows_for(chrom.rt_axis)):
        if rows.stop <= rows.start:
            logger.warning(f"Ventana {window.index} [{window.start:g}, {window.end:g}) sin scans en {chrom.name}")
            continue
        batches.append(MixtureBatch(chrom.intensities[rows], window, rows))
    return batches


def reassemble(batches: Sequence[MixtureBatch], n_rows: int, n_channels: int) -> np.ndarray:
    out = np.zeros((n_rows, n_channels))
    for batch in batches:
        out[batch.rows] = batch.X
    return out
