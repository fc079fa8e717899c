# src/utils/io.py
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Union

import numpy as np
import pandas as pd

from src.utils.config import settings
from src.utils.errors import DataIOError

PathLike = Union[str, Path]


def atomic_write_text(path: PathLike, text: str):
    """Escribir un archivo de forma atómica (temporal + rename)"""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
        with os.fdopen(fd, 'w', newline='') as f:
            f.write(text)
        os.replace(tmp_name, path)
    except OSError as e:
        raise DataIOError(f"No se pudo escribir: {e}", path=str(path)) from e


def write_json(path: PathLike, payload: Dict[str, Any]):
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_json(path: PathLike) -> Dict[str, Any]:
    path = Path(path)
    try:
        with open(path, 'r') as f:
            return json.load(f)
    except FileNotFoundError as e:
        raise DataIOError("Archivo no encontrado", path=str(path)) from e
    except json.JSONDecodeError as e:
        raise DataIOError(f"JSON inválido: {e.msg}", path=str(path), line=e.lineno) from e


def frame_to_csv(path: PathLike, frame: pd.DataFrame, index: bool = False):
    """Guardar un DataFrame como CSV sin pérdida de precisión"""
    text = frame.to_csv(index=index, float_format=settings.output.float_format, lineterminator="\n")
    atomic_write_text(path, text)


def write_matrix_csv(path: PathLike, matrix: np.ndarray, columns: Optional[Sequence[str]] = None):
    matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    if columns is None:
        columns = [f"c{j}" for j in range(matrix.shape[1])]
    frame_to_csv(path, pd.DataFrame(matrix, columns=list(columns)))


def read_csv_frame(path: PathLike) -> pd.DataFrame:
    """Leer un CSV verificando que todas las celdas sean numéricas"""
    path = Path(path)
    try:
        frame = pd.read_csv(path)
    except FileNotFoundError as e:
        raise DataIOError("Archivo no encontrado", path=str(path)) from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataIOError(f"CSV mal formado: {e}", path=str(path)) from e

    numeric = frame.apply(pd.to_numeric, errors='coerce')
    bad = numeric.isna()
    if bad.to_numpy().any():
        row = int(np.argmax(bad.to_numpy().any(axis=1)))
        # +2: cabecera y numeración desde 1
        raise DataIOError("Valor no numérico o vacío", path=str(path), line=row + 2)
    return numeric


def read_matrix_csv(path: PathLike) -> np.ndarray:
    return read_csv_frame(path).to_numpy(dtype=np.float64)
