# src/utils/errors.py
from typing import Optional, Any


class SparseMCRError(Exception):
    """Error base del toolkit"""
    exit_code = 1


class ArgumentError(SparseMCRError, ValueError):
    """Argumento o configuración inválida"""
    exit_code = 2


class DataIOError(SparseMCRError, OSError):
    """Error de lectura/escritura con archivo y línea opcionales"""
    exit_code = 3

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        location = ""
        if path is not None:
            location = f" [{path}" + (f":{line}" if line is not None else "") + "]"
        super().__init__(message + location)


class NumericError(SparseMCRError, ArithmeticError):
    """Valor no finito o cálculo numérico inválido"""
    exit_code = 4

    def __init__(self, message: str, term: Optional[str] = None):
        self.term = term
        super().__init__(f"{term}: {message}" if term else message)


class MetricUndefinedError(NumericError):
    """Métrica no definida para los datos dados (p.ej. R² con datos constantes)"""


class TrainingDivergedError(NumericError):
    """El entrenamiento divergió; conserva el último checkpoint válido"""

    def __init__(self, message: str, term: Optional[str] = None, last_good: Any = None,
                 result: Any = None):
        self.last_good = last_good
        self.result = result
        super().__init__(message, term)
