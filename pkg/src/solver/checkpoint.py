# src/solver/checkpoint.py
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from src.solver.dynamic_gate import EnergyPredictor
from src.solver.model import ComponentDictionary, ConcentrationPredictor, SolverState
from src.solver.networks import MLP
from src.solver.objective import LossBreakdown
from src.solver.static_gate import StaticGateParams
from src.utils.errors import DataIOError
from src.utils.io import read_json, write_json

FORMAT = "sparse-eb-gmcr-checkpoint"
VERSION = 1


@dataclass
class SolverCheckpoint:
    """Parámetros del solver + metadatos de entrenamiento"""
    iteration: int
    state: SolverState
    losses: Optional[LossBreakdown]
    r2: Optional[float]
    ec: int
    hyperparams: Dict[str, Any] = field(default_factory=dict)
    method: str = "sparse-eb-gmcr"

    def to_dict(self) -> Dict[str, Any]:
        state = self.state
        arrays = {name: _encode(value) for name, value in state.params().items()}
        return {
            "format": FORMAT,
            "version": VERSION,
            "method": self.method,
            "iteration": self.iteration,
            "budget": state.budget,
            "dimension": state.dimension,
            "hidden": state.energy.network.w1.shape[1],
            "temperature": state.energy.temperature,
            "static_temperature": state.dictionary.static_gate.temperature,
            "gated": state.dictionary.gated,
            "input_scale": state.energy.network.input_scale,
            "output_scale": state.concentration.output_scale,
            "parameters": arrays,
            "losses": self.losses.to_dict() if self.losses else None,
            "r2": self.r2,
            "ec": self.ec,
            "hyperparams": self.hyperparams,
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any], source: str = "<dict>") -> "SolverCheckpoint":
        if payload.get("format") != FORMAT:
            raise DataIOError("No es un checkpoint de SparseEB-gMCR", path=source)
        if payload.get("version") != VERSION:
            raise DataIOError(f"Versión de checkpoint no soportada: {payload.get('version')}", path=source)
        try:
            params = {name: _decode(value) for name, value in payload["parameters"].items()}
            scale = float(payload["input_scale"])
            gate = StaticGateParams(params["e_on"], params["e_off"], float(payload["static_temperature"]))
            state = SolverState(
                dictionary=ComponentDictionary(params["S"], gate, bool(payload.get("gated", True))),
                energy=EnergyPredictor(_network(params, "energy", scale), float(payload["temperature"])),
                concentration=ConcentrationPredictor(
                    _network(params, "concentration", scale), float(payload["output_scale"])
                ),
            )
            losses = payload.get("losses")
            return cls(
                iteration=int(payload["iteration"]),
                state=state,
                losses=LossBreakdown(**losses) if losses else None,
                r2=payload.get("r2"),
                ec=int(payload["ec"]),
                hyperparams=payload.get("hyperparams", {}),
                method=payload.get("method", "sparse-eb-gmcr"),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise DataIOError(f"Checkpoint incompleto o corrupto: {e}", path=source) from e


def _encode(value: np.ndarray) -> Dict[str, Any]:
    return {"shape": list(value.shape), "values": value.reshape(-1).tolist()}


def _decode(entry: Dict[str, Any]) -> np.ndarray:
    return np.asarray(entry["values"], dtype=np.float64).reshape(entry["shape"])


def _network(params: Dict[str, np.ndarray], prefix: str, scale: float) -> MLP:
    return MLP(
        w1=params[f"{prefix}.w1"],
        b1=params[f"{prefix}.b1"],
        w2=params[f"{prefix}.w2"],
        b2=params[f"{prefix}.b2"],
        input_scale=scale,
    )


def save_checkpoint(path: Union[str, Path], checkpoint: SolverCheckpoint):
    """Escritura atómica del checkpoint en JSON"""
    write_json(path, checkpoint.to_dict())


def load_checkpoint(path: Union[str, Path]) -> SolverCheckpoint:
    return SolverCheckpoint.from_dict(read_json(path), source=str(path))
