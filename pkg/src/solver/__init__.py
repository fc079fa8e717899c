# src/solver/__init__.py
from src.solver.static_gate import StaticGateParams, GateMask, soft_mask, apply_mask, gate_energy
from src.solver.dynamic_gate import (
    EnergyPredictor,
    SelectionGate,
    predict_energies,
    sample_gates,
    selection_energy,
    expected_cardinality,
)
from src.solver.model import (
    ComponentDictionary,
    ConcentrationPredictor,
    GeneratedBatch,
    SolverState,
    forward,
    predict_concentrations,
    prune,
)
from src.solver.objective import LossBreakdown, LossWeights, GateNoise, evaluate, loss, energy_balance
from src.solver.checkpoint import SolverCheckpoint, save_checkpoint, load_checkpoint
from src.solver.trainer import TrainResult, train, estimate_components

__all__ = [
    'StaticGateParams', 'GateMask', 'soft_mask', 'apply_mask', 'gate_energy',
    'EnergyPredictor', 'SelectionGate', 'predict_energies', 'sample_gates',
    'selection_energy', 'expected_cardinality',
    'ComponentDictionary', 'ConcentrationPredictor', 'GeneratedBatch', 'SolverState',
    'forward', 'predict_concentrations', 'prune',
    'LossBreakdown', 'LossWeights', 'GateNoise', 'evaluate', 'loss', 'energy_balance',
    'SolverCheckpoint', 'save_checkpoint', 'load_checkpoint',
    'TrainResult', 'train', 'estimate_components',
]
