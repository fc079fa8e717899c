# src/solver/trainer.py
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from src.evaluation.metrics import r_squared_or_none
from src.numerics.functions import as_matrix
from src.numerics.optim import Adam
from src.numerics.rng import Rng
from src.solver.checkpoint import SolverCheckpoint
from src.solver.model import SolverState, prune
from src.solver.objective import GateNoise, LossBreakdown, LossWeights, energy_balance, evaluate
from src.utils.config import SolverSettings, settings
from src.utils.errors import ArgumentError, NumericError, TrainingDivergedError
from src.utils.logger import logger


@dataclass
class TrainResult:
    checkpoints: List[SolverCheckpoint]
    best_index: int
    trace: List[Tuple[int, LossBreakdown]] = field(default_factory=list)
    totals: List[float] = field(default_factory=list)
    trend_warnings: int = 0
    diverged: bool = False

    @property
    def best(self) -> SolverCheckpoint:
        return self.checkpoints[self.best_index]


def data_scale(X: np.ndarray) -> float:
    """Norma media de las filas (1.0 si los datos son nulos)"""
    if X.size == 0:
        return 1.0
    scale = float(np.mean(np.linalg.norm(X, axis=1)))
    return scale if scale > 0 else 1.0


def select_best(checkpoints: List[SolverCheckpoint]) -> int:
    """Mayor R²; a igualdad, menor EC"""
    def key(i: int):
        r2 = checkpoints[i].r2
        return (r2 if r2 is not None else -np.inf, -checkpoints[i].ec)
    return max(range(len(checkpoints)), key=key)


def estimate_components(checkpoint: SolverCheckpoint, dataset: np.ndarray, threshold: float = 0.05) -> int:
    """EC = componentes retenidos por la poda sobre todo el dataset"""
    pruned, _ = prune(checkpoint.state, dataset, threshold)
    return pruned.budget


def evaluate_state(state: SolverState, X: np.ndarray, threshold: float) -> Tuple[Optional[float], int]:
    """Pasada de métricas: R² de la reconstrucción endurecida y EC"""
    X_g = state.forward(X, train_mode=False).X_g
    pruned, _ = prune(state, X, threshold)
    if not np.all(np.isfinite(X_g)):
        return None, pruned.budget
    return r_squared_or_none(X, X_g), pruned.budget


def smoothed_increase(totals: List[float], window: int) -> bool:
    """True si la media móvil de la última ventana supera a la anterior"""
    if window <= 0 or len(totals) < 2 * window:
        return False
    recent = np.mean(totals[-window:])
    previous = np.mean(totals[-2 * window:-window])
    return bool(recent > previous)


def trivial_checkpoint(d: int, hp: SolverSettings) -> SolverCheckpoint:
    """Solver sin componentes para ventanas sin señal"""
    state = SolverState.initialize(d, 0, hp.hidden, Rng(hp.seed).derive("trivial"))
    return SolverCheckpoint(0, state, None, None, 0, hyperparams=hp.model_dump(mode="json"))


def train(dataset: np.ndarray, hp: SolverSettings, rng: Optional[Rng] = None,
          label: str = "solver") -> TrainResult:
    """Descenso por minilotes sobre la energía total con recocido de temperatura"""
    X = as_matrix(dataset, "dataset")
    n, d = X.shape
    if n == 0:
        raise ArgumentError("El dataset está vacío")
    if hp.max_iters < 1 or hp.batch_size < 1:
        raise ArgumentError("max_iters y batch_size deben ser >= 1")
    rng = rng or Rng(hp.seed)

    weights = LossWeights.from_settings(hp, d)
    state = SolverState.initialize(d, hp.budget, hp.hidden, rng.derive("init"), data_scale(X),
                                   gated=hp.static_gate)
    optimizer = Adam(hp.learning_rate, hp.beta1, hp.beta2, hp.epsilon)
    batch_rng = rng.derive("batches")
    noise_rng = rng.derive("noise")
    hyperparams = hp.model_dump(mode="json")
    method = "sparse-eb-gmcr" if hp.static_gate else "eb-gmcr"

    result = TrainResult(checkpoints=[], best_index=0)
    logger.info(
        f"[{label}] Entrenando: n={n}, d={d}, K={hp.budget}, iters={hp.max_iters}, "
        f"λ′={weights.lambda_prime:g}, λ_e={weights.lambda_e:g}, λ_amb={weights.lambda_amb:g}"
    )

    def snapshot(iteration: int, losses: Optional[LossBreakdown]) -> SolverCheckpoint:
        r2, ec = evaluate_state(state, X, hp.usage_threshold)
        ckpt = SolverCheckpoint(iteration, state.copy(), losses, r2, ec, hyperparams=hyperparams, method=method)
        result.checkpoints.append(ckpt)
        logger.info(f"[{label}] checkpoint it={iteration} R²={r2 if r2 is None else round(r2, 6)} EC={ec}")
        return ckpt

    failure: Optional[NumericError] = None
    progress = tqdm(range(1, hp.max_iters + 1), desc=label, disable=not settings.output.progress, leave=False)
    for iteration in progress:
        state.set_temperature(hp.tau_at(iteration - 1))
        if n <= hp.batch_size:
            batch = X
        else:
            batch = X[np.sort(batch_rng.choice(n, hp.batch_size))]
        noise = GateNoise.draw(noise_rng, batch.shape[0], state.budget, d)

        try:
            losses, grads = evaluate(batch, state, weights, noise)
            updated = optimizer.step(state.params(), grads)
            state.set_params(updated)
        except NumericError as e:
            logger.error(f"[{label}] Divergencia en it={iteration}: {e}; se conserva el último estado válido")
            snapshot(iteration - 1, result.trace[-1][1] if result.trace else None)
            result.diverged = True
            failure = e
            break
        state.dictionary.project()

        if iteration == 1:
            logger.info(f"[{label}] Balance energía estática / uso al inicio: {energy_balance(losses):.4g}")
        result.totals.append(losses.total)
        if iteration % hp.log_interval == 0 or iteration == 1:
            result.trace.append((iteration, losses))
            logger.debug(
                f"[{label}] it={iteration} τ={state.energy.temperature:.4f} total={losses.total:.6g} "
                f"recon={losses.recon:.6g} usage={losses.usage:.6g}"
            )

        if iteration % hp.checkpoint_interval == 0 or iteration == hp.max_iters:
            if smoothed_increase(result.totals, hp.trend_window):
                result.trend_warnings += 1
                logger.warning(f"[{label}] La energía total suavizada aumentó antes de it={iteration}")
            snapshot(iteration, losses)

    if not result.checkpoints:
        snapshot(0, None)
    result.best_index = select_best(result.checkpoints)
    best = result.best
    logger.info(f"[{label}] Mejor checkpoint: it={best.iteration} R²={best.r2} EC={best.ec}")
    if failure is not None:
        raise TrainingDivergedError(
            f"Entrenamiento divergente: {failure}", term=failure.term, last_good=best, result=result
        ) from failure
    return result
