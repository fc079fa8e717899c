# src/main.py
import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import ValidationError
from sqlalchemy.exc import SQLAlchemyError

from src import database
from src.baselines.matching import zero_leakage_or_none
from src.decontam.chromatogram import read_manifest, write_chromatogram_csv, write_manifest
from src.decontam.fixtures import make_contamination_fixture
from src.decontam.pipeline import (
    SolverSet,
    clean,
    fit_clean_process,
    pollution_channels_report,
    verify_set_uniqueness,
)
from src.decontam.windows import plan_windows
from src.evaluation.bench import run_bench
from src.evaluation.metrics import EvalReport, ec_curve, r_squared_or_none
from src.models import BenchRecord, CheckpointRecord
from src.numerics.rng import Rng
from src.solver.checkpoint import load_checkpoint, save_checkpoint
from src.solver.model import prune
from src.solver.trainer import TrainResult, train
from src.synth.bundle import SIDECAR, read_bundle, write_bundle
from src.synth.generator import GroundTruth, generate_dataset
from src.utils.config import RunConfig, Settings, settings
from src.utils.errors import ArgumentError, SparseMCRError, TrainingDivergedError
from src.utils.io import frame_to_csv, read_json, read_matrix_csv, write_json, write_matrix_csv
from src.utils.logger import logger

COMMANDS = ("synth", "fit", "eval", "bench", "clean", "report")

# Bandera -> (sección, campo)
SYNTH_FLAGS = {
    "n_true": ("synth", "n_true"),
    "d": ("synth", "d"),
    "sparsity": ("synth", "sparsity_ratio"),
    "multiple": ("synth", "dataset_multiple"),
    "seed": ("synth", "seed"),
}
SOLVER_FLAGS = {
    "budget": ("solver", "budget"),
    "hidden": ("solver", "hidden"),
    "iters": ("solver", "max_iters"),
    "batch_size": ("solver", "batch_size"),
    "lr": ("solver", "learning_rate"),
    "lambda_prime": ("solver", "lambda_prime"),
    "lambda_e": ("solver", "lambda_e"),
    "lambda_amb": ("solver", "lambda_amb"),
    "lambda_static": ("solver", "lambda_static"),
    "checkpoint_interval": ("solver", "checkpoint_interval"),
    "usage_threshold": ("solver", "usage_threshold"),
    "solver_seed": ("solver", "seed"),
}
BENCH_FLAGS = {
    "methods": ("bench", "methods"),
    "replicates": ("bench", "replicates"),
    "bench_n_true": ("bench", "n_true"),
    "multiples": ("bench", "multiples"),
    "bench_snr_db": ("bench", "snr_db"),
}
DECONTAM_FLAGS = {
    "window_length": ("decontam", "window_length"),
    "mode": ("decontam", "mode"),
    "channels": ("decontam", "report_channels"),
}


def build_parser() -> argparse.ArgumentParser:
    """Parser con un subcomando por flujo de trabajo"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Archivo JSON de configuración (las banderas tienen prioridad)")
    common.add_argument("--out", help="Directorio de salida (por defecto <output_root>/<comando>)")
    common.add_argument("--workers", type=int, help="Trabajadores para ventanas/réplicas")
    common.add_argument("--database", help="URL del registro de ejecuciones")
    common.add_argument("--no-register", action="store_true", help="No registrar la ejecución")
    common.add_argument("--no-progress", action="store_true", help="Ocultar barras de progreso")

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--budget", type=int, help="Componentes iniciales K")
    solver.add_argument("--hidden", type=int)
    solver.add_argument("--iters", type=int, help="Iteraciones máximas")
    solver.add_argument("--batch-size", type=int)
    solver.add_argument("--lr", type=float)
    solver.add_argument("--lambda-prime", type=float, help="λ′ explícito (por defecto max(1000, 2d))")
    solver.add_argument("--lambda-e", type=float)
    solver.add_argument("--lambda-amb", type=float)
    solver.add_argument("--lambda-static", type=float, help="Peso de las compuertas estáticas en C")
    solver.add_argument("--dense", action="store_true", help="EB-gMCR denso (sin compuerta estática)")
    solver.add_argument("--checkpoint-interval", type=int)
    solver.add_argument("--usage-threshold", type=float)
    solver.add_argument("--solver-seed", type=int)

    parser = argparse.ArgumentParser(prog="sparse-mcr", description=f"{settings.app_name} toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="Generar un dataset sintético")
    p.add_argument("--kind", choices=["dataset", "contamination"], default="dataset")
    p.add_argument("--n-true", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--sparsity", type=float)
    p.add_argument("--multiple", type=int)
    p.add_argument("--snr-db", help="SNR en dB o 'none' para datos sin ruido")
    p.add_argument("--seed", type=int)

    p = sub.add_parser("fit", parents=[common, solver], help="Entrenar el solver sobre un dataset")
    p.add_argument("--data", required=True, help="Directorio de dataset o CSV de mezclas")

    p = sub.add_parser("eval", parents=[common], help="Evaluar un checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True, help="Directorio de dataset o CSV de mezclas")

    p = sub.add_parser("bench", parents=[common, solver], help="Comparar métodos sobre réplicas")
    p.add_argument("--methods", nargs="+")
    p.add_argument("--replicates", type=int)
    p.add_argument("--n-true", dest="bench_n_true", type=int, nargs="+")
    p.add_argument("--multiples", type=int, nargs="+")
    p.add_argument("--snr-db", dest="bench_snr_db", type=float, nargs="+")
    p.add_argument("--seed", type=int, help="Semilla raíz del benchmark")

    p = sub.add_parser("clean", parents=[common, solver], help="Limpiar cromatogramas contaminados")
    p.add_argument("--manifest", required=True, help="Manifiesto JSON con cromatogramas etiquetados")
    p.add_argument("--solvers", help="Reutilizar solvers de ventana ya entrenados")
    p.add_argument("--pollution-solvers", help="Solvers del proceso de contaminación (modo subtract)")
    p.add_argument("--window-length", type=float, help="Longitud de ventana RT en segundos")
    p.add_argument("--mode", choices=["reconstruct", "subtract"])
    p.add_argument("--channels", type=int, nargs="+", help="Canales m/z a reportar")

    p = sub.add_parser("report", parents=[common], help="Listar ejecuciones registradas")
    p.add_argument("--limit", type=int, default=20)
    p.add_argument("--command-filter", choices=COMMANDS[:-1])
    return parser


def resolve_settings(args: argparse.Namespace) -> Settings:
    """Valores por defecto < entorno < --config < banderas"""
    cfg = settings.model_copy(deep=True)
    if args.config:
        cfg.apply(read_json(args.config))

    overrides: Dict[str, Dict[str, Any]] = {}
    flags = {**SOLVER_FLAGS, **BENCH_FLAGS, **DECONTAM_FLAGS}
    if args.command == "synth":
        flags.update(SYNTH_FLAGS)
    for flag, (section, field) in flags.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides.setdefault(section, {})[field] = value
    if args.command == "synth" and args.snr_db is not None:
        overrides.setdefault("synth", {})["snr_db"] = _parse_snr(args.snr_db)
    if getattr(args, "dense", False):
        overrides.setdefault("solver", {})["static_gate"] = False
    if args.command == "bench" and args.seed is not None:
        overrides["seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.no_progress:
        overrides.setdefault("output", {})["progress"] = False
    cfg.apply(overrides)

    # El trainer lee las preferencias de salida de la configuración global
    settings.output = cfg.output
    return cfg


def _parse_snr(value: str) -> Optional[float]:
    if value.strip().lower() == "none":
        return None
    try:
        return float(value)
    except ValueError as e:
        raise ArgumentError(f"--snr-db inválido: {value}") from e


def output_dir(args: argparse.Namespace, cfg: Settings) -> Path:
    return Path(args.out) if args.out else Path(cfg.output_root) / args.command


def write_run_config(out: Path, args: argparse.Namespace, cfg: Settings, sections: List[str]):
    """run_config.json junto a las salidas (sin marcas de tiempo)"""
    arguments = {k: v for k, v in vars(args).items() if k not in ("database", "no_register", "no_progress")}
    run = RunConfig(
        command=args.command,
        seed=cfg.seed,
        output_dir=str(out),
        sections={name: getattr(cfg, name).model_dump(mode="json") for name in sections},
        arguments=arguments,
    )
    write_json(out / "run_config.json", run.model_dump(mode="json"))


def load_dataset(path: str) -> Tuple[np.ndarray, Optional[GroundTruth]]:
    """Directorio con sidecar -> (X_noisy, verdad); CSV -> (X, None)"""
    source = Path(path)
    if source.is_dir():
        if not (source / SIDECAR).exists():
            raise ArgumentError(f"{source} no contiene {SIDECAR}")
        truth, _ = read_bundle(source)
        return truth.X_noisy, truth
    return read_matrix_csv(source), None


def write_residual_csv(path: Path, chrom, residual: np.ndarray):
    """Residuo (estimación de la contaminación) con el mismo formato que un cromatograma; admite negativos"""
    frame = pd.DataFrame(residual, columns=[str(m) for m in chrom.mz_axis])
    frame.insert(0, "rt", chrom.rt_axis)
    frame_to_csv(path, frame)


def report_channels(requested: List[int], chroms, strict: bool) -> List[int]:
    """Canales m/z presentes en todos los cromatogramas

    Con --channels explícito un canal ausente es un error; los de la configuración se omiten con aviso.
    """
    shared = set.intersection(*(set(c.mz_axis.tolist()) for c in chroms)) if chroms else set()
    unknown = [m for m in requested if m not in shared]
    if unknown and strict:
        raise ArgumentError(f"--channels fuera del eje m/z: {unknown}")
    if unknown:
        logger.warning(f"Canales de reporte ausentes del eje m/z, se omiten: {unknown}")
    return [m for m in requested if m in shared]


def reference_pollution(pollution: Optional[SolverSet], truth_dir: Path) -> Optional[np.ndarray]:
    """Diccionario de contaminación: solvers entrenados o, si existe, la verdad del fixture"""
    if pollution is not None:
        return np.vstack([ck.state.dictionary.hardened() for ck in pollution.checkpoints.values()])
    path = truth_dir / "S_pollution.csv"
    if path.exists():
        logger.info(f"Unicidad de conjuntos contra la verdad de referencia {path}")
        return read_matrix_csv(path)
    return None


def cmd_synth(args: argparse.Namespace, cfg: Settings, out: Path, run_id: Optional[int]) -> Dict[str, Any]:
    if args.kind == "contamination":
        fixture = make_contamination_fixture(seed=cfg.synth.seed, snr_db=cfg.synth.snr_db)
        write_manifest(out, fixture.clean + fixture.polluted)
        truth_dir = out / "truth"
        write_matrix_csv(truth_dir / "S_clean.csv", fixture.S_clean)
        write_matrix_csv(truth_dir / "S_pollution.csv", fixture.S_pollution)
        for chrom, part in zip(fixture.polluted, fixture.polluted_clean_part):
            write_chromatogram_csv(truth_dir / f"{chrom.name}_clean_part.csv", chrom.with_intensities(part))
        write_json(truth_dir / "fixture.json", {
            "pollution_channels": fixture.pollution_channels,
            "clean_channels": fixture.clean_channels,
            "seed": cfg.synth.seed,
        })
        logger.info(f"Fixture de contaminación: {len(fixture.clean)} limpios, {len(fixture.polluted)} contaminados")
        return {"clean": len(fixture.clean), "polluted": len(fixture.polluted)}

    truth = generate_dataset(cfg.synth)
    write_bundle(out, truth, cfg.synth)
    logger.info(f"Dataset: {truth.X_noisy.shape[0]} mezclas x {truth.X_noisy.shape[1]} canales en {out}")
    return {"n_samples": int(truth.X_noisy.shape[0]), "snr_realized_db": truth.snr_realized_db}


def cmd_fit(args: argparse.Namespace, cfg: Settings, out: Path, run_id: Optional[int]) -> Dict[str, Any]:
    X, truth = load_dataset(args.data)
    try:
        result = train(X, cfg.solver, label="fit")
    except TrainingDivergedError as e:
        # Las salidas se escriben con el último estado válido antes de salir con error
        write_fit_outputs(e.result, out, truth, run_id)
        raise
    return write_fit_outputs(result, out, truth, run_id)


def write_fit_outputs(result: TrainResult, out: Path, truth: Optional[GroundTruth],
                      run_id: Optional[int]) -> Dict[str, Any]:
    records = []
    for ckpt in result.checkpoints:
        path = out / "checkpoints" / f"ckpt_{ckpt.iteration:06d}.json"
        save_checkpoint(path, ckpt)
        records.append(CheckpointRecord(run_id=run_id or 0, path=str(path), iteration=ckpt.iteration,
                                        r2=ckpt.r2, ec=ckpt.ec, is_best=ckpt is result.best))
    save_checkpoint(out / "best.json", result.best)

    trace = pd.DataFrame([{"iteration": it, **losses.to_dict()} for it, losses in result.trace])
    frame_to_csv(out / "loss_trace.csv", trace)
    frame_to_csv(out / "ec_curve.csv", ec_curve(result.checkpoints, truth.n_true if truth else None))
    summary = {
        "best_iteration": result.best.iteration,
        "r2": result.best.r2,
        "ec": result.best.ec,
        "diverged": result.diverged,
        "trend_warnings": result.trend_warnings,
    }
    write_json(out / "fit_summary.json", summary)
    if run_id is not None:
        _register(run_id, records)
    return summary


def cmd_eval(args: argparse.Namespace, cfg: Settings, out: Path, run_id: Optional[int]) -> Dict[str, Any]:
    ckpt = load_checkpoint(args.checkpoint)
    X, truth = load_dataset(args.data)
    if X.shape[1] != ckpt.state.dimension:
        raise ArgumentError(f"El checkpoint espera d={ckpt.state.dimension}, el dataset tiene d={X.shape[1]}")

    threshold = ckpt.hyperparams.get("usage_threshold", cfg.solver.usage_threshold)
    X_g = ckpt.state.forward(X, train_mode=False).X_g
    pruned, keep = prune(ckpt.state, X, threshold)
    report = EvalReport(
        r2=r_squared_or_none(X, X_g),
        ec=pruned.budget,
        ec_true=truth.n_true if truth else None,
        zero_leakage=zero_leakage_or_none(pruned.dictionary.hardened(), truth.S_true) if truth else None,
        snr_realized_db=truth.snr_realized_db if truth else None,
        extra={
            "iteration": ckpt.iteration,
            "checkpoint_r2": ckpt.r2,
            "checkpoint_ec": ckpt.ec,
            "kept_components": np.flatnonzero(keep).tolist(),
        },
    )
    if truth is not None:
        report.extra["r2_clean"] = r_squared_or_none(truth.X_clean, X_g)
    write_json(out / "eval_report.json", report.to_dict())
    logger.info(f"Evaluación: R²={report.r2} EC={report.ec} (verdad: {report.ec_true})")
    return {"r2": report.r2, "ec": report.ec}


def cmd_bench(args: argparse.Namespace, cfg: Settings, out: Path, run_id: Optional[int]) -> Dict[str, Any]:
    tables = run_bench(cfg, workers=cfg.workers)
    frame_to_csv(out / "bench_runs.csv", tables["runs"])
    frame_to_csv(out / "bench_summary.csv", tables["summary"])
    frame_to_csv(out / "ec_curves.csv", tables["ec_curves"])
    if run_id is not None:
        rows = [
            BenchRecord(run_id=run_id, method=r["method"], n_true=int(r["n_true"]), multiple=int(r["multiple"]),
                        snr_db=r["snr_db"], replicate=int(r["replicate"]), ec=int(r["ec"]),
                        r2=None if pd.isna(r["r2"]) else float(r["r2"]), zero_leakage=None if pd.isna(r["zero_leakage"]) else float(r["zero_leakage"]))
            for r in tables["runs"].to_dict("records")
        ]
        _register(run_id, rows)
    return {"rows": len(tables["runs"])}


def cmd_clean(args: argparse.Namespace, cfg: Settings, out: Path, run_id: Optional[int]) -> Dict[str, Any]:
    chroms = read_manifest(args.manifest)
    clean_set = [c for c in chroms if c.label == "clean"]
    polluted_set = [c for c in chroms if c.label != "clean"]
    if not polluted_set:
        raise ArgumentError("El manifiesto no contiene cromatogramas a limpiar")

    dc = cfg.decontam
    channels = report_channels(dc.report_channels, chroms, strict=args.channels is not None)
    if args.solvers:
        solvers = SolverSet.load(args.solvers)
    else:
        if not clean_set:
            raise ArgumentError("Sin cromatogramas 'clean' no se pueden entrenar los solvers")
        rt_lo = min(c.rt_axis[0] for c in chroms)
        rt_hi = max(c.rt_axis[-1] for c in chroms)
        plan = plan_windows(np.array([rt_lo, rt_hi]), dc.window_length)
        rng = Rng(cfg.solver.seed).derive("clean")
        solvers = fit_clean_process(clean_set, plan, cfg.solver, rng=rng, workers=cfg.workers)
        solvers.save(out / "solvers")
    pollution = SolverSet.load(args.pollution_solvers) if args.pollution_solvers else None

    per_window, reports, tics = [], [], []
    for chrom in polluted_set:
        result = clean(chrom, solvers, mode=dc.mode, pollution_solvers=pollution, quantize=dc.quantize)
        write_chromatogram_csv(out / "cleaned" / f"{chrom.name}.csv", result.cleaned)
        write_residual_csv(out / "residual" / f"{chrom.name}.csv", chrom, result.residual)
        per_window.append(result.per_window.assign(name=chrom.name))
        reports.append(pollution_channels_report(result, channels, chrom).assign(name=chrom.name))
        tics.append(pd.DataFrame({"name": chrom.name, "rt": chrom.rt_axis,
                                  "tic_before": chrom.tic, "tic_after": result.cleaned.tic}))

    frame_to_csv(out / "per_window.csv", pd.concat(per_window, ignore_index=True))
    channel_report = pd.concat(reports, ignore_index=True)
    frame_to_csv(out / "channel_report.csv", channel_report)
    frame_to_csv(out / "tic.csv", pd.concat(tics, ignore_index=True))

    S_clean = np.vstack([ck.state.dictionary.hardened() for ck in solvers.checkpoints.values()])
    S_pollution = reference_pollution(pollution, Path(args.manifest).parent / "truth")
    summary = {
        "cleaned": [c.name for c in polluted_set],
        "mode": dc.mode,
        "windows": len(solvers.checkpoints),
        "set_uniqueness": verify_set_uniqueness(S_clean, S_pollution),
        "channel_reduction_pct": {
            str(mz): float(group["reduction_pct"].mean()) for mz, group in channel_report.groupby("mz")
        },
    }
    write_json(out / "clean_summary.json", summary)
    if run_id is not None and not args.solvers:
        records = [
            CheckpointRecord(run_id=run_id, path=str(out / "solvers" / f"window_{index:03d}.json"),
                             iteration=ck.iteration, r2=ck.r2, ec=ck.ec, is_best=True, window=index)
            for index, ck in sorted(solvers.checkpoints.items())
        ]
        _register(run_id, records)
    logger.info(f"Limpieza: {len(polluted_set)} cromatogramas, reducción por canal {summary['channel_reduction_pct']}")
    return summary


def cmd_report(args: argparse.Namespace, cfg: Settings, out: Path, run_id: Optional[int]) -> Dict[str, Any]:
    runs = database.list_runs(limit=args.limit, command=args.command_filter)
    frame = pd.DataFrame([
        {"id": r.id, "command": r.command, "status": r.status, "exit_code": r.exit_code,
         "seed": r.seed, "output_dir": r.output_dir, "started_at": r.started_at}
        for r in runs
    ])
    print(frame.to_string(index=False) if len(frame) else "Sin ejecuciones registradas")
    return {"runs": len(frame)}


HANDLERS = {
    "synth": (cmd_synth, ["synth"]),
    "fit": (cmd_fit, ["solver"]),
    "eval": (cmd_eval, ["solver"]),
    "bench": (cmd_bench, ["synth", "solver", "baseline", "bench"]),
    "clean": (cmd_clean, ["solver", "decontam"]),
    "report": (cmd_report, []),
}


def _register(run_id: int, rows):
    try:
        database.record(run_id, rows)
    except SQLAlchemyError as e:
        logger.warning(f"No se pudo escribir en el registro: {e}")


def _start_run(args: argparse.Namespace, cfg: Settings, out: Path) -> Optional[int]:
    if args.no_register or not cfg.output.register_runs or args.command == "report":
        return None
    try:
        database.create_db_and_tables()
        return database.start_run(args.command, str(out), cfg.seed)
    except SQLAlchemyError as e:
        logger.warning(f"Registro de ejecuciones no disponible: {e}")
        return None


def run(argv: Optional[List[str]] = None) -> int:
    """Ejecutar un comando y retornar su código de salida"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse sale con 2 en errores de uso y con 0 en --help
        return ArgumentError.exit_code if e.code else 0

    run_id = None
    try:
        cfg = resolve_settings(args)
        if args.database:
            database.use_database(args.database)
        elif args.command == "report":
            database.create_db_and_tables()
        out = output_dir(args, cfg)
        handler, sections = HANDLERS[args.command]
        run_id = _start_run(args, cfg, out)
        if args.command != "report":
            write_run_config(out, args, cfg, sections)
        logger.info(f"{settings.app_name} v{settings.app_version}: {args.command} -> {out}")
        summary = handler(args, cfg, out, run_id)
        logger.info(f"{args.command} completado: {summary}")
        code, message = 0, None
    except ValidationError as e:
        logger.error(f"Configuración inválida: {e}")
        code, message = ArgumentError.exit_code, str(e)
    except SparseMCRError as e:
        logger.error(f"{type(e).__name__}: {e}")
        code, message = e.exit_code, str(e)
    except Exception as e:
        logger.exception(f"Error inesperado: {e}")
        code, message = 1, str(e)

    if run_id is not None:
        try:
            database.finish_run(run_id, code, message)
        except SQLAlchemyError as e:
            logger.warning(f"No se pudo cerrar la ejecución {run_id}: {e}")
    return code


# Función principal
def main():
    """Punto de entrada del CLI"""
    sys.exit(run())


if __name__ == "__main__":
    main()
