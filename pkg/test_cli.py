# test_cli.py
import json

import numpy as np
import pandas as pd
import pytest

from src.decontam.chromatogram import read_chromatogram_csv, read_manifest
from src.decontam.fixtures import make_contamination_fixture
from src.main import run

SMALL_SOLVER = ["--budget", "4", "--hidden", "8", "--iters", "20", "--batch-size", "16",
                "--checkpoint-interval", "10", "--no-register", "--no-progress"]


def write_config(path, payload):
    path.write_text(json.dumps(payload))
    return str(path)


def small_dataset(tmp_path, name="data"):
    config = write_config(tmp_path / f"{name}.json", {"synth": {"active_per_sample": [1, 3]}})
    out = tmp_path / name
    code = run(["synth", "--config", config, "--n-true", "4", "--d", "32", "--sparsity", "0.8",
                "--multiple", "4", "--out", str(out), "--no-register"])
    assert code == 0
    return out


def test_synth_reference_configuration(tmp_path):
    out = tmp_path / "bundle"
    code = run(["synth", "--n-true", "16", "--d", "256", "--sparsity", "0.95", "--multiple", "8",
                "--snr-db", "30", "--seed", "1", "--out", str(out), "--no-register"])
    assert code == 0
    X = pd.read_csv(out / "X_noisy.csv")
    assert X.shape == (128, 256)
    sidecar = json.loads((out / "dataset.json").read_text())
    assert sidecar["config"]["snr_db"] == 30.0
    run_config = json.loads((out / "run_config.json").read_text())
    assert run_config["command"] == "synth"
    assert run_config["sections"]["synth"]["n_true"] == 16


def test_synth_rerun_is_bit_identical(tmp_path):
    args = ["synth", "--n-true", "8", "--d", "64", "--sparsity", "0.9", "--multiple", "4", "--seed", "3",
            "--no-register"]
    assert run(args + ["--out", str(tmp_path / "a")]) == 0
    assert run(args + ["--out", str(tmp_path / "b")]) == 0
    for name in ("X_noisy.csv", "X_clean.csv", "S_true.csv", "C_true.csv", "delta_true.csv", "dataset.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_synth_smaller_noisier(tmp_path):
    out = tmp_path / "b"
    assert run(["synth", "--multiple", "4", "--snr-db", "20", "--out", str(out), "--no-register"]) == 0
    assert len(pd.read_csv(out / "X_noisy.csv")) == 64
    assert json.loads((out / "dataset.json").read_text())["config"]["snr_db"] == 20.0


def test_synth_without_noise(tmp_path):
    out = tmp_path / "clean"
    assert run(["synth", "--multiple", "4", "--snr-db", "none", "--out", str(out), "--no-register"]) == 0
    assert np.array_equal(pd.read_csv(out / "X_noisy.csv").to_numpy(),
                          np.rint(pd.read_csv(out / "X_clean.csv").to_numpy()))


def test_invalid_arguments_exit_code(tmp_path):
    assert run(["synth", "--sparsity", "1.5", "--out", str(tmp_path), "--no-register"]) == 2
    assert run(["synth", "--snr-db", "loud", "--out", str(tmp_path), "--no-register"]) == 2
    assert run(["unknown-command"]) == 2


def test_missing_input_exit_code(tmp_path):
    code = run(["fit", "--data", str(tmp_path / "missing.csv"), "--out", str(tmp_path / "fit")] + SMALL_SOLVER)
    assert code == 3


def test_fit_then_eval_reproduces_r2(tmp_path):
    data = small_dataset(tmp_path)
    fit_dir = tmp_path / "fit"
    assert run(["fit", "--data", str(data), "--out", str(fit_dir)] + SMALL_SOLVER) == 0
    summary = json.loads((fit_dir / "fit_summary.json").read_text())
    assert sorted(p.name for p in (fit_dir / "checkpoints").iterdir()) == ["ckpt_000010.json", "ckpt_000020.json"]
    assert len(pd.read_csv(fit_dir / "ec_curve.csv")) == 2

    eval_dir = tmp_path / "eval"
    code = run(["eval", "--checkpoint", str(fit_dir / "best.json"), "--data", str(data),
                "--out", str(eval_dir), "--no-register"])
    assert code == 0
    report = json.loads((eval_dir / "eval_report.json").read_text())
    assert report["r2"] == summary["r2"]
    assert report["ec"] == summary["ec"]
    assert report["ec_true"] == 4
    # sin componentes emparejados la fuga no está definida
    assert report["zero_leakage"] is None or report["zero_leakage"] >= 0.0


def test_fit_is_deterministic(tmp_path):
    data = small_dataset(tmp_path)
    for name in ("a", "b"):
        assert run(["fit", "--data", str(data), "--out", str(tmp_path / name)] + SMALL_SOLVER) == 0
    for name in ("loss_trace.csv", "ec_curve.csv", "best.json", "checkpoints/ckpt_000010.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_flags_override_config_file(tmp_path):
    data = small_dataset(tmp_path)
    config = write_config(tmp_path / "solver.json", {"solver": {"budget": 6, "lambda_e": 0.5}})
    out = tmp_path / "fit"
    assert run(["fit", "--config", config, "--data", str(data), "--out", str(out)] + SMALL_SOLVER) == 0
    solver = json.loads((out / "run_config.json").read_text())["sections"]["solver"]
    assert solver["budget"] == 4
    assert solver["lambda_e"] == 0.5


def test_eval_dimension_mismatch(tmp_path):
    data = small_dataset(tmp_path)
    fit_dir = tmp_path / "fit"
    assert run(["fit", "--data", str(data), "--out", str(fit_dir)] + SMALL_SOLVER) == 0
    other = tmp_path / "other.csv"
    pd.DataFrame(np.ones((3, 5))).to_csv(other, index=False)
    code = run(["eval", "--checkpoint", str(fit_dir / "best.json"), "--data", str(other),
                "--out", str(tmp_path / "e"), "--no-register"])
    assert code == 2


def test_bench_writes_tables(tmp_path):
    config = write_config(tmp_path / "bench.json", {
        "synth": {"d": 24, "sparsity_ratio": 0.75, "active_per_sample": [1, 2]},
        "baseline": {"nmf_iters": 50, "mcr_als_iters": 5},
    })
    out = tmp_path / "bench"
    code = run(["bench", "--config", config, "--methods", "sparse-eb-gmcr", "eb-gmcr", "nmf", "mcr-als",
                "--replicates", "2", "--n-true", "2", "--multiples", "4", "--snr-db", "30",
                "--out", str(out)] + SMALL_SOLVER)
    assert code == 0
    summary = pd.read_csv(out / "bench_summary.csv")
    assert {"ec_mean", "ec_sd", "r2_mean", "r2_sd"} <= set(summary.columns)
    runs = pd.read_csv(out / "bench_runs.csv")
    assert len(runs) == 8
    assert set(runs["method"]) == {"sparse-eb-gmcr", "eb-gmcr", "nmf", "mcr-als"}
    curves = pd.read_csv(out / "ec_curves.csv")
    assert len(curves) == 4
    assert sorted(curves["method"].unique()) == ["eb-gmcr", "sparse-eb-gmcr"]


def test_clean_on_contamination_fixture(tmp_path):
    fixture_dir = tmp_path / "fixture"
    assert run(["synth", "--kind", "contamination", "--out", str(fixture_dir), "--no-register"]) == 0
    out = tmp_path / "cleaned"
    code = run(["clean", "--manifest", str(fixture_dir / "manifest.json"), "--out", str(out)] + SMALL_SOLVER)
    assert code == 0

    report = pd.read_csv(out / "channel_report.csv")
    assert set(report["mz"]) == {207, 281}
    assert json.loads((out / "clean_summary.json").read_text())["set_uniqueness"] is True
    assert (out / "solvers" / "solvers.json").exists()
    assert len(pd.read_csv(out / "tic.csv")) == 4 * 120
    polluted = [c for c in read_manifest(fixture_dir / "manifest.json") if c.label == "polluted"]
    for chrom in polluted:
        cleaned = read_chromatogram_csv(out / "cleaned" / f"{chrom.name}.csv")
        residual = pd.read_csv(out / "residual" / f"{chrom.name}.csv").to_numpy()[:, 1:]
        assert np.array_equal(cleaned.intensities + residual, chrom.intensities)


def test_clean_reuses_saved_solvers(tmp_path):
    fixture_dir = tmp_path / "fixture"
    assert run(["synth", "--kind", "contamination", "--out", str(fixture_dir), "--no-register"]) == 0
    first = tmp_path / "first"
    manifest = str(fixture_dir / "manifest.json")
    assert run(["clean", "--manifest", manifest, "--out", str(first)] + SMALL_SOLVER) == 0
    second = tmp_path / "second"
    code = run(["clean", "--manifest", manifest, "--solvers", str(first / "solvers"),
                "--out", str(second), "--no-register"])
    assert code == 0
    assert (first / "channel_report.csv").read_bytes() == (second / "channel_report.csv").read_bytes()


def test_runs_are_registered(tmp_path, capsys):
    database = f"sqlite:///{tmp_path / 'runs.db'}"
    out = tmp_path / "bundle"
    assert run(["synth", "--multiple", "4", "--out", str(out), "--database", database, "--no-progress"]) == 0
    assert run(["fit", "--data", str(tmp_path / "missing.csv"), "--out", str(tmp_path / "fit"),
                "--database", database, "--no-progress"]) == 3
    capsys.readouterr()
    assert run(["report", "--database", database]) == 0
    printed = capsys.readouterr().out
    assert "synth" in printed
    assert "completed" in printed
    assert "failed" in printed


@pytest.mark.slow
def test_clean_reaches_ninety_percent_reduction(tmp_path):
    fixture_dir = tmp_path / "fixture"
    assert run(["synth", "--kind", "contamination", "--out", str(fixture_dir), "--no-register"]) == 0
    out = tmp_path / "cleaned"
    assert run(["clean", "--manifest", str(fixture_dir / "manifest.json"), "--out", str(out),
                "--budget", "64", "--hidden", "128", "--iters", "20000", "--no-register"]) == 0
    report = pd.read_csv(out / "channel_report.csv")
    assert (report["reduction_pct"] >= 90.0).all()


def test_fit_divergence_exits_numeric_and_keeps_outputs(tmp_path):
    data = small_dataset(tmp_path)
    out = tmp_path / "fit"
    code = run(["fit", "--data", str(data), "--out", str(out), "--lr", "1e200"] + SMALL_SOLVER)
    assert code == 4
    summary = json.loads((out / "fit_summary.json").read_text())
    assert summary["diverged"] is True
    assert summary["best_iteration"] < 20
    assert (out / "best.json").exists()


def test_fit_dense_variant_marks_checkpoints(tmp_path):
    data = small_dataset(tmp_path)
    out = tmp_path / "fit"
    assert run(["fit", "--data", str(data), "--out", str(out), "--dense"] + SMALL_SOLVER) == 0
    best = json.loads((out / "best.json").read_text())
    assert best["method"] == "eb-gmcr"
    assert best["gated"] is False


@pytest.mark.parametrize("snr", [None, 0.0])
def test_contamination_fixture_keeps_requested_snr(tmp_path, snr):
    out = tmp_path / "fixture"
    flag = "none" if snr is None else "0"
    assert run(["synth", "--kind", "contamination", "--snr-db", flag, "--seed", "7",
                "--out", str(out), "--no-register"]) == 0
    expected = make_contamination_fixture(seed=7, snr_db=snr)
    written = {c.name: c for c in read_manifest(out / "manifest.json")}
    for chrom in expected.clean + expected.polluted:
        assert np.array_equal(written[chrom.name].intensities, chrom.intensities)


def test_clean_rejects_unknown_channels(tmp_path):
    fixture_dir = tmp_path / "fixture"
    assert run(["synth", "--kind", "contamination", "--out", str(fixture_dir), "--no-register"]) == 0
    code = run(["clean", "--manifest", str(fixture_dir / "manifest.json"), "--channels", "207", "999",
                "--out", str(tmp_path / "cleaned")] + SMALL_SOLVER)
    assert code == 2
    assert not (tmp_path / "cleaned" / "solvers").exists()
