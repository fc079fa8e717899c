# test_decontam.py
import numpy as np
import pandas as pd
import pytest

from src.decontam.chromatogram import (
    Chromatogram,
    read_chromatogram_csv,
    read_manifest,
    write_chromatogram_csv,
    write_manifest,
)
from src.decontam.fixtures import make_contamination_fixture
from src.decontam.pipeline import (
    CleanResult,
    SolverSet,
    clean,
    fit_clean_process,
    pollution_channels_report,
    verify_set_uniqueness,
)
from src.decontam.windows import plan_windows, reassemble, window_split
from src.evaluation.metrics import r_squared
from src.numerics.rng import Rng
from src.utils.config import SolverSettings
from src.utils.errors import ArgumentError, DataIOError


def tiny_hp(**overrides) -> SolverSettings:
    values = dict(budget=4, hidden=8, max_iters=20, batch_size=16, checkpoint_interval=10, seed=1)
    values.update(overrides)
    return SolverSettings(**values)


def chromatogram(scans=30, channels=5, interval=1.0, seed=0, label="clean", name="c"):
    rng = Rng(seed)
    intensities = np.rint(rng.random((scans, channels)) * 100.0)
    return Chromatogram(np.arange(scans) * interval, np.arange(100, 100 + channels), intensities, label, name)


# --- Ventanas ---

def test_full_run_window_plan():
    rt = np.arange(3375) * (55 * 60 / 3375)
    plan = plan_windows(rt, 60.0)
    assert len(plan.windows) == 55
    assert sum(w.rows.stop - w.rows.start for w in plan.windows) == 3375
    for left, right in zip(plan.windows, plan.windows[1:]):
        assert left.end == right.start
        assert left.rows.stop == right.rows.start


def test_single_window_is_whole_matrix():
    chrom = chromatogram(scans=20)
    plan = plan_windows(chrom.rt_axis, 1000.0)
    batches = window_split(chrom, plan)
    assert len(batches) == 1
    assert np.array_equal(batches[0].X, chrom.intensities)


def test_reassembly_is_bit_identical():
    chrom = chromatogram(scans=200, interval=0.7)
    batches = window_split(chrom, plan_windows(chrom.rt_axis, 30.0))
    assert len(batches) == 5
    assert np.array_equal(reassemble(batches, chrom.n_scans, chrom.n_channels), chrom.intensities)


def test_empty_window_is_skipped():
    rt = np.array([0.0, 1.0, 2.0, 130.0, 131.0])
    chrom = Chromatogram(rt, [1, 2], np.ones((5, 2)))
    plan = plan_windows(rt, 60.0)
    assert len(plan.windows) == 3
    batches = window_split(chrom, plan)
    assert [b.window.index for b in batches] == [0, 2]


def test_plan_must_cover_axis():
    plan = plan_windows(np.arange(10.0), 60.0)
    with pytest.raises(ArgumentError):
        window_split(Chromatogram(np.arange(100.0), [1], np.ones((100, 1))), plan)


def test_plan_rejects_bad_length():
    with pytest.raises(ArgumentError):
        plan_windows(np.arange(3.0), 0.0)


def test_plan_serialization():
    plan = plan_windows(np.arange(0.0, 150.0, 0.5), 60.0)
    restored = type(plan).from_dict(plan.to_dict())
    assert restored == plan


# --- Cromatogramas ---

def test_chromatogram_validation():
    with pytest.raises(ArgumentError):
        Chromatogram([0.0, 0.0], [1], np.ones((2, 1)))
    with pytest.raises(ArgumentError):
        Chromatogram([0.0, 1.0], [1, 2], np.ones((2, 1)))
    with pytest.raises(ArgumentError):
        Chromatogram([0.0], [1], -np.ones((1, 1)))
    with pytest.raises(ArgumentError):
        Chromatogram([0.0], [1], np.ones((1, 1)), label="dirty")


def test_tic_is_row_sum():
    chrom = chromatogram()
    assert np.array_equal(chrom.tic, chrom.intensities.sum(axis=1))


def test_csv_round_trip(tmp_path):
    chrom = chromatogram(name="sample")
    write_chromatogram_csv(tmp_path / "sample.csv", chrom)
    loaded = read_chromatogram_csv(tmp_path / "sample.csv", label="clean")
    assert np.array_equal(loaded.intensities, chrom.intensities)
    assert np.array_equal(loaded.mz_axis, chrom.mz_axis)
    assert np.array_equal(loaded.rt_axis, chrom.rt_axis)
    assert loaded.name == "sample"


def test_csv_parse_error_reports_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("rt,207,281\n0.0,1,2\n1.0,x,3\n")
    with pytest.raises(DataIOError) as info:
        read_chromatogram_csv(path)
    assert info.value.line == 3
    assert "bad.csv" in str(info.value)


@pytest.mark.parametrize("header", ["rt,207,281,207", "rt,207,207.0"])
def test_csv_rejects_repeated_channels(tmp_path, header):
    path = tmp_path / "dup.csv"
    width = header.count(",")
    path.write_text(header + "\n" + "0.0" + ",1" * width + "\n")
    with pytest.raises(DataIOError) as info:
        read_chromatogram_csv(path)
    assert info.value.line == 1
    assert "207" in str(info.value)


def test_manifest_round_trip(tmp_path):
    chroms = [chromatogram(name="a"), chromatogram(seed=1, label="polluted", name="b")]
    manifest = write_manifest(tmp_path, chroms)
    loaded = read_manifest(manifest)
    assert [c.label for c in loaded] == ["clean", "polluted"]
    assert np.array_equal(loaded[1].intensities, chroms[1].intensities)


def test_manifest_rejects_unknown_label(tmp_path):
    (tmp_path / "m.json").write_text('{"files": [{"path": "a.csv", "label": "weird"}]}')
    with pytest.raises(DataIOError):
        read_manifest(tmp_path / "m.json")


# --- Limpieza ---

def fitted_solvers(workers=1):
    clean_set = [chromatogram(scans=60, seed=s, name=f"c{s}") for s in range(3)]
    plan = plan_windows(clean_set[0].rt_axis, 30.0)
    return fit_clean_process(clean_set, plan, tiny_hp(), rng=Rng(5), workers=workers)


def test_cleaned_plus_residual_is_exact():
    solvers = fitted_solvers()
    polluted = chromatogram(scans=60, seed=9, label="polluted")
    result = clean(polluted, solvers)
    assert np.array_equal(result.cleaned.intensities + result.residual, polluted.intensities)
    assert np.all(result.cleaned.intensities >= 0)
    assert np.array_equal(result.cleaned.intensities, np.rint(result.cleaned.intensities))
    assert len(result.per_window_r2) == 2


def test_zero_chromatogram_cleans_to_zero():
    solvers = fitted_solvers()
    zero = Chromatogram(np.arange(60.0), np.arange(100, 105), np.zeros((60, 5)), "polluted")
    result = clean(zero, solvers)
    assert np.all(result.cleaned.intensities == 0)
    assert np.all(result.residual == 0)


def test_window_fits_do_not_depend_on_workers():
    a = fitted_solvers(workers=1)
    b = fitted_solvers(workers=2)
    assert sorted(a.checkpoints) == sorted(b.checkpoints)
    for index in a.checkpoints:
        assert a.checkpoints[index].to_dict() == b.checkpoints[index].to_dict()


def test_silent_window_gets_trivial_solver():
    intensities = np.rint(Rng(1).random((60, 4)) * 50.0)
    intensities[30:] = 0.0
    chrom = Chromatogram(np.arange(60.0), [1, 2, 3, 4], intensities, "clean")
    solvers = fit_clean_process([chrom], plan_windows(chrom.rt_axis, 30.0), tiny_hp(), rng=Rng(2))
    assert solvers.checkpoints[1].ec == 0
    assert solvers.checkpoints[0].ec <= 4


def test_channel_mismatch_rejected():
    solvers = fitted_solvers()
    with pytest.raises(ArgumentError):
        clean(chromatogram(scans=60, channels=6), solvers)


def test_subtract_mode_requires_pollution_solvers():
    solvers = fitted_solvers()
    with pytest.raises(ArgumentError):
        clean(chromatogram(scans=60), solvers, mode="subtract")


def test_subtract_mode_keeps_exact_decomposition():
    solvers = fitted_solvers()
    polluted = chromatogram(scans=60, seed=4, label="polluted")
    result = clean(polluted, solvers, mode="subtract", pollution_solvers=solvers)
    assert np.array_equal(result.cleaned.intensities + result.residual, polluted.intensities)
    assert np.all(result.cleaned.intensities >= 0)


def test_solver_set_round_trip(tmp_path):
    solvers = fitted_solvers()
    solvers.save(tmp_path)
    loaded = SolverSet.load(tmp_path)
    polluted = chromatogram(scans=60, seed=3, label="polluted")
    assert np.array_equal(clean(polluted, loaded).cleaned.intensities,
                          clean(polluted, solvers).cleaned.intensities)


def test_channel_report_extremes():
    polluted = Chromatogram(np.arange(3.0), [207, 281, 300], np.full((3, 3), 10.0), "polluted")
    cleaned = polluted.intensities.copy()
    cleaned[:, 1] = 0.0
    result = CleanResult(polluted.with_intensities(cleaned, "clean"), polluted.intensities - cleaned,
                         pd.DataFrame())
    report = pollution_channels_report(result, [207, 281])
    assert report["reduction_pct"].tolist() == [0.0, 100.0]
    assert report["before"].tolist() == [30.0, 30.0]
    with pytest.raises(ArgumentError):
        pollution_channels_report(result, [999])


def test_set_uniqueness():
    assert verify_set_uniqueness(np.eye(3)[:2], np.eye(3)[2:]) is True
    assert verify_set_uniqueness(np.eye(3), 2.0 * np.eye(3)[:1]) is False
    assert verify_set_uniqueness(np.eye(3), None) is None


def test_fixture_channels_are_disjoint():
    fixture = make_contamination_fixture()
    assert {207, 281} <= set(fixture.pollution_channels)
    assert not set(fixture.pollution_channels) & set(fixture.clean_channels)
    mz = fixture.clean[0].mz_axis
    pollution_idx = np.isin(mz, fixture.pollution_channels)
    assert np.all(fixture.S_clean[:, pollution_idx] == 0)
    assert np.all(fixture.S_pollution[:, ~pollution_idx] == 0)
    assert verify_set_uniqueness(fixture.S_clean, fixture.S_pollution) is True
    assert [c.label for c in fixture.polluted] == ["polluted"] * 4


@pytest.mark.slow
def test_contamination_removal_end_to_end():
    fixture = make_contamination_fixture()
    plan = plan_windows(fixture.clean[0].rt_axis, 60.0)
    solvers = fit_clean_process(fixture.clean, plan, SolverSettings(budget=64, hidden=128, max_iters=20000),
                                rng=Rng(0))
    mz = fixture.clean[0].mz_axis
    clean_idx = np.isin(mz, fixture.clean_channels)
    for chrom, truth in zip(fixture.polluted, fixture.polluted_clean_part):
        result = clean(chrom, solvers)
        assert np.array_equal(result.cleaned.intensities + result.residual, chrom.intensities)
        report = pollution_channels_report(result, fixture.pollution_channels, chrom)
        assert (report["reduction_pct"] >= 90.0).all()
        assert r_squared(truth[:, clean_idx], result.cleaned.intensities[:, clean_idx]) >= 0.99
