# src/decontam/__init__.py
from src.decontam.chromatogram import (
    Chromatogram,
    read_chromatogram_csv,
    write_chromatogram_csv,
    read_manifest,
    write_manifest,
)
from src.decontam.windows import Window, WindowPlan, MixtureBatch, plan_windows, window_split, reassemble
from src.decontam.pipeline import (
    SolverSet,
    CleanResult,
    fit_clean_process,
    clean,
    pollution_channels_report,
    verify_set_uniqueness,
)
from src.decontam.fixtures import ContaminationFixture, make_contamination_fixture

__all__ = [
    'Chromatogram', 'read_chromatogram_csv', 'write_chromatogram_csv', 'read_manifest', 'write_manifest',
    'Window', 'WindowPlan', 'MixtureBatch', 'plan_windows', 'window_split', 'reassemble',
    'SolverSet', 'CleanResult', 'fit_clean_process', 'clean', 'pollution_channels_report',
    'verify_set_uniqueness', 'ContaminationFixture', 'make_contamination_fixture',
]
