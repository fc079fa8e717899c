# src/evaluation/__init__.py
from src.evaluation.metrics import EvalReport, r_squared, ec_curve, aggregate_replicates, r2_band, realized_snr_db

__all__ = ['EvalReport', 'r_squared', 'ec_curve', 'aggregate_replicates', 'r2_band', 'realized_snr_db']
