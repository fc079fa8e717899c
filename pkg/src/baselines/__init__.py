# src/baselines/__init__.py
from src.baselines.nmf import FactorPair, nmf_fit, sparse_nmf_fit
from src.baselines.mcr_als import mcr_als_fit, solve_concentrations, solve_components
from src.baselines.matching import match_components, zero_leakage, zero_leakage_or_none

__all__ = ['FactorPair', 'nmf_fit', 'sparse_nmf_fit', 'mcr_als_fit', 'solve_concentrations',
           'solve_components', 'match_components', 'zero_leakage', 'zero_leakage_or_none']
