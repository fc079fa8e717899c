# src/numerics/__init__.py
from src.numerics.rng import Rng, gaussian
from src.numerics.optim import Adam, AdamState, adam_step
from src.numerics.gradcheck import finite_diff_grad, relative_error

__all__ = ['Rng', 'gaussian', 'Adam', 'AdamState', 'adam_step', 'finite_diff_grad', 'relative_error']
