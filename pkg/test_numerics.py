# test_numerics.py
import numpy as np
import pytest

from src.numerics.functions import binary_entropy_from_logits, binary_entropy_grad, softplus
from src.numerics.gradcheck import finite_diff_grad, relative_error
from src.numerics.optim import Adam, AdamState, adam_step
from src.numerics.rng import Rng, gaussian
from src.utils.errors import ArgumentError, NumericError


def test_gaussian_std_zero_is_constant():
    """std = 0 -> todas las entradas iguales a la media"""
    values = gaussian(Rng(3), 2.5, 0.0, (4, 5))
    assert values.shape == (4, 5)
    assert np.all(values == 2.5)


def test_gaussian_negative_std_rejected():
    with pytest.raises(ArgumentError):
        gaussian(Rng(3), 0.0, -1.0, 3)


def test_gaussian_deterministic_per_seed():
    a = gaussian(Rng(11, 5), 0.0, 1.0, (3, 3))
    b = gaussian(Rng(11, 5), 0.0, 1.0, (3, 3))
    c = gaussian(Rng(11, 6), 0.0, 1.0, (3, 3))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_gaussian_moments():
    values = gaussian(Rng(0), 0.0, 1.0, 10 ** 6)
    assert abs(values.mean()) < 0.01
    assert abs(values.std() - 1.0) < 0.01


def test_derive_is_stable_and_distinct():
    root = Rng(42)
    assert root.derive("noise").stream_id == Rng(42).derive("noise").stream_id
    assert root.derive("noise").stream_id != root.derive("init").stream_id
    assert np.array_equal(root.derive("x").random(5), Rng(42).derive("x").random(5))


def test_rng_rejects_out_of_range_seed():
    with pytest.raises(ArgumentError):
        Rng(-1)
    with pytest.raises(ArgumentError):
        Rng(0, 2 ** 64)


def test_choice_without_replacement():
    picks = Rng(1).choice(10, 10)
    assert sorted(picks.tolist()) == list(range(10))


def test_adam_zero_gradient_keeps_param():
    param = np.array([[1.0, -2.0], [0.5, 3.0]])
    state = AdamState.zeros_like(param)
    updated = adam_step(param, np.zeros_like(param), state)
    assert np.array_equal(updated, param)
    assert state.step_count == 1


def test_adam_first_step_magnitude():
    """Primer paso con corrección de sesgo ~ lr·sign(g)"""
    param = np.array([1.0])
    state = AdamState.zeros_like(param, learning_rate=0.01)
    updated = adam_step(param, np.array([3.7]), state)
    assert updated[0] == pytest.approx(1.0 - 0.01, abs=1e-8)

    state = AdamState.zeros_like(param, learning_rate=0.01)
    updated = adam_step(param, np.array([-0.2]), state)
    assert updated[0] == pytest.approx(1.0 + 0.01, abs=1e-6)


def test_adam_minimizes_square():
    x = np.array([1.0])
    state = AdamState.zeros_like(x, learning_rate=0.1)
    for _ in range(100):
        x = adam_step(x, 2.0 * x, state)
    assert abs(x[0]) < 0.05
    assert state.step_count == 100


def test_adam_rejects_nonfinite_gradient():
    param = np.zeros(2)
    with pytest.raises(NumericError):
        adam_step(param, np.array([np.nan, 0.0]), AdamState.zeros_like(param))


def test_adam_optimizer_keeps_state_per_group():
    opt = Adam(learning_rate=0.1)
    params = {"a": np.ones(2), "b": np.ones((2, 2))}
    grads = {"a": np.ones(2), "b": np.zeros((2, 2))}
    updated = opt.step(params, grads)
    assert set(opt.states) == {"a", "b"}
    assert np.array_equal(updated["b"], params["b"])
    assert np.all(updated["a"] < 1.0)


def test_finite_diff_linear():
    x = np.arange(6.0).reshape(2, 3)
    grad = finite_diff_grad(lambda v: float(np.sum(v)), x)
    assert np.allclose(grad, 1.0)


def test_finite_diff_square():
    grad = finite_diff_grad(lambda v: float(v[0] ** 2), np.array([3.0]), h=1e-4)
    assert grad[0] == pytest.approx(6.0, abs=1e-6)


def test_finite_diff_requires_positive_step():
    with pytest.raises(ArgumentError):
        finite_diff_grad(lambda v: 0.0, np.zeros(1), h=0.0)


def test_relative_error():
    assert relative_error(np.ones(3), np.ones(3)) == 0.0
    assert relative_error(np.zeros(3), np.zeros(3)) == 0.0


def test_entropy_helpers():
    assert binary_entropy_from_logits(np.array(0.0)) == pytest.approx(np.log(2.0))
    assert softplus(np.array(0.0)) == pytest.approx(np.log(2.0))
    a = np.array([-2.0, 0.3, 4.0])
    numeric = finite_diff_grad(lambda v: float(np.sum(binary_entropy_from_logits(v))), a)
    assert np.allclose(binary_entropy_grad(a), numeric, atol=1e-7)
