import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from freqformer.spectral import SpectralPlan, dct_matrix, forward, inverse
from freqformer.exceptions import ShapeError


def test_dct_small_sizes():
    assert dct_matrix(1).tolist() == [[1.0]]
    r = math.sqrt(0.5)
    assert np.abs(dct_matrix(2) - [[r, r], [r, -r]]).max() <= 1e-6
    with pytest.raises(ValueError):
        dct_matrix(0)


def test_dct_entries_closed_form():
    n = 5
    f = dct_matrix(n)
    for k in range(n):
        c = math.sqrt(1 / n) if k == 0 else math.sqrt(2 / n)
        for i in range(n):
            assert f[k, i] == pytest.approx(c * math.cos(math.pi * (2 * i + 1) * k / (2 * n)), abs=1e-15)


@pytest.mark.parametrize("n", [2, 3, 8, 16, 31])
def test_dct_orthonormal(n):
    f = dct_matrix(n)
    assert np.abs(f.T @ f - np.eye(n)).max() <= 1e-12


def test_constant_tensor_is_dc_only():
    plan = SpectralPlan.build(3, 4, 5)
    y = forward(plan, np.full((3, 4, 5, 1), 2.5))
    assert y[0, 0, 0, 0] == pytest.approx(2.5 * math.sqrt(60), abs=1e-9)
    y[0, 0, 0, 0] = 0
    assert np.abs(y).max() <= 1e-9


def test_inverse_of_dc_is_constant():
    plan = SpectralPlan.build(2, 3, 4)
    y = np.zeros((2, 3, 4, 1))
    y[0, 0, 0, 0] = math.sqrt(24)
    assert np.abs(inverse(plan, y) - 1.0).max() <= 1e-12


def test_zero_maps_to_zero():
    plan = SpectralPlan.build(2, 2, 2)
    assert not forward(plan, np.zeros((2, 2, 2, 3))).any()
    assert not inverse(plan, np.zeros((2, 2, 2, 3))).any()


def test_parseval_and_round_trip(rng):
    plan = SpectralPlan.build(4, 4, 4)
    x = rng.normal(size=(4, 4, 4, 2))
    y = forward(plan, x)
    assert abs(np.linalg.norm(y) - np.linalg.norm(x)) <= 1e-10 * np.linalg.norm(x)
    x3 = rng.normal(size=(4, 4, 4, 3))
    assert np.abs(inverse(plan, forward(plan, x3)) - x3).max() <= 1e-8


def test_channels_are_not_mixed(rng):
    plan = SpectralPlan.build(3, 3, 3)
    x = rng.normal(size=(3, 3, 3, 4))
    y = forward(plan, x)
    for c in range(4):
        assert np.abs(forward(plan, x[..., c:c + 1])[..., 0] - y[..., c]).max() <= 1e-14


def test_shape_mismatch():
    with pytest.raises(ShapeError):
        forward(SpectralPlan.build(2, 2, 2), np.zeros((2, 2, 3, 1)))


@settings(max_examples=40, deadline=None)
@given(st.tuples(st.integers(1, 6), st.integers(1, 6), st.integers(1, 6)),
       st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2 ** 32 - 1))
def test_linearity_parseval_round_trip(shape, a, b, seed):
    rng = np.random.default_rng(seed)
    plan = SpectralPlan.build(*shape)
    x, y = rng.normal(size=(2,) + shape + (2,))
    lhs = forward(plan, a * x + b * y)
    assert np.abs(lhs - (a * forward(plan, x) + b * forward(plan, y))).max() <= 1e-9
    assert abs(np.linalg.norm(forward(plan, x)) - np.linalg.norm(x)) <= 1e-10 * np.linalg.norm(x)
    assert np.abs(inverse(plan, forward(plan, x)) - x).max() <= 1e-8
    assert plan.orthonormality_error() <= 1e-10
