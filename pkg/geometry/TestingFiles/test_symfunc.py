"""
Tests for the curvature quotient functions.
"""
import itertools
import math

import numpy as np
import pytest
from pydantic import ValidationError

from geometry.schemas import CurvatureFunctionSpec
from geometry.symfunc import (
    asymptotic_excess,
    asymptotic_limit,
    cone_contains,
    cone_face_value,
    elementary_symmetric_normalized,
    eval_f,
    excess_surrogate,
    f_and_grad,
    grad_f,
)
from utils.errors import ArgumentError, ConeDomainError


def _subset_elementary(lam, k):
    """e_k by enumerating subsets."""
    total = sum(math.prod(combo) for combo in itertools.combinations(lam, k))
    return total / math.comb(len(lam), k)


def test_elementary_matches_subset_enumeration(rng):
    """The product expansion agrees with the subset sum for every order."""
    for n in range(2, 6):
        lam = rng.uniform(0.1, 3.0, size=n)
        for k in range(0, n + 1):
            assert elementary_symmetric_normalized(lam, k) == pytest.approx(_subset_elementary(lam, k), rel=1e-12)


def test_elementary_known_value():
    assert elementary_symmetric_normalized([1.0, 2.0, 3.0], 2) == pytest.approx(11.0 / 3.0)
    assert elementary_symmetric_normalized(np.ones(4), 3) == pytest.approx(1.0)


def test_elementary_rejects_order_out_of_range():
    with pytest.raises(ArgumentError):
        elementary_symmetric_normalized([1.0, 2.0], 3)


def test_planar_quotients_closed_forms(mean_spec, gauss_spec, quotient_spec):
    a, b = 0.7, 2.3
    assert eval_f(mean_spec, [a, b]) == pytest.approx(0.5 * (a + b))
    assert eval_f(gauss_spec, [a, b]) == pytest.approx(math.sqrt(a * b))
    assert eval_f(quotient_spec, [a, b]) == pytest.approx(2.0 * a * b / (a + b))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_normalization_and_homogeneity(n, rng):
    """f(1, ..., 1) = 1 and f(t lam) = t f(lam)."""
    lam = rng.uniform(0.2, 4.0, size=n)
    for k in range(1, n + 1):
        for l in range(0, k):
            spec = CurvatureFunctionSpec(n=n, k=k, l=l)
            assert eval_f(spec, np.ones(n)) == pytest.approx(1.0, abs=1e-14)
            assert eval_f(spec, 2.5 * lam) == pytest.approx(2.5 * eval_f(spec, lam), rel=1e-12)


def test_gradient_matches_finite_differences(rng):
    spec = CurvatureFunctionSpec(n=4, k=3, l=1)
    lam = rng.uniform(0.3, 2.0, size=4)
    grad = grad_f(spec, lam)
    step = 1e-6
    for i in range(4):
        bump = np.zeros(4)
        bump[i] = step
        fd = (eval_f(spec, lam + bump) - eval_f(spec, lam - bump)) / (2.0 * step)
        assert grad[i] == pytest.approx(fd, rel=1e-7)


def test_batched_evaluation_matches_single(rng, quotient_spec):
    stack = rng.uniform(0.1, 3.0, size=(7, 2))
    values, grads = f_and_grad(quotient_spec, stack)
    assert values.shape == (7,)
    assert grads.shape == (7, 2)
    for row, value in zip(stack, values):
        assert eval_f(quotient_spec, row) == pytest.approx(value)


def test_cone_membership():
    assert cone_contains([0.1, 2.0]) is True
    assert cone_contains([0.0, 2.0]) is False
    assert cone_contains(np.array([[1.0, 1.0], [-1.0, 1.0]])).tolist() == [True, False]


def test_eval_outside_cone_reports_eigenvalues(mean_spec):
    with pytest.raises(ConeDomainError) as excinfo:
        eval_f(mean_spec, [1.0, -0.5])
    assert excinfo.value.eigenvalues == [1.0, -0.5]
    assert excinfo.value.exit_code == 1


def test_length_mismatch_is_rejected(mean_spec):
    with pytest.raises(ArgumentError):
        eval_f(mean_spec, [1.0, 2.0, 3.0])


def test_asymptotic_excess_increases_to_limit():
    spec = CurvatureFunctionSpec(n=2, k=2, l=1)
    values = [asymptotic_excess(spec, R) for R in (0.0, 0.5, 5.0, 500.0, 5e6)]
    assert values[0] == pytest.approx(1.0)
    assert all(b >= a for a, b in zip(values, values[1:]))
    assert asymptotic_limit(spec) == pytest.approx(2.0)
    assert values[-1] == pytest.approx(2.0, rel=1e-5)
    assert excess_surrogate(spec) == pytest.approx(1.0)


def test_asymptotic_limit_unbounded_without_denominator(gauss_spec):
    assert math.isinf(asymptotic_limit(gauss_spec))
    with pytest.raises(ArgumentError):
        asymptotic_excess(gauss_spec, -1.0)


@pytest.mark.parametrize("n,k,l,expected", [
    (2, 1, 0, 0.5),
    (3, 1, 0, 2.0 / 3.0),
    (2, 2, 0, 0.0),
    (2, 2, 1, 0.0),
    (3, 2, 1, 0.5),
])
def test_cone_face_value(n, k, l, expected):
    spec = CurvatureFunctionSpec(n=n, k=k, l=l)
    assert cone_face_value(spec) == pytest.approx(expected, abs=1e-15)
    near_face = np.ones(n)
    near_face[0] = 1e-9
    assert eval_f(spec, near_face) == pytest.approx(expected, abs=1e-4)


def test_spec_validation_and_labels():
    with pytest.raises(ValidationError):
        CurvatureFunctionSpec(n=2, k=3, l=0)
    with pytest.raises(ValidationError):
        CurvatureFunctionSpec(n=3, k=2, l=2)
    assert CurvatureFunctionSpec(n=2, k=1, l=0).label == "mean"
    assert CurvatureFunctionSpec(n=3, k=3, l=0).label == "gauss"
    assert CurvatureFunctionSpec(n=3, k=2, l=1).label == "sigma2/sigma1"
