# -*- coding: utf-8 -*-
"""
泛函模型与噪声构造的测试
"""

import numpy as np
import pytest

from illposed_gd.core.exceptions import DimensionMismatchError, RefusalError
from illposed_gd.core.sampling import BallSampler
from illposed_gd.core.space import BallSpec, as_vector, norm
from illposed_gd.models.functional import (
    FunctionalModel,
    exact_as_noisy,
    gradient_check,
    least_squares_functional,
    make_noisy,
)
from illposed_gd.problems.scalar import scalar_operator
from tests.conftest import identity_functional


def test_least_squares_identity():
    _, functional = identity_functional(step_scale=0.5)
    x = as_vector([2.0])
    assert functional.evaluate(x) == pytest.approx(1.0)
    assert functional.gradient(x)[0] == pytest.approx(1.0)


def test_least_squares_scalar_quadratic():
    op = scalar_operator(BallSpec(center=[0.0], radius=0.2))
    functional = least_squares_functional(op, op.data, 1.0, lipschitz=2.0)
    x = as_vector([0.1])
    assert functional.evaluate(x) == pytest.approx(0.5 * 0.11 ** 2, rel=1e-12)
    assert functional.gradient(x)[0] == pytest.approx(1.2 * 0.11, rel=1e-12)
    assert gradient_check(functional, x, 1e-6) < 1e-6


def test_least_squares_vanishes_at_solution(ode_problem):
    functional = ode_problem.exact_functional
    center = ode_problem.ball.center
    assert functional.evaluate(center) == pytest.approx(0.0, abs=1e-10)
    assert norm(functional.gradient(center)) == pytest.approx(0.0, abs=1e-10)


def test_least_squares_estimates_lipschitz_when_not_given():
    op, _ = identity_functional()
    functional = least_squares_functional(op, op.data, 0.5)
    assert functional.lipschitz == pytest.approx(0.5, rel=1e-9)


def test_least_squares_dimension_mismatch(half_identity):
    with pytest.raises(DimensionMismatchError):
        least_squares_functional(half_identity, as_vector([0.0, 1.0]), 1.0)


def test_least_squares_rejects_non_positive_step(half_identity):
    with pytest.raises(ValueError):
        least_squares_functional(half_identity, half_identity.data, 0.0)


def test_make_noisy_linear_delta(half_identity):
    exact = least_squares_functional(half_identity, half_identity.data, 1.0, lipschitz=0.25)
    noisy = make_noisy(half_identity, exact, 0.01, seed=3)
    assert noisy.delta == pytest.approx(0.005, rel=0.02)
    assert noisy.lipschitz_noisy == pytest.approx(exact.lipschitz + noisy.delta)
    assert norm(noisy.noisy_data - half_identity.data) == pytest.approx(0.01, rel=1e-12)


def test_make_noisy_is_deterministic(half_identity):
    exact = least_squares_functional(half_identity, half_identity.data, 1.0, lipschitz=0.25)
    first = make_noisy(half_identity, exact, 0.01, seed=11)
    second = make_noisy(half_identity, exact, 0.01, seed=11)
    assert np.array_equal(first.noisy_data, second.noisy_data)


def test_make_noisy_vanishing_level(half_identity):
    exact = least_squares_functional(half_identity, half_identity.data, 1.0, lipschitz=0.25)
    deltas = [make_noisy(half_identity, exact, level, seed=0).delta for level in (1e-2, 1e-4, 1e-8)]
    psis = [make_noisy(half_identity, exact, level, seed=0).psi_delta for level in (1e-2, 1e-4, 1e-8)]
    assert deltas[0] > deltas[1] > deltas[2] > 0
    assert psis[0] > psis[1] > psis[2] > 0
    assert deltas[2] < 1e-8


def test_make_noisy_rejects_zero_level(half_identity):
    exact = least_squares_functional(half_identity, half_identity.data, 1.0, lipschitz=0.25)
    with pytest.raises(ValueError):
        make_noisy(half_identity, exact, 0.0, seed=0)


@pytest.mark.parametrize("problem_fixture", ["quadratic_4d", "scalar_problem", "ode_problem", "autoconv_problem"])
def test_noise_bounds_hold_on_samples(problem_fixture, request):
    instance = request.getfixturevalue(problem_fixture)
    exact = instance.exact_functional
    noisy = make_noisy(instance.operator, exact, 1e-2, seed=5, bounds=instance.noise_bounds())
    for x in BallSampler(instance.ball, 99).uniform(50, radius_fraction=0.9):
        gap = norm(np.asarray(noisy.model.gradient(x)) - np.asarray(exact.gradient(x)))
        assert gap <= noisy.delta * (1.0 + 1e-9)
        assert abs(noisy.model.evaluate(x) - exact.evaluate(x)) <= noisy.psi_delta * (1.0 + 1e-9)


def test_exact_as_noisy_has_zero_noise(quadratic_1d):
    noisy = exact_as_noisy(quadratic_1d.exact_functional)
    assert noisy.delta == 0.0
    assert noisy.psi_delta == 0.0
    assert noisy.lipschitz_noisy == pytest.approx(quadratic_1d.exact_functional.lipschitz)


def test_gradient_check_refuses_near_boundary(quadratic_1d):
    with pytest.raises(RefusalError):
        gradient_check(quadratic_1d.exact_functional, as_vector([1.9999]), 1e-3)


def test_gradient_check_rejects_non_positive_step(quadratic_1d):
    with pytest.raises(ValueError):
        gradient_check(quadratic_1d.exact_functional, as_vector([0.5]), 0.0)


@pytest.mark.parametrize("problem_fixture", ["quadratic_4d", "scalar_problem", "ode_problem", "autoconv_problem"])
def test_phi_bound_holds_on_samples(problem_fixture, request):
    instance = request.getfixturevalue(problem_fixture)
    noisy = make_noisy(instance.operator, instance.exact_functional, 1e-2, seed=5, bounds=instance.noise_bounds())
    phi = noisy.phi_bound()
    for x in BallSampler(instance.ball, 7).uniform(50, radius_fraction=0.9):
        gradient = np.asarray(noisy.model.gradient(x))
        assert float(np.dot(gradient, gradient)) <= phi(noisy.model.evaluate(x)) * (1.0 + 1e-9) + 1e-300


def _diagonal_quadratic(gradient_scale):
    ball = BallSpec(center=[0.0, 0.0], radius=10.0)
    return FunctionalModel(
        evaluate=lambda x: float(0.5 * np.sum(x ** 2)),
        gradient=lambda x: x * gradient_scale,
        lipschitz=1.0,
        domain=ball,
    )


def test_gradient_check_measures_error_against_largest_component():
    # 第一个分量偏差 1%: 误差 0.01/1.01
    model = _diagonal_quadratic(np.array([1.01, 1.0]))
    assert gradient_check(model, as_vector([1.0, 1e-3]), 1e-5) == pytest.approx(0.01 / 1.01, rel=1e-4)


def test_gradient_check_ignores_roundoff_in_vanishing_component():
    # 第二个分量约 1e-9, 其差分舍入误差不按自身大小放大
    model = _diagonal_quadratic(np.array([1.0, 1.0]))
    assert gradient_check(model, as_vector([1.0, 1e-9]), 1e-5) < 1e-8
