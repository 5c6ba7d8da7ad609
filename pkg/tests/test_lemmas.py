# -*- coding: utf-8 -*-
"""
轨迹不等式校验的测试
"""

import numpy as np
import pytest

from illposed_gd.core.space import BallSpec, as_vector
from illposed_gd.models.functional import FunctionalModel, make_noisy
from illposed_gd.schemas.reports import LemmaId, LemmaStatus
from illposed_gd.services.descent import run_exact, run_noisy
from illposed_gd.services.lemmas import (
    check_descent,
    check_divergence_recursion,
    check_error_bound,
    check_init_condition,
    check_noisy_init_condition,
    check_noisy_recursion,
    check_noisy_uniform,
    check_summability,
    corrupt_trace,
    theorem_conditions,
)
from illposed_gd.services.stop_rule import StoppingPolicy, inflate_beta, stop_constants, stopping_index


@pytest.fixture(scope="module")
def quadratic_setup(quadratic_4d):
    """二次问题上的精确轨迹与一条噪声轨迹"""
    exact = quadratic_4d.exact_functional
    x0 = quadratic_4d.x0_from_offset()
    beta = inflate_beta(quadratic_4d.analytic_facts.beta)
    constants = stop_constants(beta)
    noisy = make_noisy(quadratic_4d.operator, exact, 1e-2, seed=4, bounds=quadratic_4d.noise_bounds())
    policy = StoppingPolicy(rho=quadratic_4d.ball.radius, xi=constants.xi)
    n_delta = stopping_index(policy, noisy.delta)
    return {
        "instance": quadratic_4d,
        "beta": beta,
        "constants": constants,
        "noisy": noisy,
        "exact_trace": run_exact(exact, x0, 10 * n_delta),
        "noisy_trace": run_noisy(noisy, exact, x0, n_steps=n_delta),
    }


def _run_all(setup):
    exact_trace = setup["exact_trace"]
    noisy_trace = setup["noisy_trace"]
    noisy = setup["noisy"]
    L = setup["instance"].exact_functional.lipschitz
    return {
        LemmaId.DESCENT: check_descent(exact_trace, L),
        LemmaId.ERROR_BOUND: check_error_bound(exact_trace, setup["beta"], L),
        LemmaId.SUMMABILITY: check_summability(exact_trace, setup["beta"], L),
        LemmaId.NOISY_DESCENT: check_descent(noisy_trace, noisy.lipschitz_noisy, LemmaId.NOISY_DESCENT),
        LemmaId.NOISY_RECURSION: check_noisy_recursion(noisy_trace, setup["constants"], noisy.delta),
        LemmaId.NOISY_UNIFORM: check_noisy_uniform(
            noisy_trace, setup["constants"], noisy.delta, noisy.lipschitz_noisy, noisy_trace.values[0]
        ),
        LemmaId.DIVERGENCE_RECURSION: check_divergence_recursion(noisy_trace, exact_trace, L, noisy.delta),
    }


def test_all_checks_pass_on_quadratic(quadratic_setup):
    for lemma_id, result in _run_all(quadratic_setup).items():
        assert result.status == LemmaStatus.PASSED, lemma_id
        assert result.lemma_id == lemma_id
        assert result.checked_steps > 0


@pytest.mark.parametrize("lemma_id", list(LemmaId))
def test_corrupted_trace_fails_named_check(quadratic_setup, lemma_id):
    step = 1
    setup = dict(quadratic_setup)
    if lemma_id in (LemmaId.DESCENT, LemmaId.ERROR_BOUND, LemmaId.SUMMABILITY):
        setup["exact_trace"] = corrupt_trace(setup["exact_trace"], lemma_id, step)
    else:
        setup["noisy_trace"] = corrupt_trace(setup["noisy_trace"], lemma_id, step)

    result = _run_all(setup)[lemma_id]
    assert result.status == LemmaStatus.FAILED
    assert not result.passed
    assert result.witness_step >= step
    assert result.worst_margin < 0.0


def test_corrupt_trace_rejects_step_outside_trace(quadratic_setup):
    trace = quadratic_setup["noisy_trace"]
    with pytest.raises(ValueError):
        corrupt_trace(trace, LemmaId.DESCENT, trace.stopped_at)


def test_quadratic_descent_energy_bound(quadratic_1d):
    trace = run_exact(quadratic_1d.exact_functional, as_vector([1.0]), 40)
    result = check_descent(trace, 0.5)
    assert result.passed
    # Σ‖∇J_k‖² = 1/3 ≤ J(x₀)/(1 − L) = 0.5
    assert sum(g ** 2 for g in trace.grad_norms[:-1]) <= 0.5


def test_quadratic_summability_bound(quadratic_1d):
    trace = run_exact(quadratic_1d.exact_functional, as_vector([1.0]), 60)
    result = check_summability(trace, -2.0, 0.5)
    assert result.passed
    assert result.context["bound"] == pytest.approx(1.5)
    # ⟨∇J_k, e_k⟩ = ½·4^(−k), 2Σ → 4/3
    assert 2.0 * sum(abs(p) for p in trace.inner_products[: trace.stopped_at]) == pytest.approx(4.0 / 3.0)


@pytest.mark.parametrize("beta, expected", [(-2.0, 1.0), (0.0, 1.5)])
def test_quadratic_error_bound_depends_on_beta(quadratic_1d, beta, expected):
    trace = run_exact(quadratic_1d.exact_functional, as_vector([1.0]), 40)
    result = check_error_bound(trace, beta, 0.5)
    assert result.passed
    assert result.context["bound"] == pytest.approx(expected)


def test_checks_inapplicable_on_escaped_trace():
    ball = BallSpec(center=[0.0], radius=1.0)
    model = FunctionalModel(
        evaluate=lambda x: float(0.5 * np.sum((x - 2.0) ** 2)),
        gradient=lambda x: x - 2.0,
        lipschitz=0.5,
        domain=ball,
    )
    trace = run_exact(model, as_vector([1.0]), 5)
    for result in (check_descent(trace, 0.5), check_error_bound(trace, 0.0, 0.5), check_summability(trace, 0.0, 0.5)):
        assert result.status == LemmaStatus.INAPPLICABLE
        assert not result.passed
        assert result.reason


def test_descent_inapplicable_for_large_lipschitz(quadratic_setup):
    result = check_descent(quadratic_setup["exact_trace"], 1.2)
    assert result.status == LemmaStatus.INAPPLICABLE


def test_recursion_needs_exact_tracking(quadratic_4d, quadratic_setup):
    noisy = quadratic_setup["noisy"]
    trace = run_noisy(noisy, quadratic_4d.exact_functional, quadratic_4d.x0_from_offset(), n_steps=3, track_exact=False)
    assert check_noisy_recursion(trace, quadratic_setup["constants"], noisy.delta).status == LemmaStatus.INAPPLICABLE
    uniform = check_noisy_uniform(trace, quadratic_setup["constants"], noisy.delta, noisy.lipschitz_noisy, 0.1)
    assert uniform.status == LemmaStatus.INAPPLICABLE


def test_recursion_reports_beta_zero_variant(quadratic_setup):
    noisy = quadratic_setup["noisy"]
    result = check_noisy_recursion(quadratic_setup["noisy_trace"], quadratic_setup["constants"], noisy.delta)
    assert "beta_zero_worst_margin" in result.context


def test_divergence_inapplicable_when_exact_trace_short(quadratic_4d, quadratic_setup):
    short = run_exact(quadratic_4d.exact_functional, quadratic_4d.x0_from_offset(), 1)
    noisy = quadratic_setup["noisy"]
    result = check_divergence_recursion(quadratic_setup["noisy_trace"], short, 0.5, noisy.delta)
    assert result.status == LemmaStatus.INAPPLICABLE


def test_divergence_inapplicable_for_different_starts(quadratic_4d, quadratic_setup):
    other = run_exact(quadratic_4d.exact_functional, quadratic_4d.x0_from_offset(np.full(4, 0.1)), 100)
    noisy = quadratic_setup["noisy"]
    result = check_divergence_recursion(quadratic_setup["noisy_trace"], other, 0.5, noisy.delta)
    assert result.status == LemmaStatus.INAPPLICABLE


def test_init_condition(quadratic_4d):
    exact = quadratic_4d.exact_functional
    assert check_init_condition(quadratic_4d.x0_from_offset(), exact, -1.9, quadratic_4d.ball)
    # β > 0 时 J(x₀) 项进入, ‖x₀ − x*‖ 接近 ρ 即不成立
    assert not check_init_condition(quadratic_4d.x0_from_offset(np.full(4, 0.99)), exact, 50.0, quadratic_4d.ball)


def test_theorem_conditions_hold_for_small_noise(quadratic_4d):
    exact = quadratic_4d.exact_functional
    x0 = quadratic_4d.x0_from_offset(np.full(4, 0.1))
    constants = stop_constants(-1.9)
    noisy = make_noisy(quadratic_4d.operator, exact, 1e-4, seed=0, bounds=quadratic_4d.noise_bounds())
    conditions = theorem_conditions(x0, exact, noisy, constants, quadratic_4d.ball, noisy.phi_bound())
    assert conditions.all_hold
    assert conditions.initial_smallness.slack > 0

    n_delta = stopping_index(StoppingPolicy(rho=quadratic_4d.ball.radius), noisy.delta)
    flag = check_noisy_init_condition(x0, noisy, constants, quadratic_4d.ball, n_delta + 1, noisy.phi_bound())
    assert flag.holds


def test_theorem_conditions_flag_large_noise(quadratic_4d):
    exact = quadratic_4d.exact_functional
    x0 = quadratic_4d.x0_from_offset()
    noisy = make_noisy(quadratic_4d.operator, exact, 1.0, seed=0, bounds=quadratic_4d.noise_bounds())
    conditions = theorem_conditions(x0, exact, noisy, stop_constants(-1.9), quadratic_4d.ball, noisy.phi_bound())
    assert not conditions.noise_below_gap.holds
    assert not conditions.all_hold
    # ‖e₀‖ = 1 > ρ/4
    assert not conditions.initial_smallness.holds
