# -*- coding: utf-8 -*-
"""
梯度迭代引擎的测试
"""

import numpy as np
import pytest

from illposed_gd.core.exceptions import RefusalError
from illposed_gd.core.space import BallSpec, as_vector
from illposed_gd.models.functional import FunctionalModel, NoisyFunctional, exact_as_noisy, make_noisy
from illposed_gd.schemas.trace import TraceKind
from illposed_gd.services.descent import run_exact, run_noisy
from illposed_gd.services.stop_rule import StoppingPolicy, stopping_index


def _pulled_away_model() -> FunctionalModel:
    """∇J(x) = x − 2 在 B_1(0) 内, 从 x₀ = 1 一步跳到 2"""
    ball = BallSpec(center=[0.0], radius=1.0)
    return FunctionalModel(
        evaluate=lambda x: float(0.5 * np.sum((x - 2.0) ** 2)),
        gradient=lambda x: x - 2.0,
        lipschitz=0.5,
        domain=ball,
    )


def test_quadratic_iterates_halve(quadratic_1d):
    trace = run_exact(quadratic_1d.exact_functional, as_vector([1.0]), 40)
    assert trace.kind == TraceKind.EXACT
    assert trace.stopped_at == 40
    assert not trace.escaped
    for k, x in enumerate(trace.iterates):
        assert x[0] == pytest.approx(0.5 ** k, rel=1e-12)


def test_quadratic_gradient_energy(quadratic_1d):
    trace = run_exact(quadratic_1d.exact_functional, as_vector([1.0]), 40)
    total = sum(g ** 2 for g in trace.grad_norms)
    assert total == pytest.approx(1.0 / 3.0, abs=1e-9)
    assert total <= trace.values[0] / (1.0 - quadratic_1d.exact_functional.lipschitz)


def test_zero_steps_keeps_start(quadratic_1d):
    trace = run_exact(quadratic_1d.exact_functional, as_vector([1.0]), 0)
    assert trace.stopped_at == 0
    assert trace.errors == [1.0]


def test_escape_is_recorded_and_stops():
    model = _pulled_away_model()
    trace = run_exact(model, as_vector([1.0]), 10)
    assert trace.escaped_at == 1
    assert trace.stopped_at == 1
    assert trace.iterates[-1][0] == pytest.approx(2.0)
    assert trace.in_ball_steps == 0


def test_noisy_escape_is_recorded():
    model = _pulled_away_model()
    noisy = NoisyFunctional(model=model, delta=0.1, psi_delta=0.1, lipschitz_noisy=0.5)
    trace = run_noisy(noisy, model, as_vector([1.0]), n_steps=5)
    assert trace.kind == TraceKind.NOISY
    assert trace.escaped_at == 1


def test_start_outside_ball_is_refused(quadratic_1d):
    with pytest.raises(RefusalError):
        run_exact(quadratic_1d.exact_functional, as_vector([2.5]), 5)


def test_noisy_refuses_large_lipschitz(quadratic_1d):
    exact = quadratic_1d.exact_functional
    noisy = NoisyFunctional(model=exact, delta=0.6, psi_delta=0.1, lipschitz_noisy=1.1)
    with pytest.raises(RefusalError):
        run_noisy(noisy, exact, as_vector([1.0]), n_steps=3)


def test_noisy_requires_steps_without_policy(quadratic_1d):
    exact = quadratic_1d.exact_functional
    with pytest.raises(ValueError):
        run_noisy(exact_as_noisy(exact), exact, as_vector([1.0]))


def test_zero_noise_matches_exact(ode_problem):
    exact = ode_problem.exact_functional
    x0 = ode_problem.x0_from_offset()
    exact_trace = run_exact(exact, x0, 15)
    noisy_trace = run_noisy(exact_as_noisy(exact), exact, x0, n_steps=15)
    assert noisy_trace.values == exact_trace.values
    assert noisy_trace.errors == exact_trace.errors
    assert noisy_trace.exact_values == exact_trace.values


def test_noisy_runs_stopping_index_steps(quadratic_4d):
    exact = quadratic_4d.exact_functional
    noisy = make_noisy(quadratic_4d.operator, exact, 1e-2, seed=0, bounds=quadratic_4d.noise_bounds())
    policy = StoppingPolicy(c0=1.0, kappa=0.5, rho=quadratic_4d.ball.radius, xi=1.0)
    trace = run_noisy(noisy, exact, quadratic_4d.x0_from_offset(), stop=policy)
    assert trace.stopped_at == stopping_index(policy, noisy.delta)
    assert trace.planned_steps == trace.stopped_at
    assert trace.delta == noisy.delta
    assert trace.seed == 0


def test_track_exact_off(quadratic_4d):
    exact = quadratic_4d.exact_functional
    noisy = make_noisy(quadratic_4d.operator, exact, 1e-2, seed=1, bounds=quadratic_4d.noise_bounds())
    trace = run_noisy(noisy, exact, quadratic_4d.x0_from_offset(), n_steps=4, track_exact=False)
    assert trace.exact_values is None
    assert not trace.track_exact


def test_trace_rejects_inconsistent_lengths():
    from illposed_gd.schemas.trace import IterationTrace

    with pytest.raises(ValueError):
        IterationTrace(
            kind=TraceKind.EXACT,
            iterates=[[0.0]],
            errors=[0.0, 1.0],
            values=[0.0],
            grad_norms=[0.0],
            inner_products=[0.0],
            stopped_at=0,
        )
