# -*- coding: utf-8 -*-
"""
非线性条件估计量的测试
"""

import math

import jsonschema
import numpy as np
import pytest

from illposed_gd.core.space import BallSpec
from illposed_gd.models.functional import FunctionalModel, exact_as_noisy
from illposed_gd.problems import problem_registry
from illposed_gd.problems.base import AnalyticFacts
from illposed_gd.schemas.reports import EstimateStatus, GammaMarker
from illposed_gd.services.conditions import (
    balance_ratio_profile,
    calibrate_phi,
    check_cone_implications,
    check_quasiconvexity,
    check_radial_monotonicity,
    derive_ncgb_from_cone,
    diagnose_conditions,
    estimate_beta,
    estimate_eta_strong,
    estimate_eta_weak,
    estimate_lipschitz,
    estimate_tau_balancing,
)
from tests.conftest import load_schema


def _double_well() -> FunctionalModel:
    """J(x) = x²(x − 1)², 在 0 与 1 处为零, 不满足拟凸性"""
    ball = BallSpec(center=[0.0], radius=1.5)
    return FunctionalModel(
        evaluate=lambda x: float(np.sum(x ** 2 * (x - 1.0) ** 2)),
        gradient=lambda x: 2.0 * x * (x - 1.0) * (2.0 * x - 1.0),
        lipschitz=0.5,
        domain=ball,
    )


def test_beta_on_quadratic(quadratic_4d):
    estimate = estimate_beta(quadratic_4d.exact_functional, quadratic_4d.ball, 0.0, 10_000, seed=0)
    assert estimate.status == EstimateStatus.LOWER_BOUND
    assert -2.0 - 1e-12 <= estimate.value <= -1.96


def test_tau_on_quadratic(quadratic_4d):
    estimate = estimate_tau_balancing(quadratic_4d.exact_functional, quadratic_4d.ball, 0.25, 2000, 0)
    assert 0.499 <= estimate.value <= 0.5
    assert estimate.value == pytest.approx(math.sqrt(0.25), abs=1e-3)


def test_eta_weak_on_quadratic(quadratic_4d):
    estimate = estimate_eta_weak(quadratic_4d.operator, quadratic_4d.ball, 2000, seed=0)
    assert estimate.value < 1e-10


def test_eta_strong_on_scalar(scalar_problem):
    estimate = estimate_eta_strong(scalar_problem.operator, scalar_problem.ball, 2000, seed=0)
    assert estimate.conclusive
    assert 0.0 < estimate.value <= 0.27


def test_lipschitz_on_quadratic(quadratic_4d):
    estimate = estimate_lipschitz(quadratic_4d.exact_functional, quadratic_4d.ball, 500, 0)
    assert estimate.value <= 0.5 * (1.0 + 1e-12)
    assert estimate.value > 0.4


def test_beta_is_monotone_in_gamma(scalar_problem):
    model = scalar_problem.exact_functional
    values = [
        estimate_beta(model, scalar_problem.ball, gamma, 500, seed=3).value
        for gamma in (0.0, 0.25, 1.0, GammaMarker.INFINITY)
    ]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_beta_inconclusive_with_huge_floor(quadratic_1d):
    estimate = estimate_beta(quadratic_1d.exact_functional, quadratic_1d.ball, 0.0, 100, grad_floor=1e6)
    assert estimate.status == EstimateStatus.INCONCLUSIVE
    assert estimate.value is None


def _flat_left() -> FunctionalModel:
    """J(x) = x (x ≥ 0), 1e-6·x (x < 0): 左侧梯度远低于下限"""
    ball = BallSpec(center=[0.0], radius=1.0)
    return FunctionalModel(
        evaluate=lambda x: float(np.sum(np.where(x >= 0.0, x, 1e-6 * x))),
        gradient=lambda x: np.where(x >= 0.0, 1.0, 1e-6),
        lipschitz=1.0,
        domain=ball,
    )


def test_beta_certifies_pairs_below_grad_floor():
    model = _flat_left()
    estimate = estimate_beta(model, model.domain, GammaMarker.INFINITY, 200, grad_floor=1e-3, seed=0)
    # 高于下限的点对只给出 x₁ − x₂ ≤ 1; 低于下限的 (ρ, −ρ) 需要 β ≥ 2
    assert estimate.status == EstimateStatus.LOWER_BOUND
    assert estimate.value == pytest.approx(2.0, rel=1e-9)
    assert estimate.parameters["below_floor_violations"] > 0
    assert estimate.witnesses
    assert all(w.label == "beta_below_floor" for w in estimate.witnesses)
    assert all(w.threshold <= 1.0 + 1e-12 for w in estimate.witnesses)


def test_derived_pair_for_vanishing_eta():
    pair = derive_ncgb_from_cone(1e-12, 1.0)
    assert pair.gamma == pytest.approx(0.225)
    assert pair.beta == pytest.approx(-0.0256583509747431, rel=1e-9)


@pytest.mark.parametrize("eta, jac_sup", [(0.0, 1.0), (1.0, 1.0), (0.5, 0.0)])
def test_derived_pair_rejects_bad_input(eta, jac_sup):
    with pytest.raises(ValueError):
        derive_ncgb_from_cone(eta, jac_sup)


def test_derived_pair_consistent_with_sampled_beta(scalar_problem):
    eta = estimate_eta_strong(scalar_problem.operator, scalar_problem.ball, 2000, seed=0).value
    jac_sup = math.sqrt(scalar_problem.step_scale) * scalar_problem.analytic_facts.jacobian_sup
    pair = derive_ncgb_from_cone(eta, jac_sup)
    assert pair.beta < 0.0
    assert 0.0 < pair.gamma < pair.gamma_sup
    sampled = estimate_beta(scalar_problem.exact_functional, scalar_problem.ball, pair.gamma, 2000, seed=0)
    assert sampled.value <= pair.beta + 0.05 * abs(pair.beta)


def test_cone_implications_hold_at_sampled_eta(scalar_problem):
    eta = estimate_eta_strong(scalar_problem.operator, scalar_problem.ball, 500, seed=4).value
    outcome = check_cone_implications(eta, scalar_problem.operator, scalar_problem.ball, 500, 4)
    assert outcome.passed
    assert outcome.checked > 0


def test_radial_monotonicity_on_quadratic(quadratic_4d):
    outcome = check_radial_monotonicity(quadratic_4d.operator, quadratic_4d.ball, 0.0, 200, 16, 0)
    assert outcome.passed


def test_quasiconvexity_on_convex_quadratic(quadratic_4d):
    outcome = check_quasiconvexity(quadratic_4d.exact_functional, quadratic_4d.ball, 1.0, 200, 8, 0)
    assert outcome.passed


def test_quasiconvexity_fails_on_double_well():
    model = _double_well()
    outcome = check_quasiconvexity(model, model.domain, 0.0, 200, 8, 0)
    assert not outcome.passed
    assert outcome.witnesses
    assert outcome.worst_margin < 0.0


def test_ratio_profile_on_symmetric_functional(quadratic_4d):
    rows = balance_ratio_profile(quadratic_4d.exact_functional, quadratic_4d.ball, [1.0, 0.1], 50, 0)
    for row in rows:
        assert row.minimum == pytest.approx(1.0)
        assert row.maximum == pytest.approx(1.0)


def test_phi_calibration_on_quadratic(quadratic_1d):
    noisy = exact_as_noisy(quadratic_1d.exact_functional)
    estimate = calibrate_phi(noisy, quadratic_1d.ball, 200, 0)
    assert estimate.value == pytest.approx(1.05, rel=1e-9)


def test_diagnose_quadratic_report(quadratic_4d):
    report = diagnose_conditions(quadratic_4d, 1000, 0)
    assert -2.0 - 1e-12 <= report.beta_hat <= -1.96
    assert report.eta_weak_hat < 1e-10
    assert report.tau_hat == pytest.approx(0.5, abs=1e-3)
    assert report.derived_ncgb is not None
    assert report.tau_lower_bound is not None
    assert not report.witnesses
    assert {check.name for check in report.checks} >= {"cone_implications", "quasiconvexity"}
    jsonschema.validate(report.model_dump(mode="json"), load_schema("condition_report"))


def test_diagnose_falsifies_wrong_claim(quadratic_1d):
    wrong = quadratic_1d.model_copy(update={"analytic_facts": AnalyticFacts(lipschitz=0.1, beta=-2.0)})
    report = diagnose_conditions(wrong, 300, 0)
    lipschitz = next(e for e in report.estimates if e.name == "lipschitz")
    assert lipschitz.status == EstimateStatus.FALSIFIED
    assert lipschitz.witnesses[0].threshold == 0.1
    assert report.witnesses


def test_estimators_are_deterministic(scalar_problem):
    first = estimate_eta_strong(scalar_problem.operator, scalar_problem.ball, 300, seed=9)
    second = estimate_eta_strong(scalar_problem.operator, scalar_problem.ball, 300, seed=9)
    assert first.model_dump() == second.model_dump()


def test_beta_for_convex_quadratic_at_gamma_one():
    instance = problem_registry.build("quadratic", dimension=3, spectrum=[0.5, 0.5, 0.5])
    estimate = estimate_beta(instance.exact_functional, instance.ball, 1.0, 2000, seed=0)
    assert estimate.value <= 1e-9


def test_cone_implications_fail_below_sampled_eta(scalar_problem):
    eta = estimate_eta_strong(scalar_problem.operator, scalar_problem.ball, 500, seed=4).value
    outcome = check_cone_implications(0.1 * eta, scalar_problem.operator, scalar_problem.ball, 500, 4)
    assert not outcome.passed
    assert outcome.witnesses
    assert outcome.worst_margin < 0.0


@pytest.mark.parametrize("eta", [None, 1.0])
def test_radial_monotonicity_on_scalar(scalar_problem, eta):
    # None: 解析弱切锥常数 ρ/(1 − ρ), 即 x = −ρ, t = 1 处的临界值
    eta = scalar_problem.analytic_facts.eta_weak if eta is None else eta
    outcome = check_radial_monotonicity(scalar_problem.operator, scalar_problem.ball, eta, 200, 16, 0)
    assert outcome.passed
    assert outcome.checked > 0


def test_tau_dominates_cone_lower_bound(quadratic_4d):
    report = diagnose_conditions(quadratic_4d, 1000, 0)
    assert report.tau_lower_bound == pytest.approx(0.25, abs=1e-6)
    assert report.tau_hat >= report.tau_lower_bound


def test_diagnose_reports_analytic_facts(quadratic_4d):
    report = diagnose_conditions(quadratic_4d, 300, 0)
    analytic = {e.name: e for e in report.estimates if e.status == EstimateStatus.ANALYTIC}
    assert analytic["beta_analytic"].value == pytest.approx(-2.0)
    assert analytic["tau_balancing_analytic"].value == pytest.approx(0.5)
    assert "balancing_exponent_analytic" not in analytic
    assert all(not e.witnesses for e in analytic.values())


def test_diagnose_falsifies_wrong_balancing_exponent(quadratic_4d):
    # 0.25^0.1 ≈ 0.87 高于采样得到的 τ̂ ≈ 0.5
    wrong = quadratic_4d.model_copy(update={"analytic_facts": AnalyticFacts(balancing_exponent=0.1)})
    report = diagnose_conditions(wrong, 300, 0)
    tau = next(e for e in report.estimates if e.name == "tau_balancing")
    assert tau.status == EstimateStatus.FALSIFIED
    assert tau.witnesses[0].threshold == pytest.approx(0.25 ** 0.1)
    assert report.witnesses
