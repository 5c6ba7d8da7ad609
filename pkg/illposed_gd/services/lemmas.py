# -*- coding: utf-8 -*-
"""
轨迹级不等式校验

每个不等式按缩放余量 (右端 − 左端) / max(1, |左端|, |右端|) 比较,
最差余量不低于 −CHECK_TOLERANCE 即通过。
"""

import math
from typing import Dict, Optional

import numpy as np

from illposed_gd.core.config import settings
from illposed_gd.core.space import BallSpec, Vector, as_vector, norm, scaled_margin
from illposed_gd.models.functional import FunctionalModel, NoisyFunctional, PhiBound
from illposed_gd.schemas.reports import (
    ConditionFlag,
    LemmaCheckResult,
    LemmaId,
    LemmaStatus,
    TheoremConditions,
)
from illposed_gd.schemas.trace import IterationTrace
from illposed_gd.services.stop_rule import StopConstants


class _MarginTracker:
    """累积最差余量及其步号"""

    def __init__(self, lemma_id: LemmaId, label: str, context: Dict[str, Optional[float]]):
        self.lemma_id = lemma_id
        self.label = label
        self.context = context
        self.worst_margin = math.inf
        self.witness_step = None
        self.checked = 0

    def add(self, lhs: float, rhs: float, step: int):
        self.checked += 1
        margin = scaled_margin(lhs, rhs)
        if margin < self.worst_margin:
            self.worst_margin = margin
            self.witness_step = step

    def result(self) -> LemmaCheckResult:
        worst = 0.0 if self.checked == 0 else self.worst_margin
        passed = worst >= -settings.CHECK_TOLERANCE
        return LemmaCheckResult(
            lemma_id=self.lemma_id,
            status=LemmaStatus.PASSED if passed else LemmaStatus.FAILED,
            passed=passed,
            worst_margin=worst,
            witness_step=None if passed else self.witness_step,
            checked_steps=self.checked,
            trace_label=self.label,
            context=self.context,
        )


def inapplicable(lemma_id: LemmaId, reason: str, label: str = "", context: Optional[dict] = None) -> LemmaCheckResult:
    return LemmaCheckResult(
        lemma_id=lemma_id,
        status=LemmaStatus.INAPPLICABLE,
        passed=False,
        trace_label=label,
        reason=reason,
        context=context or {},
    )


def check_descent(
    trace: IterationTrace,
    L: float,
    lemma_id: LemmaId = LemmaId.DESCENT,
    label: str = "",
) -> LemmaCheckResult:
    """逐步下降 J_{k+1} − J_k ≤ (L − 1)‖∇J_k‖² 及累积界 Σ‖∇J_k‖² ≤ J(x₀)/|1 − L|

    对噪声轨迹以 L_δ 调用即为噪声情形的单调性与可和性。
    """
    context = {"L": L}
    if trace.escaped:
        return inapplicable(lemma_id, "轨迹越出球面", label, context)
    if not L < 1.0:
        return inapplicable(lemma_id, f"需要 L < 1, 实际 {L}", label, context)

    tracker = _MarginTracker(lemma_id, label, context)
    budget = trace.values[0] / abs(1.0 - L)
    partial = 0.0
    for k in range(trace.stopped_at):
        grad_sq = trace.grad_norms[k] ** 2
        tracker.add(trace.values[k + 1] - trace.values[k], (L - 1.0) * grad_sq, k)
        partial += grad_sq
        tracker.add(partial, budget, k)
    return tracker.result()


def check_error_bound(trace: IterationTrace, beta: float, L: float, label: str = "") -> LemmaCheckResult:
    """‖e_k‖² ≤ ‖e₀‖² + (1 + 2β)⁺/|1 − L|·J(x₀)"""
    context = {"beta": beta, "L": L}
    if trace.escaped:
        return inapplicable(LemmaId.ERROR_BOUND, "轨迹越出球面", label, context)
    if not L < 1.0:
        return inapplicable(LemmaId.ERROR_BOUND, f"需要 L < 1, 实际 {L}", label, context)

    bound = trace.errors[0] ** 2 + max(1.0 + 2.0 * beta, 0.0) / abs(1.0 - L) * trace.values[0]
    context["bound"] = bound
    tracker = _MarginTracker(LemmaId.ERROR_BOUND, label, context)
    for k, error in enumerate(trace.errors):
        tracker.add(error ** 2, bound, k)
    return tracker.result()


def check_init_condition(x0: Vector, model: FunctionalModel, beta: float, ball: BallSpec) -> bool:
    """‖x₀ − x*‖² + (1 + 2β)⁺/|1 − L|·J(x₀) < ρ²"""
    x0 = as_vector(x0)
    lhs = ball.distance(x0) ** 2 + max(1.0 + 2.0 * beta, 0.0) / abs(1.0 - model.lipschitz) * model.evaluate(x0)
    return bool(lhs < ball.radius ** 2)


def _recursion_margins(trace: IterationTrace, theta: float, beta_plus: float, delta: float, tracker: _MarginTracker):
    for k in range(trace.in_ball_steps):
        e_k = trace.errors[k]
        rhs = e_k ** 2 + theta * trace.grad_norms[k] ** 2 + 2.0 * delta * e_k + 4.0 * beta_plus * delta ** 2
        tracker.add(trace.errors[k + 1] ** 2, rhs, k)


def check_noisy_recursion(
    trace: IterationTrace,
    constants: StopConstants,
    delta: float,
    label: str = "",
) -> LemmaCheckResult:
    """‖e_{k+1}‖² ≤ ‖e_k‖² + θ‖∇J^δ_k‖² + 2δ‖e_k‖ + 4β⁺δ²

    同时在 context 中报告 β = 0 (θ = 1) 版本的最差余量。
    """
    context = {"beta": constants.beta, "theta": constants.theta, "xi": constants.xi, "delta": delta}
    if not trace.track_exact:
        return inapplicable(LemmaId.NOISY_RECURSION, "未记录精确泛函值 (track_exact 关闭)", label, context)

    tracker = _MarginTracker(LemmaId.NOISY_RECURSION, label, context)
    _recursion_margins(trace, constants.theta, constants.beta_plus, delta, tracker)

    beta_zero = _MarginTracker(LemmaId.NOISY_RECURSION, label, {})
    _recursion_margins(trace, 1.0, 0.0, delta, beta_zero)
    context["beta_zero_worst_margin"] = 0.0 if beta_zero.checked == 0 else beta_zero.worst_margin
    return tracker.result()


def check_noisy_uniform(
    trace: IterationTrace,
    constants: StopConstants,
    delta: float,
    Ld: float,
    Jd0: float,
    label: str = "",
) -> LemmaCheckResult:
    """‖e_{k+1}‖² + θ/|1−L_δ|·J^δ(x₀) − θΣ_{l≤k}‖∇J^δ_l‖² ≤ (√(‖e₀‖² + θ/|1−L_δ|·J^δ(x₀)) + ξδ(k+1))²

    右端取 ξδ(k+1), 与 k = 0 的归纳起点一致。
    """
    context = {"theta": constants.theta, "xi": constants.xi, "delta": delta, "L_delta": Ld, "J_delta_0": Jd0}
    if not trace.track_exact:
        return inapplicable(LemmaId.NOISY_UNIFORM, "未记录精确泛函值 (track_exact 关闭)", label, context)
    if not Ld < 1.0:
        return inapplicable(LemmaId.NOISY_UNIFORM, f"需要 L_δ < 1, 实际 {Ld}", label, context)

    theta = constants.theta
    offset = theta / abs(1.0 - Ld) * Jd0
    root = math.sqrt(trace.errors[0] ** 2 + offset)
    tracker = _MarginTracker(LemmaId.NOISY_UNIFORM, label, context)
    partial = 0.0
    for k in range(trace.in_ball_steps):
        partial += trace.grad_norms[k] ** 2
        lhs = trace.errors[k + 1] ** 2 + offset - theta * partial
        rhs = (root + constants.xi * delta * (k + 1)) ** 2
        tracker.add(lhs, rhs, k)
    return tracker.result()


def check_summability(trace: IterationTrace, beta: float, L: float, label: str = "") -> LemmaCheckResult:
    """2·Σ_{k<N}|⟨∇J_k, e_k⟩| ≤ ‖e₀‖² + (1 + 4β⁺)·J(x₀)/|1 − L|, 对每个 N"""
    context = {"beta": beta, "L": L}
    if trace.escaped:
        return inapplicable(LemmaId.SUMMABILITY, "轨迹越出球面", label, context)
    if not L < 1.0:
        return inapplicable(LemmaId.SUMMABILITY, f"需要 L < 1, 实际 {L}", label, context)

    bound = trace.errors[0] ** 2 + (1.0 + 4.0 * max(beta, 0.0)) * trace.values[0] / abs(1.0 - L)
    context["bound"] = bound
    tracker = _MarginTracker(LemmaId.SUMMABILITY, label, context)
    partial = 0.0
    for k in range(trace.stopped_at):
        partial += abs(trace.inner_products[k])
        tracker.add(2.0 * partial, bound, k)
    return tracker.result()


def check_divergence_recursion(
    noisy_trace: IterationTrace,
    exact_trace: IterationTrace,
    L: float,
    delta: float,
    label: str = "",
) -> LemmaCheckResult:
    """‖x^δ_{k+1} − x_{k+1}‖ ≤ (1 + L)‖x^δ_k − x_k‖ + δ 及闭式 δ((1 + L)^{k+1} − 1)/L"""
    context = {"L": L, "delta": delta}
    steps = noisy_trace.in_ball_steps
    if exact_trace.in_ball_steps < steps:
        return inapplicable(
            LemmaId.DIVERGENCE_RECURSION,
            f"精确轨迹步数 {exact_trace.in_ball_steps} 少于噪声轨迹 {steps}",
            label,
            context,
        )
    if not np.array_equal(noisy_trace.iterates[0], exact_trace.iterates[0]):
        return inapplicable(LemmaId.DIVERGENCE_RECURSION, "两条轨迹初值不同", label, context)

    tracker = _MarginTracker(LemmaId.DIVERGENCE_RECURSION, label, context)
    distance = 0.0
    for k in range(steps):
        following = norm(noisy_trace.iterates[k + 1] - exact_trace.iterates[k + 1])
        tracker.add(following, (1.0 + L) * distance + delta, k)
        closed = delta * (k + 1) if L == 0.0 else delta * ((1.0 + L) ** (k + 1) - 1.0) / L
        if math.isfinite(closed):
            tracker.add(following, closed, k)
        distance = following
    return tracker.result()


def _flag(name: str, lhs: float, rhs: float, strict: bool = False) -> ConditionFlag:
    holds = lhs < rhs if strict else lhs <= rhs
    return ConditionFlag(name=name, holds=bool(holds), lhs=float(lhs), rhs=float(rhs), slack=float(rhs - lhs))


def check_noisy_init_condition(
    x0: Vector,
    noisy: NoisyFunctional,
    constants: StopConstants,
    ball: BallSpec,
    n_steps: int,
    phi: PhiBound,
) -> ConditionFlag:
    """(√(‖e₀‖² + θ/|1−L_δ|·J^δ(x₀)) + ξδN)² + θ·φ(J^δ(x₀)) ≤ ρ²"""
    x0 = as_vector(x0)
    jd0 = noisy.model.evaluate(x0)
    theta = constants.theta
    root = math.sqrt(ball.distance(x0) ** 2 + theta / abs(1.0 - noisy.lipschitz_noisy) * jd0)
    lhs = (root + constants.xi * noisy.delta * n_steps) ** 2 + theta * phi(jd0)
    return _flag("noisy_init", lhs, ball.radius ** 2)


def theorem_conditions(
    x0: Vector,
    model: FunctionalModel,
    noisy: NoisyFunctional,
    constants: StopConstants,
    ball: BallSpec,
    phi: PhiBound,
) -> TheoremConditions:
    """初值小性与三个噪声水平条件, 给出各自余量"""
    x0 = as_vector(x0)
    j0 = model.evaluate(x0)
    theta = constants.theta
    gap = abs(1.0 - model.lipschitz)
    rho_sq = ball.radius ** 2

    smallness = ball.distance(x0) ** 2 + 2.0 * theta / gap * j0 + theta * phi(j0)
    return TheoremConditions(
        initial_smallness=_flag("initial_smallness", smallness, rho_sq / 16.0),
        noise_below_gap=_flag("noise_below_gap", noisy.delta, (1.0 - model.lipschitz) / 2.0, strict=True),
        phi_growth=_flag("phi_growth", phi(j0 + noisy.psi_delta), phi(j0) + rho_sq / (8.0 * theta)),
        psi_budget=_flag("psi_budget", 2.0 * theta / gap * noisy.psi_delta, rho_sq / 8.0),
    )


def corrupt_trace(trace: IterationTrace, lemma_id: LemmaId, step: int) -> IterationTrace:
    """构造违反指定不等式的轨迹副本, 用于检验校验器本身"""
    if not 0 <= step < trace.stopped_at:
        raise ValueError(f"故障步号必须位于 [0, {trace.stopped_at}), 实际 {step}")

    update = {}
    big = 1e6 * (1.0 + trace.errors[0] ** 2 + trace.values[0] + sum(g ** 2 for g in trace.grad_norms))
    if lemma_id in (LemmaId.DESCENT, LemmaId.NOISY_DESCENT):
        values = list(trace.values)
        values[step + 1] = values[step] + big
        update["values"] = values
    elif lemma_id in (LemmaId.ERROR_BOUND, LemmaId.NOISY_RECURSION, LemmaId.NOISY_UNIFORM):
        errors = list(trace.errors)
        errors[step + 1] = math.sqrt(big)
        update["errors"] = errors
    elif lemma_id == LemmaId.SUMMABILITY:
        inner_products = list(trace.inner_products)
        inner_products[step] = big
        update["inner_products"] = inner_products
    elif lemma_id == LemmaId.DIVERGENCE_RECURSION:
        iterates = list(trace.iterates)
        shifted = np.array(iterates[step + 1])
        shifted[0] += math.sqrt(big)
        iterates[step + 1] = as_vector(shifted)
        update["iterates"] = iterates
    else:
        raise ValueError(f"不支持的故障类型: {lemma_id}")
    return trace.model_copy(update=update)
