# -*- coding: utf-8 -*-
"""
非线性条件的采样估计与证伪

所有估计量只依赖 (seed, samples), 归约按样本序号顺序进行。
估计量给出样本上的极值: 可以证伪条件, 但只能为其提供证据。
"""

import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from illposed_gd.core.config import settings
from illposed_gd.core.logger import logger
from illposed_gd.core.sampling import BallSampler, unit_directions
from illposed_gd.core.space import BallSpec, Vector, inner, norm, relative_margin, vector_to_list
from illposed_gd.models.functional import (
    FunctionalModel,
    NoisyFunctional,
    OperatorModel,
    PhiBound,
    exact_as_noisy,
)
from illposed_gd.problems.base import AnalyticFacts
from illposed_gd.schemas.reports import (
    CheckOutcome,
    ConditionReport,
    DerivedPair,
    Estimate,
    EstimateStatus,
    Gamma,
    GammaMarker,
    RatioRow,
    Witness,
)

RATIO_SCALES = [1.0, 0.5, 0.25, 0.1, 0.01]


def gamma_value(gamma: Gamma) -> float:
    """γ 的数值; 无穷标记映射为 inf"""
    if isinstance(gamma, GammaMarker):
        return math.inf
    return float(gamma)


def _witness(label: str, points: Sequence[Vector], quantity: float, threshold: Optional[float] = None) -> Witness:
    return Witness(
        label=label,
        points=[vector_to_list(p) for p in points],
        quantity=float(quantity),
        threshold=threshold,
    )


def _evaluate_all(model: FunctionalModel, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    values = np.array([model.evaluate(x) for x in points])
    gradients = np.array([np.asarray(model.gradient(x), dtype=np.float64) for x in points])
    return values, gradients.reshape(points.shape[0], -1)


def _cone_pairs(ball: BallSpec, samples: int, seed: int) -> List[Tuple[Vector, Vector]]:
    """(x, x̃) 点对, 两种顺序都包含"""
    firsts, seconds = BallSampler(ball, seed).pairs(samples)
    pairs = list(zip(firsts, seconds))
    pairs.extend(zip(seconds, firsts))
    return pairs


def _default_residual_floor(op: OperatorModel) -> float:
    return 1e-10 * max(1.0, norm(op.data))


def estimate_lipschitz(model: FunctionalModel, ball: BallSpec, samples: int, seed: int) -> Estimate:
    """max ‖∇J(x₁) − ∇J(x₂)‖ / ‖x₁ − x₂‖ over sampled pairs, 含近距点对"""
    if samples < 2:
        raise ValueError(f"Lipschitz 估计至少需要 2 个样本: {samples}")

    firsts, seconds = BallSampler(ball, seed).pairs(samples)
    best = 0.0
    extremal = None
    excluded = 0
    for x1, x2 in zip(firsts, seconds):
        distance = norm(x1 - x2)
        if distance == 0.0:
            excluded += 1
            continue
        ratio = norm(np.asarray(model.gradient(x1)) - np.asarray(model.gradient(x2))) / distance
        if ratio > best or extremal is None:
            best = max(best, ratio)
            extremal = (x1, x2)

    return Estimate(
        name="lipschitz",
        value=best,
        status=EstimateStatus.LOWER_BOUND,
        samples=int(firsts.shape[0]),
        excluded=excluded,
        extremal=_witness("lipschitz", extremal, best) if extremal is not None else None,
    )


def estimate_beta(
    model: FunctionalModel,
    ball: BallSpec,
    gamma: Gamma,
    samples: int,
    grad_floor: Optional[float] = None,
    seed: int = 0,
) -> Estimate:
    """N(γ,β) 的最小相容 β: max −⟨∇J(x₂), x₂ − x₁⟩ / ‖∇J(x₂)‖²

    候选点对与 γ 无关, 可容许集合随 γ 增大, 因此估计值关于 γ 单调不减。
    """
    if samples < 1:
        raise ValueError(f"样本数必须为正: {samples}")
    if grad_floor is None:
        grad_floor = 1e-8 * (1.0 + model.lipschitz * ball.radius)
    if not grad_floor > 0:
        raise ValueError(f"梯度下限必须为正: {grad_floor}")
    g = gamma_value(gamma)

    sampler = BallSampler(ball, seed)
    firsts, seconds = sampler.pairs(samples)
    anchors = sampler.points(samples)
    center = ball.center

    first_values, first_grads = _evaluate_all(model, firsts)
    second_values, second_grads = _evaluate_all(model, seconds)
    anchor_values, anchor_grads = _evaluate_all(model, anchors)

    # (x*, x₂), (x₂, x₂), (x₁, x₂), (x₂, x₁)
    candidates = []
    for i in range(anchors.shape[0]):
        candidates.append((center, anchors[i], anchor_values[i], anchor_grads[i], True))
    for i in range(seconds.shape[0]):
        candidates.append((seconds[i], seconds[i], second_values[i], second_grads[i], g >= 1.0))
    for i in range(firsts.shape[0]):
        candidates.append((firsts[i], seconds[i], second_values[i], second_grads[i], first_values[i] <= g * second_values[i]))
        candidates.append((seconds[i], firsts[i], first_values[i], first_grads[i], second_values[i] <= g * first_values[i]))

    best = None
    extremal = None
    admissible = 0
    excluded = 0
    below_floor = []
    for x1, x2, _, grad2, is_admissible in candidates:
        if not is_admissible:
            continue
        admissible += 1
        grad_sq = float(np.dot(grad2, grad2))
        product = float(np.dot(grad2, x2 - x1))
        if math.sqrt(grad_sq) < grad_floor:
            excluded += 1
            below_floor.append((x1, x2, product, grad_sq))
            continue
        ratio = -product / grad_sq
        if best is None or ratio > best:
            best = ratio
            extremal = (x1, x2)

    parameters = {"gamma": g if math.isfinite(g) else GammaMarker.INFINITY.value, "grad_floor": grad_floor}
    if best is None:
        logger.warning(f"⚠️ β 估计无结论: γ={parameters['gamma']}, 无梯度高于下限的可容许点对")
        return Estimate(
            name="beta",
            status=EstimateStatus.INCONCLUSIVE,
            samples=admissible,
            excluded=excluded,
            parameters=parameters,
        )

    # 梯度低于下限的点对不做除法, 直接验证 ⟨∇J(x₂), x₂ − x₁⟩ ≥ −β̂·floor² (或按自身梯度成立)
    sampled = best
    tolerance = settings.CHECK_TOLERANCE * max(1.0, abs(sampled))
    witnesses = []
    violations = 0
    for x1, x2, product, grad_sq in below_floor:
        needed = -product / grad_floor ** 2
        if grad_sq > 0.0:
            needed = min(needed, -product / grad_sq)
        if needed - sampled <= tolerance:
            continue
        violations += 1
        if len(witnesses) < 3:
            witnesses.append(_witness("beta_below_floor", (x1, x2), needed, threshold=sampled))
        if needed > best:
            best = needed
            extremal = (x1, x2)
    parameters["below_floor_violations"] = violations
    if violations:
        logger.warning(f"⚠️ β 估计: {violations} 个低于梯度下限的点对未通过验证, β̂ 由 {sampled:.6e} 提升到 {best:.6e}")

    return Estimate(
        name="beta",
        value=best,
        status=EstimateStatus.LOWER_BOUND,
        samples=admissible,
        excluded=excluded,
        extremal=_witness("beta", extremal, best),
        witnesses=witnesses,
        parameters=parameters,
    )


def estimate_eta_weak(
    op: OperatorModel,
    ball: BallSpec,
    samples: int,
    residual_floor: Optional[float] = None,
    seed: int = 0,
) -> Estimate:
    """弱切锥常数: max ⟨F(x) − F(x*) − F′(x)(x − x*), F(x) − F(x*)⟩ / ‖F(x) − F(x*)‖²"""
    if samples < 1:
        raise ValueError(f"样本数必须为正: {samples}")
    residual_floor = _default_residual_floor(op) if residual_floor is None else residual_floor

    center = ball.center
    y_star = np.asarray(op.apply(center))
    best = None
    extremal = None
    excluded = 0
    points = BallSampler(ball, seed).points(samples)
    for x in points:
        residual = np.asarray(op.apply(x)) - y_star
        residual_norm = norm(residual)
        if residual_norm < residual_floor:
            excluded += 1
            continue
        remainder = residual - np.asarray(op.jacobian_apply(x, x - center))
        ratio = inner(remainder, residual) / residual_norm ** 2
        if best is None or ratio > best:
            best = ratio
            extremal = (x,)

    if best is None:
        return Estimate(name="eta_weak", status=EstimateStatus.INCONCLUSIVE, samples=0, excluded=excluded)
    value = max(best, 0.0)
    return Estimate(
        name="eta_weak",
        value=value,
        status=EstimateStatus.LOWER_BOUND,
        samples=int(points.shape[0]) - excluded,
        excluded=excluded,
        extremal=_witness("eta_weak", extremal, best),
        parameters={"residual_floor": residual_floor},
    )


def estimate_eta_strong(
    op: OperatorModel,
    ball: BallSpec,
    samples: int,
    residual_floor: Optional[float] = None,
    seed: int = 0,
) -> Estimate:
    """强切锥常数: max ‖F(x) − F(x̃) − F′(x)(x − x̃)‖ / ‖F(x) − F(x̃)‖"""
    if samples < 1:
        raise ValueError(f"样本数必须为正: {samples}")
    residual_floor = _default_residual_floor(op) if residual_floor is None else residual_floor

    best = None
    extremal = None
    excluded = 0
    pairs = _cone_pairs(ball, samples, seed)
    for x, x_tilde in pairs:
        difference = np.asarray(op.apply(x)) - np.asarray(op.apply(x_tilde))
        difference_norm = norm(difference)
        if difference_norm < residual_floor:
            excluded += 1
            continue
        remainder = difference - np.asarray(op.jacobian_apply(x, x - x_tilde))
        ratio = norm(remainder) / difference_norm
        if best is None or ratio > best:
            best = ratio
            extremal = (x, x_tilde)

    if best is None:
        return Estimate(name="eta_strong", status=EstimateStatus.INCONCLUSIVE, samples=0, excluded=excluded)
    return Estimate(
        name="eta_strong",
        value=best,
        status=EstimateStatus.LOWER_BOUND,
        samples=len(pairs) - excluded,
        excluded=excluded,
        extremal=_witness("eta_strong", extremal, best),
        parameters={"residual_floor": residual_floor},
    )


class _WorstTracker:
    """记录每个不等式的最差相对余量及其点"""

    def __init__(self):
        self.worst = {}
        self.checked = 0

    def add(self, label: str, lhs: float, rhs: float, points: Sequence[Vector]):
        margin = relative_margin(lhs, rhs)
        current = self.worst.get(label)
        if current is None or margin < current[0]:
            self.worst[label] = (margin, points)

    def outcome(self, name: str, parameters: dict) -> CheckOutcome:
        tolerance = settings.CHECK_TOLERANCE
        witnesses = [
            _witness(label, points, margin, threshold=-tolerance)
            for label, (margin, points) in sorted(self.worst.items())
            if margin < -tolerance
        ]
        worst_margin = min((margin for margin, _ in self.worst.values()), default=0.0)
        return CheckOutcome(
            name=name,
            passed=not witnesses,
            checked=self.checked,
            worst_margin=worst_margin,
            witnesses=witnesses,
            parameters=parameters,
        )


def check_cone_implications(
    eta: float,
    op: OperatorModel,
    ball: BallSpec,
    samples: int,
    seed: int,
    residual_floor: Optional[float] = None,
) -> CheckOutcome:
    """强切锥条件的两个推论: 双侧估计与展开形式的不等式"""
    if not 0 < eta < 1:
        raise ValueError(f"η 必须位于 (0, 1): {eta}")
    residual_floor = _default_residual_floor(op) if residual_floor is None else residual_floor

    tracker = _WorstTracker()
    for x, x_tilde in _cone_pairs(ball, samples, seed):
        difference = np.asarray(op.apply(x)) - np.asarray(op.apply(x_tilde))
        b = norm(difference)
        if b < residual_floor:
            continue
        linearized = np.asarray(op.jacobian_apply(x, x - x_tilde))
        a = norm(linearized)
        tracker.checked += 1
        points = (x, x_tilde)
        tracker.add("lower_two_sided", a / (1.0 + eta), b, points)
        tracker.add("upper_two_sided", b, a / (1.0 - eta), points)
        tracker.add(
            "expanded",
            0.5 * (1.0 - eta ** 2) * b ** 2 + 0.5 * a ** 2,
            inner(linearized, difference),
            points,
        )
    return tracker.outcome("cone_implications", {"eta": eta})


def estimate_tau_balancing(model: FunctionalModel, ball: BallSpec, gamma: float, samples: int, seed: int) -> Estimate:
    """平衡常数: 对每个 ρ₀ ≤ ‖z‖ ≤ ρ 二分求最大 τ ∈ [0,1] 使 J(x* − τz) ≤ γJ(x* + z), 取最小值"""
    if not gamma > 0:
        raise ValueError(f"γ 必须为正: {gamma}")
    if not ball.inner_radius > 0:
        raise ValueError("平衡条件需要正的内半径 ρ₀")

    sampler = BallSampler(ball, seed)
    offsets = np.vstack([
        sampler.axis_offsets([ball.inner_radius, ball.radius]),
        sampler.shell(samples, ball.inner_radius, ball.radius),
    ])
    center = ball.center
    tolerance = settings.TAU_TOLERANCE

    best = None
    extremal = None
    for z in offsets:
        target = gamma * model.evaluate(center + z)
        if model.evaluate(center - z) <= target:
            tau = 1.0
        else:
            lo, hi = 0.0, 1.0
            while hi - lo > tolerance:
                mid = 0.5 * (lo + hi)
                if model.evaluate(center - mid * z) <= target:
                    lo = mid
                else:
                    hi = mid
            tau = lo
        if best is None or tau < best:
            best = tau
            extremal = (center + z, center - tau * z)

    witnesses = []
    status = EstimateStatus.LOWER_BOUND
    if best == 0.0:
        status = EstimateStatus.FALSIFIED
        witnesses.append(_witness("tau_balancing", extremal, 0.0, threshold=0.0))
    return Estimate(
        name="tau_balancing",
        value=best,
        status=status,
        samples=int(offsets.shape[0]),
        extremal=_witness("tau_balancing", extremal, best),
        witnesses=witnesses,
        parameters={"gamma": gamma},
    )


def check_radial_monotonicity(
    op: OperatorModel,
    ball: BallSpec,
    eta: float,
    samples: int,
    grid: int,
    seed: int,
) -> CheckOutcome:
    """t ↦ t^(−2(1−η))·J_LS(x* + t(x − x*)) 在 (0,1] 上不减"""
    if not 0 <= eta <= 1:
        raise ValueError(f"η 必须位于 [0, 1]: {eta}")
    if grid < 3:
        raise ValueError(f"网格点数至少为 3: {grid}")

    center = ball.center
    ts = np.arange(1, grid + 1) / grid
    exponent = -2.0 * (1.0 - eta)
    worst = 0.0
    witnesses = []
    checked = 0
    for x in BallSampler(ball, seed).points(samples):
        direction = x - center
        if norm(direction) == 0.0:
            continue
        profile = np.array([
            t ** exponent * 0.5 * float(np.sum((np.asarray(op.apply(center + t * direction)) - op.data) ** 2))
            for t in ts
        ])
        scale = float(np.max(np.abs(profile)))
        if scale == 0.0:
            continue
        checked += 1
        steps = np.diff(profile) / scale
        step_min = float(np.min(steps))
        worst = min(worst, step_min)
        if step_min < -1e-10 and len(witnesses) < 3:
            k = int(np.argmin(steps))
            witnesses.append(_witness("radial_monotonicity", (x,), step_min, threshold=float(ts[k])))

    return CheckOutcome(
        name="radial_monotonicity",
        passed=not witnesses,
        checked=checked,
        worst_margin=worst,
        witnesses=witnesses,
        parameters={"eta": eta, "grid": grid},
    )


def check_quasiconvexity(
    model: FunctionalModel,
    ball: BallSpec,
    gamma: float,
    samples: int,
    grid: int,
    seed: int,
) -> CheckOutcome:
    """γ-拟凸性: J(x₁) ≤ γJ(x₂) ⇒ J(λx₁ + (1−λ)x₂) ≤ J(x₂), λ ∈ (0,1)"""
    if not 0 <= gamma <= 1:
        raise ValueError(f"γ 必须位于 [0, 1]: {gamma}")
    if grid < 3:
        raise ValueError(f"网格点数至少为 3: {grid}")

    sampler = BallSampler(ball, seed)
    firsts, seconds = sampler.pairs(samples)
    anchors = sampler.points(samples)
    pairs = [(ball.center, x2) for x2 in anchors]
    pairs.extend(zip(firsts, seconds))
    pairs.extend(zip(seconds, firsts))
    lambdas = np.arange(1, grid) / grid

    tracker = _WorstTracker()
    for x1, x2 in pairs:
        value_second = model.evaluate(x2)
        if not model.evaluate(x1) <= gamma * value_second and x1 is not ball.center:
            continue
        tracker.checked += 1
        peak = max(model.evaluate(lam * x1 + (1.0 - lam) * x2) for lam in lambdas)
        tracker.add("segment", peak, value_second, (x1, x2))
    return tracker.outcome("quasiconvexity", {"gamma": gamma, "grid": grid})


def balance_ratio_profile(
    model: FunctionalModel,
    ball: BallSpec,
    scales: Sequence[float],
    samples: int,
    seed: int,
) -> List[RatioRow]:
    """沿采样射线的 J(x* + Δ)/J(x* − Δ), 每个尺度给出最小值与最大值 (仅作诊断)"""
    sampler = BallSampler(ball, seed)
    directions = unit_directions(sampler.rng, max(samples, 1), ball.dimension)
    rows = []
    for scale in scales:
        ratios = []
        for u in directions:
            step = scale * ball.radius * u
            denominator = model.evaluate(ball.center - step)
            if denominator < settings.PHI_GUARD:
                continue
            ratios.append(model.evaluate(ball.center + step) / denominator)
        rows.append(RatioRow(
            scale=scale,
            minimum=min(ratios) if ratios else None,
            maximum=max(ratios) if ratios else None,
            samples=len(ratios),
        ))
    return rows


def derive_ncgb_from_cone(eta: float, jac_sup: float) -> DerivedPair:
    """强切锥常数 η < 1 ⇒ 最小二乘泛函满足 N(γ,β), γ 取上确界的 90%"""
    if not 0 < eta < 1:
        raise ValueError(f"η 必须位于 (0, 1): {eta}")
    if not jac_sup > 0:
        raise ValueError(f"sup‖F′‖ 必须为正: {jac_sup}")

    root = math.sqrt(1.0 - eta ** 2)
    gamma_sup = (root / (1.0 + root)) ** 2
    gamma = 0.9 * gamma_sup
    beta = -((1.0 - eta ** 2) * (1.0 - math.sqrt(gamma)) ** 2 - gamma) / (2.0 * jac_sup ** 2)
    return DerivedPair(eta=eta, jacobian_sup=jac_sup, gamma=gamma, gamma_sup=gamma_sup, beta=beta)


def calibrate_phi(noisy: NoisyFunctional, ball: BallSpec, samples: int, seed: int) -> Estimate:
    """φ 系数: max ‖∇J^δ(x)‖² / J^δ(x), 乘安全系数; J^δ(x) 低于保护值的样本剔除"""
    if samples < 1:
        raise ValueError(f"样本数必须为正: {samples}")

    best = None
    extremal = None
    excluded = 0
    points = BallSampler(ball, seed).points(samples)
    for x in points:
        value = noisy.model.evaluate(x)
        if value < settings.PHI_GUARD:
            excluded += 1
            continue
        gradient = np.asarray(noisy.model.gradient(x))
        ratio = float(np.dot(gradient, gradient)) / value
        if best is None or ratio > best:
            best = ratio
            extremal = (x,)

    if best is None:
        return Estimate(name="phi_coefficient", status=EstimateStatus.INCONCLUSIVE, excluded=excluded)
    return Estimate(
        name="phi_coefficient",
        value=settings.SAFETY_FACTOR * best,
        status=EstimateStatus.LOWER_BOUND,
        samples=int(points.shape[0]) - excluded,
        excluded=excluded,
        extremal=_witness("phi_coefficient", extremal, best),
    )


def phi_bound_from(estimate: Estimate) -> Optional[PhiBound]:
    if not estimate.conclusive or not estimate.value > 0:
        return None
    return PhiBound(coefficient=estimate.value)


def _falsify(estimate: Estimate, claimed: Optional[float], lower: bool = False, slack: float = 0.0) -> Estimate:
    """估计值与解析值矛盾时标记为已证伪

    上确界型估计 (L, β, η) 超出解析值即矛盾; lower=True 时为下确界型 (τ), 解析值高于估计值即矛盾。
    """
    if claimed is None or not estimate.conclusive:
        return estimate
    excess = claimed - estimate.value if lower else estimate.value - claimed
    if excess > slack + settings.CHECK_TOLERANCE * max(1.0, abs(claimed)):
        witness = estimate.extremal.model_copy(update={"threshold": claimed})
        return estimate.model_copy(update={"status": EstimateStatus.FALSIFIED, "witnesses": [witness]})
    return estimate


def analytic_estimates(facts: AnalyticFacts, balance_gamma: float) -> List[Estimate]:
    """解析常数作为 ANALYTIC 条目, 与采样估计并列报告"""
    entries = []
    for key, value in facts.model_dump().items():
        if value is None:
            continue
        if key == "balancing_exponent":
            entries.append(Estimate(
                name="tau_balancing_analytic",
                value=balance_gamma ** value,
                status=EstimateStatus.ANALYTIC,
                parameters={"gamma": balance_gamma, "exponent": value},
            ))
        else:
            entries.append(Estimate(name=f"{key}_analytic", value=value, status=EstimateStatus.ANALYTIC))
    return entries
    if estimate.value - claimed > settings.CHECK_TOLERANCE * max(1.0, abs(claimed)):
        witness = estimate.extremal.model_copy(update={"threshold": claimed})
        return estimate.model_copy(update={"status": EstimateStatus.FALSIFIED, "witnesses": [witness]})
    return estimate


def diagnose_conditions(
    instance,
    samples: int,
    seed: int,
    gamma: Gamma = 0.0,
    balance_gamma: float = 0.25,
    noisy: Optional[NoisyFunctional] = None,
) -> ConditionReport:
    """对一个问题实例运行全部估计量与检验"""
    if samples < 1:
        raise ValueError(f"样本数必须为正: {samples}")
    model = instance.exact_functional
    op = instance.operator
    ball = instance.ball
    facts = instance.analytic_facts

    lipschitz = _falsify(estimate_lipschitz(model, ball, max(samples, 2), seed), facts.lipschitz)
    beta_claim = facts.beta if gamma_value(gamma) == 0.0 else None
    beta = _falsify(estimate_beta(model, ball, gamma, samples, None, seed), beta_claim)
    eta_weak = _falsify(estimate_eta_weak(op, ball, samples, None, seed), facts.eta_weak)
    eta_strong = _falsify(estimate_eta_strong(op, ball, samples, None, seed), facts.eta_strong)
    phi = calibrate_phi(noisy or exact_as_noisy(model), ball, samples, seed)
    estimates = [lipschitz, beta, eta_weak, eta_strong, phi]

    tau = None
    if ball.inner_radius > 0:
        tau = estimate_tau_balancing(model, ball, balance_gamma, samples, seed)
        if facts.balancing_exponent is not None:
            tau = _falsify(tau, balance_gamma ** facts.balancing_exponent, lower=True, slack=settings.TAU_TOLERANCE)
        estimates.append(tau)

    checks = []
    derived = None
    tau_lower_bound = None
    beta_at_derived = None
    if eta_strong.conclusive and eta_strong.value < 1.0:
        eta = max(eta_strong.value, 1e-12)
        checks.append(check_cone_implications(eta, op, ball, samples, seed))
        jac_sup = facts.jacobian_sup or instance.noise_bounds().jacobian_sup
        derived = derive_ncgb_from_cone(eta, math.sqrt(model.step_scale) * jac_sup)
        beta_at_derived = estimate_beta(model, ball, derived.gamma, samples, None, seed).value
        tau_lower_bound = (1.0 - eta) * balance_gamma / (1.0 + eta)
    if eta_weak.conclusive:
        checks.append(check_radial_monotonicity(op, ball, min(eta_weak.value, 1.0), samples, 16, seed))
    checks.append(check_quasiconvexity(model, ball, min(gamma_value(gamma), 1.0), samples, 8, seed))

    witnesses = [w for estimate in estimates for w in estimate.witnesses]
    estimates.extend(analytic_estimates(facts, balance_gamma))
    witnesses.extend(w for check in checks for w in check.witnesses)
    if witnesses:
        logger.warning(f"⚠️ {instance.name}: 诊断发现 {len(witnesses)} 个违反见证")

    return ConditionReport(
        problem=instance.name,
        gamma=gamma,
        beta_hat=beta.value,
        eta_weak_hat=eta_weak.value,
        eta_strong_hat=eta_strong.value,
        tau_hat=tau.value if tau is not None else None,
        lipschitz_hat=lipschitz.value,
        phi_coefficient_hat=phi.value,
        samples=samples,
        seed=seed,
        witnesses=witnesses,
        estimates=estimates,
        checks=checks,
        derived_ncgb=derived,
        tau_lower_bound=tau_lower_bound,
        beta_at_derived_gamma=beta_at_derived,
        ratio_profile=balance_ratio_profile(model, ball, RATIO_SCALES, min(samples, 200), seed),
        analytic_facts=facts.model_dump(),
    )
