# -*- coding: utf-8 -*-
"""
泛函模型: J, ∇J, L 以及带噪声的 J^δ

最小二乘泛函 J(x) = s·½‖F(x) − y‖², 步长 s 编码在泛函内部。
"""

from typing import Any, Callable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator

from illposed_gd.core.config import settings
from illposed_gd.core.exceptions import DimensionMismatchError, RefusalError
from illposed_gd.core.logger import logger
from illposed_gd.core.sampling import BallSampler, make_rng, unit_directions
from illposed_gd.core.space import BallSpec, Vector, as_vector, norm, vector_to_list


class FunctionalModel(BaseModel):
    """精确数据泛函 J: 取值、梯度与声明的 Lipschitz 常数"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    evaluate: Callable[[Vector], float]
    gradient: Callable[[Vector], Vector]
    lipschitz: float = Field(..., ge=0.0)
    domain: BallSpec
    step_scale: float = 1.0


class OperatorModel(BaseModel):
    """正问题算子 F 及其 Jacobian 作用与伴随作用"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    apply: Callable[[Vector], Vector]
    jacobian_apply: Callable[[Vector, Vector], Vector]
    jacobian_adjoint_apply: Callable[[Vector, Vector], Vector]
    data: Any
    domain: BallSpec
    # 可选的稠密 Jacobian, 用于计算 ‖F′(x)‖
    jacobian: Optional[Callable[[Vector], np.ndarray]] = None
    is_linear: bool = False

    @field_validator("data", mode="before")
    @classmethod
    def _coerce_data(cls, value: Any) -> Vector:
        return as_vector(value)

    @property
    def range_dimension(self) -> int:
        return int(self.data.shape[0])

    def jacobian_norm(self, x: Vector, iterations: int = 50) -> float:
        """‖F′(x)‖ (谱范数); 无稠密 Jacobian 时用幂迭代"""
        if self.jacobian is not None:
            return float(np.linalg.norm(self.jacobian(x), 2))
        h = np.ones(self.domain.dimension) / np.sqrt(self.domain.dimension)
        sigma = 0.0
        for _ in range(iterations):
            w = self.jacobian_adjoint_apply(x, self.jacobian_apply(x, h))
            w_norm = norm(w)
            if w_norm == 0.0:
                return 0.0
            sigma = np.sqrt(w_norm)
            h = w / w_norm
        return float(sigma)


class PhiBound(BaseModel):
    """φ(s) = C·s, 满足 ‖∇J^δ(x)‖² ≤ φ(J^δ(x))"""

    model_config = ConfigDict(frozen=True)

    coefficient: float = Field(..., gt=0.0)

    def __call__(self, value: float) -> float:
        return self.coefficient * value


class NoiseBounds(BaseModel):
    """球上采样得到的上确界估计 (已乘安全系数)"""

    model_config = ConfigDict(frozen=True)

    jacobian_sup: float
    residual_sup: float
    samples: int


class NoisyFunctional(BaseModel):
    """带噪声泛函 J^δ 及噪声元数据 (δ, ψ(δ), L_δ)"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    model: FunctionalModel
    delta: float = Field(..., ge=0.0)
    psi_delta: float = Field(..., ge=0.0)
    lipschitz_noisy: float = Field(..., gt=0.0)
    data_noise_level: float = 0.0
    seed: int = 0
    noisy_data: Any = None
    bounds: Optional[NoiseBounds] = None

    @field_serializer("noisy_data")
    def _serialize_noisy_data(self, value: Any) -> Optional[list]:
        return None if value is None else vector_to_list(value)

    def phi_bound(self) -> PhiBound:
        """最小二乘情形的解析 φ 系数 2·s·Ĉ_F′²"""
        if self.bounds is None:
            raise RefusalError("缺少上确界估计, 无法给出解析 φ 系数")
        coefficient = 2.0 * self.model.step_scale * self.bounds.jacobian_sup ** 2
        return PhiBound(coefficient=max(coefficient, np.finfo(float).tiny))


def least_squares_functional(
    op: OperatorModel,
    observed: Vector,
    step_scale: float,
    lipschitz: Optional[float] = None,
) -> FunctionalModel:
    """J(x) = s·½‖F(x) − y‖², ∇J(x) = s·F′(x)*(F(x) − y)

    lipschitz 为未缩放梯度的 Lipschitz 常数; 缺省时按采样估计。
    """
    observed = as_vector(observed)
    if observed.shape != op.data.shape:
        raise DimensionMismatchError(
            f"观测数据维数 {observed.shape[0]} 与算子值域维数 {op.data.shape[0]} 不一致"
        )
    if not step_scale > 0:
        raise ValueError(f"步长缩放必须为正: {step_scale}")

    def evaluate(x: Vector) -> float:
        residual = op.apply(x) - observed
        return float(step_scale * 0.5 * np.dot(residual, residual))

    def gradient(x: Vector) -> Vector:
        residual = op.apply(x) - observed
        return step_scale * np.asarray(op.jacobian_adjoint_apply(x, residual), dtype=np.float64)

    if lipschitz is None:
        from illposed_gd.services.conditions import estimate_lipschitz

        def unscaled_gradient(x: Vector) -> Vector:
            return np.asarray(op.jacobian_adjoint_apply(x, op.apply(x) - observed), dtype=np.float64)

        unscaled = FunctionalModel(
            evaluate=lambda x: float(0.5 * np.sum((op.apply(x) - observed) ** 2)),
            gradient=unscaled_gradient,
            lipschitz=0.0,
            domain=op.domain,
        )
        lipschitz = estimate_lipschitz(
            unscaled, op.domain, settings.LIPSCHITZ_SAMPLES, settings.LIPSCHITZ_SEED
        ).value or 0.0

    return FunctionalModel(
        evaluate=evaluate,
        gradient=gradient,
        lipschitz=step_scale * lipschitz,
        domain=op.domain,
        step_scale=step_scale,
    )


def estimate_noise_bounds(
    op: OperatorModel,
    samples: int = None,
    seed: int = None,
) -> NoiseBounds:
    """采样估计 sup‖F′(x)‖ 与 sup‖F(x) − y‖

    非线性算子乘以安全系数; 线性算子的 Jacobian 范数与 x 无关, 采样值即精确值。
    """
    samples = samples or settings.BOUND_SAMPLES
    seed = settings.BOUND_SEED if seed is None else seed
    sampler = BallSampler(op.domain, seed)
    points = np.vstack([op.domain.center[None, :], sampler.points(samples)])

    jacobian_sup = 0.0
    residual_sup = 0.0
    for x in points:
        jacobian_sup = max(jacobian_sup, op.jacobian_norm(x))
        residual_sup = max(residual_sup, norm(op.apply(x) - op.data))

    factor = settings.SAFETY_FACTOR
    return NoiseBounds(
        jacobian_sup=jacobian_sup if op.is_linear else factor * jacobian_sup,
        residual_sup=factor * residual_sup,
        samples=int(points.shape[0]),
    )


def make_noisy(
    op: OperatorModel,
    exact: FunctionalModel,
    data_noise_level: float,
    seed: int,
    bounds: Optional[NoiseBounds] = None,
) -> NoisyFunctional:
    """合成噪声数据 y^δ = y + level·e 并构造 J^δ

    δ = s·Ĉ_F′·level, ψ(δ) = s·(Ĉ_res·level + ½·level²), L_δ = L + δ。
    """
    if not data_noise_level > 0:
        raise ValueError(f"数据噪声水平必须为正: {data_noise_level}")
    bounds = bounds or estimate_noise_bounds(op)

    direction = unit_directions(make_rng(seed), 1, op.range_dimension)[0]
    noisy_data = as_vector(op.data + data_noise_level * direction)

    step_scale = exact.step_scale
    noisy_model = least_squares_functional(
        op, noisy_data, step_scale, lipschitz=exact.lipschitz / step_scale
    )
    delta = step_scale * bounds.jacobian_sup * data_noise_level
    psi_delta = step_scale * (bounds.residual_sup * data_noise_level + 0.5 * data_noise_level ** 2)
    lipschitz_noisy = exact.lipschitz + delta

    noisy_model = noisy_model.model_copy(update={"lipschitz": lipschitz_noisy})
    logger.debug(f"噪声泛函构造完成: level={data_noise_level}, δ={delta:.3e}, ψ={psi_delta:.3e}")
    return NoisyFunctional(
        model=noisy_model,
        delta=delta,
        psi_delta=psi_delta,
        lipschitz_noisy=max(lipschitz_noisy, np.finfo(float).tiny),
        data_noise_level=data_noise_level,
        seed=seed,
        noisy_data=noisy_data,
        bounds=bounds,
    )


def exact_as_noisy(exact: FunctionalModel) -> NoisyFunctional:
    """δ = 0 的退化噪声泛函"""
    return NoisyFunctional(
        model=exact,
        delta=0.0,
        psi_delta=0.0,
        lipschitz_noisy=max(exact.lipschitz, np.finfo(float).tiny),
    )


def gradient_check(model: FunctionalModel, x: Vector, h: float) -> float:
    """解析梯度与中心差分的逐分量最大相对误差

    误差为 max_i |g_i − d_i| / max(‖g‖_∞, ‖d‖_∞): 每个分量都相对于梯度的最大分量度量。
    接近零的分量不以自身为分母, 其差分舍入误差 (约 ε·J/h) 不会被放大。
    """
    x = as_vector(x)
    if not h > 0:
        raise ValueError(f"差分步长必须为正: {h}")
    if model.domain.clearance(x) <= h:
        raise RefusalError(f"点距球面不足 h={h}, 拒绝做差分检验")

    analytic = np.asarray(model.gradient(x), dtype=np.float64)
    numeric = np.empty_like(analytic)
    for i in range(x.shape[0]):
        step = np.zeros_like(x)
        step[i] = h
        numeric[i] = (model.evaluate(x + step) - model.evaluate(x - step)) / (2.0 * h)

    scale = max(float(np.max(np.abs(analytic))), float(np.max(np.abs(numeric))), 1e-12)
    return float(np.max(np.abs(analytic - numeric)) / scale)
