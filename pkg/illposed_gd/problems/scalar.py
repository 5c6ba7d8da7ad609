# -*- coding: utf-8 -*-
"""
标量二次算子 F(x) = x + x², y = 0, x* = 0

余项恒等式 F(x) − F(x̃) − F′(x)(x − x̃) = −(x − x̃)²。
"""

from typing import Optional

import numpy as np

from illposed_gd.core.space import BallSpec, as_vector
from illposed_gd.models.functional import OperatorModel, least_squares_functional
from illposed_gd.problems.base import (
    AnalyticFacts,
    ProblemBuilder,
    ProblemInstance,
    ProblemMetadata,
    ProblemParameter,
    auto_step_scale,
)


def scalar_operator(ball: BallSpec) -> OperatorModel:
    return OperatorModel(
        apply=lambda x: x + x ** 2,
        jacobian_apply=lambda x, h: (1.0 + 2.0 * x) * h,
        jacobian_adjoint_apply=lambda x, w: (1.0 + 2.0 * x) * w,
        jacobian=lambda x: np.diag(1.0 + 2.0 * x),
        data=np.zeros(1),
        domain=ball,
    )


def build_scalar_quadratic_operator(
    radius: float = 0.1,
    inner_radius: Optional[float] = None,
    step_scale: Optional[float] = None,
) -> ProblemInstance:
    """η_strong ≤ 2ρ/(1 − 2ρ), 要求 ρ < 0.25"""
    if not 0 < radius < 0.25:
        raise ValueError(f"半径必须位于 (0, 0.25), 否则 η 达到 1: {radius}")

    ball = BallSpec(
        center=np.zeros(1),
        radius=radius,
        inner_radius=0.25 * radius if inner_radius is None else inner_radius,
    )
    operator = scalar_operator(ball)

    # ½(x + x²)² 的二阶导数 (1 + 2x)² + 2(x + x²) 在 x = ρ 处最大
    lipschitz_unscaled = 1.0 + 6.0 * radius + 6.0 * radius ** 2
    step_scale = auto_step_scale(lipschitz_unscaled) if step_scale is None else step_scale
    functional = least_squares_functional(operator, operator.data, step_scale, lipschitz=lipschitz_unscaled)

    return ProblemInstance(
        name="scalar-quadratic",
        operator=operator,
        exact_functional=functional,
        ball=ball,
        default_x0_offset=as_vector([0.5 * radius]),
        analytic_facts=AnalyticFacts(
            lipschitz=step_scale * lipschitz_unscaled,
            eta_weak=radius / (1.0 - radius),
            eta_strong=2.0 * radius / (1.0 - 2.0 * radius),
            jacobian_sup=1.0 + 2.0 * radius,
        ),
        parameters={"radius": radius, "step_scale": step_scale},
    )


class ScalarQuadraticProblem(ProblemBuilder):
    """标量二次算子构造器"""

    @property
    def metadata(self) -> ProblemMetadata:
        return ProblemMetadata(
            name="scalar-quadratic",
            description="F(x) = x + x², 强切锥常数可手算",
            parameters=[
                ProblemParameter(name="radius", type="number", description="球半径 ρ < 0.25", default=0.1),
                ProblemParameter(name="inner_radius", type="number", description="内半径 ρ₀"),
                ProblemParameter(name="step_scale", type="number", description="步长缩放"),
            ],
            tags=["标量", "强切锥"],
        )

    def build(self, **kwargs) -> ProblemInstance:
        kwargs.pop("dimension", None)
        return build_scalar_quadratic_operator(**kwargs)
