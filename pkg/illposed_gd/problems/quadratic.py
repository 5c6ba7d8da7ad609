# -*- coding: utf-8 -*-
"""
病态二次问题: F(x) = A^{1/2}x, A = diag(spectrum), x* = 0
"""

from typing import List, Optional

import numpy as np

from illposed_gd.core.space import BallSpec, as_vector
from illposed_gd.models.functional import OperatorModel, least_squares_functional
from illposed_gd.problems.base import (
    AnalyticFacts,
    ProblemBuilder,
    ProblemInstance,
    ProblemMetadata,
    ProblemParameter,
)


def build_quadratic(
    dimension: int,
    spectrum: List[float],
    radius: float = 2.0,
    inner_radius: Optional[float] = None,
    step_scale: float = 1.0,
) -> ProblemInstance:
    """J(x) = ½ xᵀAx, ∇J = Ax, L = max(spectrum)"""
    spectrum = np.asarray(spectrum, dtype=np.float64)
    if spectrum.shape != (dimension,):
        raise ValueError(f"谱长度 {spectrum.shape} 与维数 {dimension} 不一致")
    if np.any(spectrum <= 0.0) or np.any(spectrum >= 1.0):
        raise ValueError(f"谱值必须位于 (0, 1): {spectrum.tolist()}")

    root = np.sqrt(spectrum)
    ball = BallSpec(
        center=np.zeros(dimension),
        radius=radius,
        inner_radius=0.25 * radius if inner_radius is None else inner_radius,
    )
    operator = OperatorModel(
        apply=lambda x: root * x,
        jacobian_apply=lambda x, h: root * h,
        jacobian_adjoint_apply=lambda x, w: root * w,
        jacobian=lambda x: np.diag(root),
        data=np.zeros(dimension),
        domain=ball,
        is_linear=True,
    )
    lam_max = float(np.max(spectrum))
    functional = least_squares_functional(operator, operator.data, step_scale, lipschitz=lam_max)

    return ProblemInstance(
        name="quadratic",
        operator=operator,
        exact_functional=functional,
        ball=ball,
        default_x0_offset=as_vector(np.ones(dimension) / np.sqrt(dimension)),
        analytic_facts=AnalyticFacts(
            lipschitz=step_scale * lam_max,
            eta_weak=0.0,
            eta_strong=0.0,
            beta=-1.0 / (step_scale * lam_max),
            jacobian_sup=float(np.sqrt(lam_max)),
            balancing_exponent=0.5,
        ),
        parameters={"dimension": dimension, "spectrum": spectrum.tolist(), "radius": radius},
    )


class QuadraticProblem(ProblemBuilder):
    """二次问题构造器"""

    @property
    def metadata(self) -> ProblemMetadata:
        return ProblemMetadata(
            name="quadratic",
            description="对角病态二次泛函, 所有条件可解析验证",
            parameters=[
                ProblemParameter(name="dimension", type="integer", description="维数", default=4),
                ProblemParameter(name="spectrum", type="array", description="A 的特征值, 位于 (0,1)"),
                ProblemParameter(name="radius", type="number", description="球半径 ρ", default=2.0),
                ProblemParameter(name="inner_radius", type="number", description="内半径 ρ₀"),
                ProblemParameter(name="step_scale", type="number", description="步长缩放", default=1.0),
            ],
            tags=["线性", "闭式解"],
        )

    def build(self, **kwargs) -> ProblemInstance:
        dimension = int(kwargs.pop("dimension"))
        spectrum = kwargs.pop("spectrum", None)
        if spectrum is None:
            # 默认谱 0.5, 0.5/4, 0.5/16, ...
            spectrum = [0.5 * 0.25 ** i for i in range(dimension)]
        return build_quadratic(dimension, spectrum, **kwargs)
