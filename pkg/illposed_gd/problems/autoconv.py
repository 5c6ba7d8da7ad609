# -*- coding: utf-8 -*-
"""
离散自卷积问题

F(x)_i = (1/n)·Σ_{j≤i} x_{i−j}·x_j (矩形公式), F′(x)h = (2/n)·T(x)h,
T(x) 为以 x 为首列的下三角 Toeplitz 矩阵。
"""

from typing import Optional

import numpy as np
from scipy.linalg import toeplitz

from illposed_gd.core.logger import logger
from illposed_gd.core.space import BallSpec, Vector, as_vector
from illposed_gd.models.functional import OperatorModel
from illposed_gd.problems.base import (
    ProblemBuilder,
    ProblemInstance,
    ProblemMetadata,
    ProblemParameter,
    scaled_least_squares,
    smooth_profile,
)


def autoconvolve(x: Vector) -> Vector:
    n = x.shape[0]
    return np.convolve(x, x)[:n] / n


def autoconv_jacobian(x: Vector) -> np.ndarray:
    n = x.shape[0]
    return (2.0 / n) * toeplitz(x, np.zeros(n))


def autoconv_operator(true_signal: Vector, ball: BallSpec) -> OperatorModel:
    n = true_signal.shape[0]

    def jacobian_apply(x: Vector, h: Vector) -> Vector:
        return (2.0 / n) * np.convolve(x, h)[:n]

    def jacobian_adjoint_apply(x: Vector, w: Vector) -> Vector:
        # T(x)ᵀw 的第 j 个分量为 Σ_{i≥j} x_{i−j}·w_i
        return (2.0 / n) * np.correlate(w, x, mode="full")[n - 1:]

    return OperatorModel(
        apply=autoconvolve,
        jacobian_apply=jacobian_apply,
        jacobian_adjoint_apply=jacobian_adjoint_apply,
        jacobian=autoconv_jacobian,
        data=autoconvolve(true_signal),
        domain=ball,
    )


def build_autoconvolution(
    grid_size: int,
    true_signal: Optional[Vector] = None,
    radius: float = 0.5,
    inner_radius: Optional[float] = None,
    step_scale: Optional[float] = None,
) -> ProblemInstance:
    """自卷积问题, x* = true_signal, y = F(x*)"""
    if grid_size < 8:
        raise ValueError(f"网格点数至少为 8: {grid_size}")
    if true_signal is None:
        true_signal = 1.0 + smooth_profile(grid_size, amplitude=0.5, frequency=2.0)
    true_signal = as_vector(true_signal)
    if true_signal.shape[0] != grid_size:
        raise ValueError(f"真实信号维数 {true_signal.shape[0]} 与网格点数 {grid_size} 不一致")

    ball = BallSpec(
        center=true_signal,
        radius=radius,
        inner_radius=0.25 * radius if inner_radius is None else inner_radius,
    )
    operator = autoconv_operator(true_signal, ball)
    functional = scaled_least_squares(operator, step_scale)

    direction = smooth_profile(grid_size)
    offset = 0.5 * radius * direction / np.linalg.norm(direction)
    logger.debug(f"自卷积问题构造完成: n={grid_size}, ρ={radius}, s={functional.step_scale:.4e}")

    return ProblemInstance(
        name="autoconv",
        operator=operator,
        exact_functional=functional,
        ball=ball,
        default_x0_offset=as_vector(offset),
        parameters={"grid_size": grid_size, "radius": radius, "step_scale": functional.step_scale},
    )


class AutoconvolutionProblem(ProblemBuilder):
    """自卷积问题构造器"""

    @property
    def metadata(self) -> ProblemMetadata:
        return ProblemMetadata(
            name="autoconv",
            description="矩形公式离散的自卷积, 切锥条件可能很紧甚至失效",
            parameters=[
                ProblemParameter(name="grid_size", type="integer", description="网格点数 ≥ 8", default=32),
                ProblemParameter(name="true_signal", type="array", description="真实信号 x*"),
                ProblemParameter(name="radius", type="number", description="球半径 ρ", default=0.5),
                ProblemParameter(name="inner_radius", type="number", description="内半径 ρ₀"),
                ProblemParameter(name="step_scale", type="number", description="步长缩放"),
            ],
            tags=["二次非线性", "诊断"],
        )

    def build(self, **kwargs) -> ProblemInstance:
        grid_size = int(kwargs.pop("grid_size"))
        return build_autoconvolution(grid_size, **kwargs)
