# -*- coding: utf-8 -*-
"""
一维椭圆方程参数识别

−u″ + c·u = f, u(0) = u(1) = 0, 均匀网格二阶中心差分。
F: c ↦ u(c), F′(c)h = −A(c)⁻¹(u ⊙ h), A(c) 对称, 故 F′(c)*w = −u ⊙ A(c)⁻¹w。
"""

from typing import Optional

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from illposed_gd.core.exceptions import SingularSystemError
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


class DiffusionReactionSystem:
    """三对角系统 A(c) = (1/h²)·tridiag(−1, 2, −1) + diag(c)"""

    def __init__(self, source: Vector):
        self.source = as_vector(source)
        self.grid_size = self.source.shape[0]
        self.h = 1.0 / (self.grid_size + 1)

    def banded(self, c: Vector) -> np.ndarray:
        """solve_banded 使用的 (3, n) 带状存储, 每次调用新分配"""
        n = self.grid_size
        inv_h2 = 1.0 / self.h ** 2
        ab = np.empty((3, n))
        ab[0, :] = -inv_h2
        ab[1, :] = 2.0 * inv_h2 + np.asarray(c, dtype=np.float64)
        ab[2, :] = -inv_h2
        ab[0, 0] = 0.0
        ab[2, -1] = 0.0
        return ab

    def solve(self, c: Vector, rhs: np.ndarray) -> np.ndarray:
        try:
            solution = solve_banded((1, 1), self.banded(c), rhs)
        except (LinAlgError, ValueError) as e:
            raise SingularSystemError(f"A(c) 奇异或病态: {str(e)}") from e
        if not np.all(np.isfinite(solution)):
            raise SingularSystemError("A(c) 求解结果含非有限值")
        return solution

    def state(self, c: Vector) -> Vector:
        return self.solve(c, self.source)


def ode_operator(system: DiffusionReactionSystem, true_coefficient: Vector, ball: BallSpec) -> OperatorModel:
    def jacobian_apply(c: Vector, h: Vector) -> Vector:
        u = system.state(c)
        return -system.solve(c, u * h)

    def jacobian_adjoint_apply(c: Vector, w: Vector) -> Vector:
        u = system.state(c)
        return -u * system.solve(c, w)

    def jacobian(c: Vector) -> np.ndarray:
        u = system.state(c)
        return -system.solve(c, np.diag(u))

    return OperatorModel(
        apply=system.state,
        jacobian_apply=jacobian_apply,
        jacobian_adjoint_apply=jacobian_adjoint_apply,
        jacobian=jacobian,
        data=system.state(true_coefficient),
        domain=ball,
    )


def build_ode_parameter_id(
    grid_size: int,
    true_coefficient: Optional[Vector] = None,
    source: Optional[Vector] = None,
    radius: float = 2.0,
    inner_radius: Optional[float] = None,
    step_scale: Optional[float] = None,
) -> ProblemInstance:
    """由内部测量 u 识别反应系数 c, x* = true_coefficient"""
    if grid_size < 8:
        raise ValueError(f"网格点数至少为 8: {grid_size}")
    if true_coefficient is None:
        true_coefficient = 1.0 + smooth_profile(grid_size, amplitude=0.5)
    if source is None:
        source = smooth_profile(grid_size, amplitude=800.0)
    true_coefficient = as_vector(true_coefficient)
    source = as_vector(source)
    if true_coefficient.shape[0] != grid_size or source.shape[0] != grid_size:
        raise ValueError(
            f"系数维数 {true_coefficient.shape[0]} / 源项维数 {source.shape[0]} 与网格点数 {grid_size} 不一致"
        )
    if np.any(true_coefficient < 0.0):
        raise ValueError("真实系数必须非负")

    ball = BallSpec(
        center=true_coefficient,
        radius=radius,
        inner_radius=0.25 * radius if inner_radius is None else inner_radius,
    )
    system = DiffusionReactionSystem(source)
    operator = ode_operator(system, true_coefficient, ball)
    functional = scaled_least_squares(operator, step_scale)
    logger.debug(f"参数识别问题构造完成: n={grid_size}, ρ={radius}, s={functional.step_scale:.4e}")

    return ProblemInstance(
        name="ode-param",
        operator=operator,
        exact_functional=functional,
        ball=ball,
        default_x0_offset=as_vector(smooth_profile(grid_size, amplitude=0.1)),
        parameters={"grid_size": grid_size, "radius": radius, "step_scale": functional.step_scale},
    )


class OdeParameterProblem(ProblemBuilder):
    """参数识别问题构造器"""

    @property
    def metadata(self) -> ProblemMetadata:
        return ProblemMetadata(
            name="ode-param",
            description="−u″ + c·u = f 的系数识别, 内部测量",
            parameters=[
                ProblemParameter(name="grid_size", type="integer", description="网格点数 ≥ 8", default=32),
                ProblemParameter(name="true_coefficient", type="array", description="真实系数 c* ≥ 0"),
                ProblemParameter(name="source", type="array", description="源项 f"),
                ProblemParameter(name="radius", type="number", description="球半径 ρ", default=2.0),
                ProblemParameter(name="inner_radius", type="number", description="内半径 ρ₀"),
                ProblemParameter(name="step_scale", type="number", description="步长缩放"),
            ],
            tags=["参数识别", "椭圆方程"],
        )

    def build(self, **kwargs) -> ProblemInstance:
        grid_size = int(kwargs.pop("grid_size"))
        return build_ode_parameter_id(grid_size, **kwargs)
