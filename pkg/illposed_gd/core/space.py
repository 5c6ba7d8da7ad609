# -*- coding: utf-8 -*-
"""
有限维实 Hilbert 空间: 向量、内积、范数与球 B_ρ(x*)

向量以只读 float64 一维 numpy 数组表示, 构造后不可变。
"""

from typing import Any, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, field_serializer, field_validator, model_validator

from illposed_gd.core.exceptions import DimensionMismatchError, NonFiniteVectorError

Vector = np.ndarray
VectorLike = Union[Sequence[float], np.ndarray]


def as_vector(values: VectorLike) -> Vector:
    """转换为只读向量并校验有限性"""
    vec = np.array(values, dtype=np.float64, copy=True)
    if vec.ndim == 0:
        vec = vec.reshape(1)
    if vec.ndim != 1:
        raise DimensionMismatchError(f"向量必须是一维的, 实际形状: {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise NonFiniteVectorError("向量含有 NaN 或 Inf")
    vec.setflags(write=False)
    return vec


def check_same_dimension(a: Vector, b: Vector) -> None:
    if a.shape != b.shape:
        raise DimensionMismatchError(f"维数不一致: {a.shape[0]} != {b.shape[0]}")


def inner(a: Vector, b: Vector) -> float:
    """欧氏内积 ⟨a, b⟩"""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    check_same_dimension(a, b)
    return float(np.dot(a, b))


def norm(a: Vector) -> float:
    """‖a‖ = sqrt(⟨a, a⟩)"""
    a = np.asarray(a, dtype=np.float64)
    return float(np.sqrt(np.dot(a, a)))


def vector_to_list(vec: Vector) -> list:
    return [float(v) for v in np.asarray(vec).ravel()]


class BallSpec(BaseModel):
    """闭球 B_ρ(x*), 带内半径 ρ₀ (平衡条件使用)"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    center: Any
    radius: float
    inner_radius: float = 0.0

    @field_validator("center", mode="before")
    @classmethod
    def _coerce_center(cls, value: Any) -> Vector:
        return as_vector(value)

    @model_validator(mode="after")
    def _check_radii(self) -> "BallSpec":
        if not self.radius > 0:
            raise ValueError(f"半径必须为正: {self.radius}")
        if not 0 <= self.inner_radius < self.radius:
            raise ValueError(f"需要 0 ≤ ρ₀ < ρ, 实际 ρ₀={self.inner_radius}, ρ={self.radius}")
        return self

    @field_serializer("center")
    def _serialize_center(self, center: Vector) -> list:
        return vector_to_list(center)

    @property
    def dimension(self) -> int:
        return int(self.center.shape[0])

    def distance(self, x: Vector) -> float:
        """‖x − x*‖"""
        x = np.asarray(x, dtype=np.float64)
        check_same_dimension(x, self.center)
        return norm(x - self.center)

    def error(self, x: Vector) -> Vector:
        """e = x − x*"""
        x = np.asarray(x, dtype=np.float64)
        check_same_dimension(x, self.center)
        return x - self.center

    def clearance(self, x: Vector) -> float:
        """到球面的距离 (球外为负)"""
        return self.radius - self.distance(x)


def in_ball(ball: BallSpec, x: Vector) -> bool:
    """x ∈ B_ρ(x*) ⇔ ‖x − x*‖ ≤ ρ (闭球)"""
    return ball.distance(x) <= ball.radius


def escaped(ball: BallSpec, x: Vector) -> bool:
    """逃逸判定: 严格超出 ρ"""
    return ball.distance(x) > ball.radius


def scaled_margin(lhs: float, rhs: float) -> float:
    """不等式 lhs ≤ rhs 的缩放余量 (rhs − lhs) / max(1, |lhs|, |rhs|), 负值表示违反"""
    return float((rhs - lhs) / max(1.0, abs(lhs), abs(rhs)))


def relative_margin(lhs: float, rhs: float) -> float:
    """不等式 lhs ≤ rhs 的相对余量, 只按两侧量级缩放"""
    scale = max(abs(lhs), abs(rhs))
    if scale == 0.0:
        return 0.0
    return float((rhs - lhs) / scale)
