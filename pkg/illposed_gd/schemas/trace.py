# -*- coding: utf-8 -*-
"""
迭代轨迹数据模型
"""

from enum import Enum
from typing import Any, List, Optional

from pydantic import BaseModel, Field, field_serializer, field_validator, model_validator

from illposed_gd.core.space import Vector, as_vector, vector_to_list


class TraceKind(str, Enum):
    """轨迹类型枚举"""
    EXACT = "exact"
    NOISY = "noisy"


class IterationTrace(BaseModel):
    """逐步记录: 迭代点、误差 ‖e_k‖、泛函值、梯度范数、⟨∇J_k, e_k⟩

    逃逸时最后一项为首个越出球的迭代点, escaped_at = stopped_at。
    """

    kind: TraceKind
    problem: str = ""
    iterates: List[Any] = Field(default_factory=list)
    errors: List[float] = Field(default_factory=list)
    values: List[float] = Field(default_factory=list)
    grad_norms: List[float] = Field(default_factory=list)
    inner_products: List[float] = Field(default_factory=list)
    # 噪声轨迹上的精确 J(x^δ_k), track_exact 关闭时为 None
    exact_values: Optional[List[float]] = None
    escaped_at: Optional[int] = None
    stopped_at: int = 0
    delta: float = 0.0
    data_noise_level: float = 0.0
    seed: Optional[int] = None
    planned_steps: int = 0

    @field_validator("iterates", mode="before")
    @classmethod
    def _coerce_iterates(cls, value: Any) -> List[Vector]:
        return [as_vector(x) for x in value]

    @field_serializer("iterates")
    def _serialize_iterates(self, iterates: List[Vector]) -> List[list]:
        return [vector_to_list(x) for x in iterates]

    @model_validator(mode="after")
    def _check_lengths(self) -> "IterationTrace":
        expected = self.stopped_at + 1
        lists = [self.iterates, self.errors, self.values, self.grad_norms, self.inner_products]
        if self.exact_values is not None:
            lists.append(self.exact_values)
        if any(len(items) != expected for items in lists):
            raise ValueError(f"轨迹各列表长度必须为 stopped_at + 1 = {expected}")
        return self

    @property
    def track_exact(self) -> bool:
        return self.exact_values is not None

    @property
    def escaped(self) -> bool:
        return self.escaped_at is not None

    @property
    def steps(self) -> int:
        """已完成的步数"""
        return self.stopped_at

    @property
    def in_ball_steps(self) -> int:
        """两端均在球内的步数"""
        return self.stopped_at - 1 if self.escaped else self.stopped_at
