# -*- coding: utf-8 -*-
"""
测试问题基础类与注册表
"""

from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, PrivateAttr

from illposed_gd.core.space import BallSpec, Vector, as_vector
from illposed_gd.models.functional import (
    FunctionalModel,
    NoiseBounds,
    OperatorModel,
    estimate_noise_bounds,
    least_squares_functional,
)


class ProblemParameter(BaseModel):
    """问题参数模型"""
    name: str
    type: str
    description: str
    required: bool = False
    default: Optional[Any] = None


class ProblemMetadata(BaseModel):
    """问题元数据"""
    name: str
    description: str
    parameters: List[ProblemParameter]
    tags: List[str] = []


class AnalyticFacts(BaseModel):
    """可解析推导的常数 (未知时为 None)"""
    lipschitz: Optional[float] = None
    eta_weak: Optional[float] = None
    eta_strong: Optional[float] = None
    beta: Optional[float] = None
    jacobian_sup: Optional[float] = None
    # τ(γ) = γ^exponent
    balancing_exponent: Optional[float] = None


class ProblemInstance(BaseModel):
    """具有已知 x* 的基准问题"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str
    operator: OperatorModel
    exact_functional: FunctionalModel
    ball: BallSpec
    default_x0_offset: Any
    analytic_facts: AnalyticFacts = AnalyticFacts()
    parameters: Dict[str, Any] = {}

    _noise_bounds: Optional[NoiseBounds] = PrivateAttr(default=None)

    @property
    def step_scale(self) -> float:
        return self.exact_functional.step_scale

    @property
    def solution(self) -> Vector:
        return self.ball.center

    def noise_bounds(self) -> NoiseBounds:
        """上确界估计只依赖算子和球, 每个实例只算一次"""
        if self._noise_bounds is None:
            self._noise_bounds = estimate_noise_bounds(self.operator)
        return self._noise_bounds

    def x0_from_offset(self, offset: Optional[Any] = None) -> Vector:
        offset = self.default_x0_offset if offset is None else offset
        return as_vector(self.ball.center + as_vector(offset))


class ProblemBuilder(ABC):
    """问题构造器基础类"""

    @property
    @abstractmethod
    def metadata(self) -> ProblemMetadata:
        """返回问题元数据"""
        pass

    @abstractmethod
    def build(self, **kwargs) -> ProblemInstance:
        """构造问题实例"""
        pass

    def validate_parameters(self, **kwargs) -> Dict[str, Any]:
        """验证参数"""
        known = {param.name for param in self.metadata.parameters}
        unknown = set(kwargs) - known
        if unknown:
            raise ValueError(f"问题 {self.metadata.name} 不接受参数: {sorted(unknown)}")

        validated = {}
        for param in self.metadata.parameters:
            value = kwargs.get(param.name)

            if param.required and value is None:
                raise ValueError(f"缺少必需参数: {param.name}")

            if value is None and param.default is not None:
                value = param.default

            if value is not None:
                validated[param.name] = value

        return validated

    def create(self, **kwargs) -> ProblemInstance:
        """验证参数后构造"""
        return self.build(**self.validate_parameters(**kwargs))


class ProblemRegistry:
    """问题注册表"""

    def __init__(self):
        self._builders: Dict[str, ProblemBuilder] = {}

    def register(self, builder: ProblemBuilder):
        """注册问题"""
        self._builders[builder.metadata.name] = builder

    def get_builder(self, name: str) -> Optional[ProblemBuilder]:
        """获取构造器"""
        return self._builders.get(name)

    def list_all_problems(self) -> List[str]:
        """列出所有问题名称"""
        return list(self._builders.keys())

    def build(self, name: str, **kwargs) -> ProblemInstance:
        builder = self.get_builder(name)
        if builder is None:
            raise ValueError(f"未知问题: {name}, 可用: {self.list_all_problems()}")
        return builder.create(**kwargs)


def auto_step_scale(lipschitz_unscaled: float, target: float = 0.9) -> float:
    """步长 s = target / L̂, 使缩放后 L ≈ target < 1"""
    if not lipschitz_unscaled > 0:
        return 1.0
    return target / lipschitz_unscaled


def smooth_profile(grid_size: int, amplitude: float = 1.0, frequency: float = 1.0) -> np.ndarray:
    """网格上的 amplitude·sin(frequency·π·t)"""
    t = np.arange(1, grid_size + 1) / (grid_size + 1)
    return amplitude * np.sin(frequency * np.pi * t)


def scaled_least_squares(operator: OperatorModel, step_scale: Optional[float] = None) -> FunctionalModel:
    """精确数据最小二乘泛函; 未给步长时取 0.9 / L̂ (L̂ 为采样估计)"""
    lipschitz_unscaled = least_squares_functional(operator, operator.data, 1.0).lipschitz
    if step_scale is None:
        step_scale = auto_step_scale(lipschitz_unscaled)
    return least_squares_functional(operator, operator.data, step_scale, lipschitz=lipschitz_unscaled)


# 全局问题注册表
problem_registry = ProblemRegistry()
