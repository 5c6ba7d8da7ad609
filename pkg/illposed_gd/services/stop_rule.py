# -*- coding: utf-8 -*-
"""
先验停止规则 N_δ 及其常数 θ, ξ
"""

import math
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from illposed_gd.core.config import settings


class StopConstants(BaseModel):
    """θ = 1 + 4β⁺, ξ = max{1, 2√β⁺}"""

    model_config = ConfigDict(frozen=True)

    beta: float
    theta: float = Field(..., gt=0.0)
    xi: float = Field(..., gt=0.0)

    @property
    def beta_plus(self) -> float:
        return max(self.beta, 0.0)


class StoppingPolicy(BaseModel):
    """N_δ = min(c0·δ^(−κ), ρ/(2ξδ) − 1), 下截断为 0"""

    model_config = ConfigDict(frozen=True)

    c0: float = Field(1.0, gt=0.0)
    kappa: float = Field(0.5, gt=0.0, lt=1.0)
    rho: float = Field(..., gt=0.0)
    xi: float = Field(1.0, gt=0.0)

    @model_validator(mode="after")
    def _check_xi(self) -> "StoppingPolicy":
        if self.xi < 1.0:
            raise ValueError(f"ξ 不能小于 1: {self.xi}")
        return self


def stop_constants(beta: float) -> StopConstants:
    beta_plus = max(beta, 0.0)
    return StopConstants(
        beta=beta,
        theta=1.0 + 4.0 * beta_plus,
        xi=max(1.0, 2.0 * math.sqrt(beta_plus)),
    )


def _guarded_floor(value: float) -> int:
    """floor, 容忍 c0·δ^(−κ) 等表达式在整数处的舍入误差"""
    if math.isinf(value):
        return settings.MAX_ITER_CAP
    return int(math.floor(value + 1e-9 * max(1.0, abs(value))))


def stopping_index(policy: StoppingPolicy, delta: float) -> int:
    """N_δ; 保证 (N_δ + 1)·δ ≤ ρ/(2ξ) 在浮点意义下严格成立 (N_δ > 0 时)"""
    if not delta > 0:
        raise ValueError(f"δ 必须为正: {delta}")

    budget = policy.rho / (2.0 * policy.xi)
    rate_clause = _guarded_floor(policy.c0 * delta ** (-policy.kappa))
    cap_clause = _guarded_floor(budget / delta) - 1
    n = max(0, min(rate_clause, cap_clause, settings.MAX_ITER_CAP))
    while n > 0 and (n + 1) * delta > budget:
        n -= 1
    return n


def inflate_beta(beta: float) -> float:
    """β + 5%·|β|, 朝保守方向"""
    return beta + settings.BETA_INFLATION * abs(beta)


def resolve_beta(analytic: Optional[float], estimated: Optional[float]) -> Tuple[float, str]:
    """停止常数使用的 β 及其来源"""
    if analytic is not None:
        return inflate_beta(analytic), "analytic"
    if estimated is not None:
        return inflate_beta(estimated), "estimate"
    return 0.0, "fallback"
