# -*- coding: utf-8 -*-
"""
梯度迭代 x_{k+1} = x_k − ∇J(x_k) (精确数据与噪声数据), 记录完整轨迹

迭代只在 B_ρ(x*) 内有定义: 一旦越出球面即记录并停止, 不做投影。
"""

from typing import Optional

import numpy as np

from illposed_gd.core.config import settings
from illposed_gd.core.exceptions import RefusalError
from illposed_gd.core.logger import logger
from illposed_gd.core.space import Vector, as_vector, escaped, in_ball, norm
from illposed_gd.models.functional import FunctionalModel, NoisyFunctional
from illposed_gd.schemas.trace import IterationTrace, TraceKind
from illposed_gd.services.stop_rule import StoppingPolicy, stopping_index


class _TraceRecorder:
    """逐步累积轨迹各列"""

    def __init__(self, model: FunctionalModel, exact: Optional[FunctionalModel] = None):
        self.model = model
        self.exact = exact
        self.iterates = []
        self.errors = []
        self.values = []
        self.grad_norms = []
        self.inner_products = []
        self.exact_values = [] if exact is not None else None

    def record(self, x: Vector) -> Vector:
        """记录 x 处的各量, 返回 ∇J(x)"""
        ball = self.model.domain
        gradient = np.asarray(self.model.gradient(x), dtype=np.float64)
        error = ball.error(x)
        self.iterates.append(x)
        self.errors.append(norm(error))
        self.values.append(float(self.model.evaluate(x)))
        self.grad_norms.append(norm(gradient))
        self.inner_products.append(float(np.dot(gradient, error)))
        if self.exact_values is not None:
            self.exact_values.append(float(self.exact.evaluate(x)))
        return gradient

    def iterate(self, x0: Vector, steps: int) -> Optional[int]:
        """从 x0 迭代 steps 步; 逃逸时返回逃逸步号"""
        ball = self.model.domain
        x = x0
        gradient = self.record(x)
        for k in range(steps):
            x = as_vector(x - gradient)
            gradient = self.record(x)
            if escaped(ball, x):
                return k + 1
        return None

    def build(self, kind: TraceKind, escaped_at: Optional[int], **metadata) -> IterationTrace:
        return IterationTrace(
            kind=kind,
            iterates=self.iterates,
            errors=self.errors,
            values=self.values,
            grad_norms=self.grad_norms,
            inner_products=self.inner_products,
            exact_values=self.exact_values,
            escaped_at=escaped_at,
            stopped_at=len(self.iterates) - 1,
            **metadata,
        )


def _check_start(model: FunctionalModel, x0: Vector) -> Vector:
    x0 = as_vector(x0)
    if not in_ball(model.domain, x0):
        raise RefusalError(
            f"初值不在球内: ‖x0 − x*‖ = {model.domain.distance(x0):.6g} > ρ = {model.domain.radius:.6g}"
        )
    return x0


def run_exact(model: FunctionalModel, x0: Vector, max_iter: int, problem: str = "") -> IterationTrace:
    """精确数据梯度迭代, 至多 max_iter 步或越出球面"""
    if max_iter < 0:
        raise ValueError(f"max_iter 必须非负: {max_iter}")
    x0 = _check_start(model, x0)
    steps = min(max_iter, settings.MAX_ITER_CAP)

    recorder = _TraceRecorder(model)
    escaped_at = recorder.iterate(x0, steps)
    if escaped_at is not None:
        logger.warning(f"⚠️ 精确迭代在第 {escaped_at} 步越出球面")
    return recorder.build(TraceKind.EXACT, escaped_at, problem=problem, planned_steps=steps)


def run_noisy(
    noisy: NoisyFunctional,
    exact: FunctionalModel,
    x0: Vector,
    stop: Optional[StoppingPolicy] = None,
    n_steps: Optional[int] = None,
    track_exact: bool = True,
    problem: str = "",
) -> IterationTrace:
    """噪声数据梯度迭代, 恰好 N_δ 步 (或越出球面)

    n_steps 覆盖停止规则; δ = 0 时必须给出。
    """
    x0 = _check_start(noisy.model, x0)
    if noisy.lipschitz_noisy >= 1.0:
        raise RefusalError(f"单调下降要求 L_δ < 1, 实际 L_δ = {noisy.lipschitz_noisy:.6g}")

    if n_steps is None:
        if stop is None or noisy.delta == 0.0:
            raise ValueError("δ = 0 或未给停止规则时必须指定 n_steps")
        n_steps = stopping_index(stop, noisy.delta)
    if n_steps < 0:
        raise ValueError(f"步数必须非负: {n_steps}")
    n_steps = min(n_steps, settings.MAX_ITER_CAP)

    recorder = _TraceRecorder(noisy.model, exact if track_exact else None)
    escaped_at = recorder.iterate(x0, n_steps)
    if escaped_at is not None:
        logger.warning(f"⚠️ 噪声迭代在第 {escaped_at} 步越出球面 (δ={noisy.delta:.3e}, seed={noisy.seed})")
    return recorder.build(
        TraceKind.NOISY,
        escaped_at,
        problem=problem,
        delta=noisy.delta,
        data_noise_level=noisy.data_noise_level,
        seed=noisy.seed,
        planned_steps=n_steps,
    )
