# -*- coding: utf-8 -*-
"""
球内确定性采样

所有采样器只依赖 (seed, 样本数), 相同输入产生逐位相同的样本序列。
"""

from typing import List, Tuple

import numpy as np

from illposed_gd.core.config import settings
from illposed_gd.core.space import BallSpec


def make_rng(seed: int, algorithm: str = None) -> np.random.Generator:
    """按配置的算法构造随机数生成器"""
    algorithm = (algorithm or settings.PRNG_ALGORITHM).lower()
    if algorithm == "philox":
        return np.random.Generator(np.random.Philox(seed))
    if algorithm == "pcg64":
        return np.random.Generator(np.random.PCG64(seed))
    raise ValueError(f"不支持的随机数算法: {algorithm}")


def unit_directions(rng: np.random.Generator, count: int, dimension: int) -> np.ndarray:
    """单位方向: 归一化的高斯向量"""
    raw = rng.standard_normal((count, dimension))
    norms = np.linalg.norm(raw, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return raw / norms


class BallSampler:
    """B_ρ(x*) 上的均匀采样与结构化采样 (射线、球壳、近距点对)"""

    def __init__(self, ball: BallSpec, seed: int):
        self.ball = ball
        self.rng = make_rng(seed)

    @property
    def dimension(self) -> int:
        return self.ball.dimension

    def uniform(self, count: int, radius_fraction: float = 1.0) -> np.ndarray:
        """均匀分布: 方向 × ρ·U^(1/d)"""
        directions = unit_directions(self.rng, count, self.dimension)
        radii = self.ball.radius * radius_fraction * self.rng.random(count) ** (1.0 / self.dimension)
        return self.ball.center + directions * radii[:, None]

    def shell(self, count: int, inner: float, outer: float) -> np.ndarray:
        """球壳 inner ≤ ‖x − x*‖ ≤ outer 上的偏移 z (不含中心)"""
        directions = unit_directions(self.rng, count, self.dimension)
        d = self.dimension
        u = self.rng.random(count)
        radii = (inner ** d + u * (outer ** d - inner ** d)) ** (1.0 / d)
        return directions * radii[:, None]

    def axis_offsets(self, radii: List[float]) -> np.ndarray:
        """沿坐标轴 ±e_i 的偏移"""
        offsets = []
        for r in radii:
            for i in range(self.dimension):
                for sign in (1.0, -1.0):
                    z = np.zeros(self.dimension)
                    z[i] = sign * r
                    offsets.append(z)
        return np.array(offsets).reshape(-1, self.dimension)

    def structured(self, count: int) -> np.ndarray:
        """结构化样本: 坐标轴射线上的点与球面附近的点"""
        rho = self.ball.radius
        axis = self.ball.center + self.axis_offsets([0.25 * rho, 0.5 * rho, rho])
        boundary = self.ball.center + unit_directions(self.rng, max(count, 1), self.dimension) * rho
        return np.vstack([axis, boundary])

    def points(self, count: int) -> np.ndarray:
        """结构化样本 + count 个均匀样本"""
        structured = self.structured(max(count // 10, 1))
        return np.vstack([structured, self.uniform(count)])

    def pairs(self, count: int) -> Tuple[np.ndarray, np.ndarray]:
        """点对: 随机对、坐标轴对称对、近距离对 (‖x₁ − x₂‖ ≈ 10⁻³ρ)"""
        rho = self.ball.radius
        first = self.uniform(count)
        second = self.uniform(count)

        axis = self.axis_offsets([rho])
        mirror_first = self.ball.center + axis
        mirror_second = self.ball.center - axis

        step = 1e-3 * rho
        near_count = max(count // 4, 1)
        base = np.vstack([
            self.ball.center + self.axis_offsets([0.5 * rho, (1.0 - 1e-3) * rho]),
            self.uniform(near_count, radius_fraction=1.0 - 1e-3),
        ])
        axis_steps = np.vstack([
            np.eye(self.dimension), -np.eye(self.dimension),
            np.eye(self.dimension), -np.eye(self.dimension),
        ]) * step
        random_steps = unit_directions(self.rng, near_count, self.dimension) * step
        near_second = base + np.vstack([axis_steps, random_steps])

        return (
            np.vstack([first, mirror_first, base]),
            np.vstack([second, mirror_second, near_second]),
        )
