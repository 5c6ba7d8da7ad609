# -*- coding: utf-8 -*-
"""
共享测试夹具
"""

import json

import numpy as np
import pytest

from illposed_gd.cli.commands import ARTIFACT_MODELS
from illposed_gd.core.space import BallSpec
from illposed_gd.models.functional import OperatorModel, least_squares_functional
from illposed_gd.problems import problem_registry


@pytest.fixture
def unit_ball():
    return BallSpec(center=np.zeros(2), radius=1.0, inner_radius=0.25)


@pytest.fixture(scope="session")
def quadratic_1d():
    """λ = 0.5, 一维, x* = 0, x₀ = 1"""
    return problem_registry.build("quadratic", dimension=1)


@pytest.fixture(scope="session")
def quadratic_4d():
    return problem_registry.build("quadratic", dimension=4)


@pytest.fixture(scope="session")
def scalar_problem():
    return problem_registry.build("scalar-quadratic", radius=0.1)


@pytest.fixture(scope="session")
def ode_problem():
    return problem_registry.build("ode-param", grid_size=32)


@pytest.fixture(scope="session")
def autoconv_problem():
    return problem_registry.build("autoconv", grid_size=16)


@pytest.fixture
def half_identity():
    """F(x) = 0.5·x, ℝ¹, ρ = 1"""
    ball = BallSpec(center=[0.0], radius=1.0)
    return OperatorModel(
        apply=lambda x: 0.5 * x,
        jacobian_apply=lambda x, h: 0.5 * h,
        jacobian_adjoint_apply=lambda x, w: 0.5 * w,
        data=[0.0],
        domain=ball,
        is_linear=True,
    )


@pytest.fixture
def write_config(tmp_path):
    """把配置字典写成 JSON 文件"""

    def _write(config: dict, name: str = "config.json") -> str:
        path = tmp_path / name
        path.write_text(json.dumps(config), encoding="utf-8")
        return str(path)

    return _write


def load_schema(name: str) -> dict:
    """与 schema 命令导出内容相同的 JSON Schema"""
    return dict(ARTIFACT_MODELS)[name].model_json_schema()


def identity_functional(step_scale: float = 0.5, radius: float = 3.0):
    """F = id on ℝ¹, y = 0"""
    ball = BallSpec(center=[0.0], radius=radius)
    op = OperatorModel(
        apply=lambda x: x,
        jacobian_apply=lambda x, h: h,
        jacobian_adjoint_apply=lambda x, w: w,
        data=[0.0],
        domain=ball,
        is_linear=True,
    )
    return op, least_squares_functional(op, op.data, step_scale, lipschitz=1.0)
