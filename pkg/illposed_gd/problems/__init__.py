# -*- coding: utf-8 -*-
"""
基准问题包初始化
"""

from illposed_gd.core.logger import logger
from illposed_gd.problems.autoconv import AutoconvolutionProblem
from illposed_gd.problems.base import ProblemInstance, problem_registry
from illposed_gd.problems.ode_param import OdeParameterProblem
from illposed_gd.problems.quadratic import QuadraticProblem
from illposed_gd.problems.scalar import ScalarQuadraticProblem


def register_all_problems():
    """注册所有问题"""
    problems_to_register = [
        # 解析可验证
        QuadraticProblem(),
        ScalarQuadraticProblem(),

        # 诊断与参数识别
        AutoconvolutionProblem(),
        OdeParameterProblem(),
    ]

    registered_count = 0
    for builder in problems_to_register:
        try:
            problem_registry.register(builder)
            registered_count += 1
            logger.debug(f"✅ 问题注册成功: {builder.metadata.name}")
        except Exception as e:
            logger.error(f"❌ 问题注册失败: {builder.metadata.name} - {str(e)}")

    return registered_count


# 自动注册问题
register_all_problems()

__all__ = ["ProblemInstance", "problem_registry", "register_all_problems"]
