# -*- coding: utf-8 -*-
"""
illposed-gd: 不适定问题梯度下降 (Landweber 型) 迭代、先验停止准则与非线性条件诊断
"""

__version__ = "1.0.0"
