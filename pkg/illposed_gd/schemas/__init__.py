# -*- coding: utf-8 -*-
"""
数据模型: 迭代轨迹、诊断报告、实验配置
"""
