# -*- coding: utf-8 -*-
"""
核心模块
"""
