# -*- coding: utf-8 -*-
"""
泛函模型
"""
