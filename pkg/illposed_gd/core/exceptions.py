# -*- coding: utf-8 -*-
"""
异常定义
"""


class IllPosedError(ValueError):
    """本包所有错误的基类"""


class DimensionMismatchError(IllPosedError):
    """向量维数不一致"""


class NonFiniteVectorError(IllPosedError):
    """向量含 NaN/Inf"""


class RefusalError(IllPosedError):
    """前提条件不满足, 拒绝执行 (例如初值不在球内, L_δ ≥ 1)"""


class SingularSystemError(IllPosedError):
    """线性系统奇异"""


class InvalidConfigError(IllPosedError):
    """实验配置无效"""
