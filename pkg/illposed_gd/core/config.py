# -*- coding: utf-8 -*-
"""
配置管理
"""

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """应用配置"""

    # 基础配置
    APP_NAME: str = "illposed-gd"
    APP_VERSION: str = "1.0.0"

    # 日志配置
    LOG_LEVEL: str = "INFO"
    LOG_DIR: str = "./logs"
    LOG_TO_FILE: bool = True

    # 输出与并发
    RESULTS_DIR: str = "./results"
    DEFAULT_WORKERS: int = 4

    # 随机数: philox 为计数器型 64 位生成器, 跨平台可复现
    PRNG_ALGORITHM: str = "philox"

    # 上确界采样 (δ, ψ(δ) 的估计)
    BOUND_SAMPLES: int = 1000
    BOUND_SEED: int = 20240601
    SAFETY_FACTOR: float = 1.05

    # 条件估计
    LIPSCHITZ_SAMPLES: int = 400
    LIPSCHITZ_SEED: int = 7
    BETA_INFLATION: float = 0.05
    TAU_TOLERANCE: float = 1e-7
    PHI_GUARD: float = 1e-14

    # 引理校验
    CHECK_TOLERANCE: float = 1e-9

    # 实验
    STUDY_SLACK: float = 0.05
    MAX_ITER_CAP: int = 10**6

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )


# 创建全局配置实例
settings = Settings()
