# -*- coding: utf-8 -*-
"""
实验配置模型
"""

from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator

from illposed_gd.schemas.reports import GammaMarker, LemmaId


class StopConfig(BaseModel):
    """先验停止规则 N_δ = c0·δ^(−κ) 的参数"""
    c0: float = Field(1.0, gt=0.0, description="系数 c0")
    kappa: float = Field(0.5, gt=0.0, lt=1.0, description="指数 κ ∈ (0,1)")


class FaultSpec(BaseModel):
    """故障注入: 在指定步破坏对应轨迹"""
    lemma: LemmaId
    step: int = Field(0, ge=0)


class ExperimentConfig(BaseModel):
    """实验配置"""
    problem: str = Field(..., description="问题名称")
    problem_params: Dict[str, Any] = Field(default_factory=dict, description="问题参数")
    dimension: Optional[int] = Field(None, gt=0, description="维数 (二次问题) 或网格点数")
    step_scale: Optional[float] = Field(None, gt=0.0, description="步长缩放")
    x0_offset: Union[List[float], str] = Field("default", description="x0 − x*, 或预设名 default / zero")
    noise_levels: List[float] = Field(default_factory=list, description="数据噪声水平")
    data_noise_level: Optional[float] = Field(None, gt=0.0, description="单个噪声水平的简写")
    seeds: List[int] = Field(default_factory=lambda: [0], description="噪声种子")
    seed: Optional[int] = Field(None, description="单个种子的简写")
    stop: StopConfig = Field(default_factory=StopConfig)
    max_iter: Optional[int] = Field(None, ge=0, description="精确运行步数, 缺省为 10·N_δ(最小噪声)")
    condition_samples: int = Field(1000, gt=0, description="条件估计采样数")
    condition_seed: int = Field(0, description="条件估计种子")
    gamma: Union[GammaMarker, float] = Field(0.0, description="N(γ,β) 的 γ")
    balance_gamma: float = Field(0.25, gt=0.0, description="平衡条件的 γ")
    track_exact: bool = Field(True, description="噪声轨迹上同时记录精确 J")
    output_dir: str = Field("results", description="输出目录")
    inject_fault: Optional[FaultSpec] = Field(None, description="故障注入")

    @model_validator(mode="before")
    @classmethod
    def _expand_shorthands(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        level = data.get("data_noise_level")
        if level is not None and not data.get("noise_levels"):
            data["noise_levels"] = [level]
        seed = data.get("seed")
        if seed is not None and "seeds" not in data:
            data["seeds"] = [seed]
        return data

    @field_validator("noise_levels")
    @classmethod
    def _check_levels(cls, levels: List[float]) -> List[float]:
        if any(not level > 0 for level in levels):
            raise ValueError(f"噪声水平必须为正: {levels}")
        return levels

    @field_validator("seeds")
    @classmethod
    def _check_seeds(cls, seeds: List[int]) -> List[int]:
        if not seeds:
            raise ValueError("至少需要一个种子")
        if any(seed < 0 for seed in seeds):
            raise ValueError(f"种子必须非负: {seeds}")
        return seeds

    @field_validator("gamma")
    @classmethod
    def _check_gamma(cls, gamma: Union[GammaMarker, float]) -> Union[GammaMarker, float]:
        if not isinstance(gamma, GammaMarker) and not gamma >= 0:
            raise ValueError(f"γ 必须非负: {gamma}")
        return gamma

    def levels_strictly_decreasing(self) -> bool:
        return all(a > b for a, b in zip(self.noise_levels, self.noise_levels[1:]))
