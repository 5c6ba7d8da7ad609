# -*- coding: utf-8 -*-
"""
诊断与校验结果的数据模型
"""

from enum import Enum
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, Field


class GammaMarker(str, Enum):
    """γ = ∞: 前提恒成立"""
    INFINITY = "inf"


Gamma = Union[GammaMarker, float]


class EstimateStatus(str, Enum):
    """估计值性质枚举"""
    LOWER_BOUND = "lower_bound_estimate"
    FALSIFIED = "falsified"
    INCONCLUSIVE = "inconclusive"
    ANALYTIC = "analytic"


class Witness(BaseModel):
    """违反记录: 点 (可回放) 与测得的量"""
    label: str
    points: List[List[float]]
    quantity: float
    threshold: Optional[float] = None


class Estimate(BaseModel):
    """采样估计结果"""
    name: str
    value: Optional[float] = None
    status: EstimateStatus
    samples: int = 0
    excluded: int = 0
    extremal: Optional[Witness] = None
    witnesses: List[Witness] = []
    parameters: Dict[str, Any] = {}

    @property
    def conclusive(self) -> bool:
        return self.status != EstimateStatus.INCONCLUSIVE and self.value is not None


class CheckOutcome(BaseModel):
    """采样条件检验: 通过/失败及见证"""
    name: str
    passed: bool
    checked: int
    worst_margin: float = 0.0
    witnesses: List[Witness] = []
    parameters: Dict[str, Any] = {}


class RatioRow(BaseModel):
    """J(x*+Δ)/J(x*−Δ) 在某一尺度下的范围"""
    scale: float
    minimum: Optional[float] = None
    maximum: Optional[float] = None
    samples: int = 0


class DerivedPair(BaseModel):
    """由强切锥条件推出的 (γ, β)"""
    eta: float
    jacobian_sup: float
    gamma: float
    gamma_sup: float
    beta: float


class ConditionReport(BaseModel):
    """非线性条件诊断报告"""
    problem: str
    gamma: Gamma
    beta_hat: Optional[float] = None
    eta_weak_hat: Optional[float] = None
    eta_strong_hat: Optional[float] = None
    tau_hat: Optional[float] = None
    lipschitz_hat: Optional[float] = None
    phi_coefficient_hat: Optional[float] = None
    samples: int
    seed: int
    witnesses: List[Witness] = []
    estimates: List[Estimate] = []
    checks: List[CheckOutcome] = []
    derived_ncgb: Optional[DerivedPair] = None
    tau_lower_bound: Optional[float] = None
    beta_at_derived_gamma: Optional[float] = None
    ratio_profile: List[RatioRow] = []
    analytic_facts: Dict[str, Optional[float]] = {}


class LemmaId(str, Enum):
    """轨迹不等式编号"""
    DESCENT = "descent"
    NOISY_DESCENT = "noisy_descent"
    ERROR_BOUND = "error_bound"
    NOISY_RECURSION = "noisy_recursion"
    NOISY_UNIFORM = "noisy_uniform"
    SUMMABILITY = "summability"
    DIVERGENCE_RECURSION = "divergence_recursion"


class LemmaStatus(str, Enum):
    """校验状态枚举"""
    PASSED = "passed"
    FAILED = "failed"
    INAPPLICABLE = "inapplicable"


class LemmaCheckResult(BaseModel):
    """单个不等式在一条轨迹上的校验结果"""
    lemma_id: LemmaId
    status: LemmaStatus
    passed: bool
    worst_margin: float = 0.0
    witness_step: Optional[int] = None
    checked_steps: int = 0
    trace_label: str = ""
    reason: Optional[str] = None
    context: Dict[str, Optional[float]] = {}


class ConditionFlag(BaseModel):
    """单个前提条件: 是否成立及余量 (右端 − 左端)"""
    name: str
    holds: bool
    lhs: float
    rhs: float
    slack: float


class TheoremConditions(BaseModel):
    """初值小性与噪声水平条件"""
    initial_smallness: ConditionFlag
    noise_below_gap: ConditionFlag
    phi_growth: ConditionFlag
    psi_budget: ConditionFlag

    @property
    def all_hold(self) -> bool:
        return all(
            flag.holds for flag in (self.initial_smallness, self.noise_below_gap, self.phi_growth, self.psi_budget)
        )


class CellSummary(BaseModel):
    """单个 (噪声水平, 种子) 运行的摘要"""
    index: int
    data_noise_level: float
    seed: int
    delta: Optional[float] = None
    psi_delta: Optional[float] = None
    lipschitz_noisy: Optional[float] = None
    n_delta: int = 0
    refused: bool = False
    refusal_reason: Optional[str] = None
    escaped_at: Optional[int] = None
    final_error: float
    min_error: float
    final_value: Optional[float] = None
    final_exact_value: Optional[float] = None
    noisy_init_condition: Optional[ConditionFlag] = None
    theorem_conditions: Optional[TheoremConditions] = None
    trace_files: List[str] = []


class ExactSummary(BaseModel):
    """精确数据运行摘要"""
    max_iter: int
    stopped_at: int
    escaped_at: Optional[int] = None
    initial_error: float
    final_error: float
    final_value: float
    trace_files: List[str] = []


class RunSummary(BaseModel):
    """run 命令输出"""
    problem: str
    parameters: Dict[str, Any] = {}
    step_scale: float
    lipschitz: float
    beta: float
    beta_source: str
    theta: float
    xi: float
    radius: float
    init_condition: bool
    exact: ExactSummary
    cells: List[CellSummary] = []


class TrendVerdict(str, Enum):
    """收敛趋势判定"""
    DECREASING = "decreasing"
    NON_MONOTONE = "non-monotone"
    INCONCLUSIVE = "inconclusive"


class StudyRow(BaseModel):
    """研究表的一行"""
    data_noise_level: float
    seed: int
    delta: Optional[float] = None
    n_delta: int
    final_error: float
    min_error: float
    final_value: Optional[float] = None
    escaped: bool = False
    refused: bool = False
    zero_iterations: bool = False


class LevelMedian(BaseModel):
    """每个噪声水平的中位数"""
    data_noise_level: float
    median_final_error: float
    median_min_error: float
    escapes: int = 0


class StudyResult(BaseModel):
    """study 命令输出"""
    problem: str
    rows: List[StudyRow] = []
    medians: List[LevelMedian] = []
    trend_verdict: TrendVerdict
    slack: float = Field(0.05, description="每级允许的相对松弛")


class VerificationReport(BaseModel):
    """verify 命令输出"""
    problem: str
    passed: bool
    failed_lemmas: List[LemmaId] = []
    injected_fault: Optional[LemmaId] = None
    results: List[LemmaCheckResult] = []
