# -*- coding: utf-8 -*-
"""
实验服务: run / study / diagnose / verify 的执行与结果落盘

扫描单元 (噪声水平 × 种子) 在线程中并发执行, 结果按提交顺序汇总,
因此输出与并发数无关。结果文件中不写时间戳。
"""

import asyncio
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import aiofiles
import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError

from illposed_gd.core.config import settings
from illposed_gd.core.exceptions import IllPosedError, InvalidConfigError, RefusalError
from illposed_gd.core.logger import logger
from illposed_gd.core.space import Vector, in_ball
from illposed_gd.models.functional import NoiseBounds, NoisyFunctional, make_noisy
from illposed_gd.problems import problem_registry
from illposed_gd.problems.base import ProblemInstance
from illposed_gd.schemas.config import ExperimentConfig
from illposed_gd.schemas.reports import (
    CellSummary,
    ConditionReport,
    ExactSummary,
    LemmaCheckResult,
    LemmaId,
    LemmaStatus,
    LevelMedian,
    RunSummary,
    StudyResult,
    StudyRow,
    TrendVerdict,
    VerificationReport,
)
from illposed_gd.schemas.trace import IterationTrace
from illposed_gd.services.conditions import diagnose_conditions, estimate_beta, gamma_value
from illposed_gd.services.descent import run_exact, run_noisy
from illposed_gd.services.lemmas import (
    check_descent,
    check_divergence_recursion,
    check_error_bound,
    check_init_condition,
    check_noisy_init_condition,
    check_noisy_recursion,
    check_noisy_uniform,
    check_summability,
    corrupt_trace,
    inapplicable,
    theorem_conditions,
)
from illposed_gd.services.stop_rule import (
    StopConstants,
    StoppingPolicy,
    resolve_beta,
    stop_constants,
    stopping_index,
)

EXACT_LEMMAS = (LemmaId.DESCENT, LemmaId.ERROR_BOUND, LemmaId.SUMMABILITY)
NOISY_LEMMAS = (
    LemmaId.NOISY_DESCENT,
    LemmaId.NOISY_RECURSION,
    LemmaId.NOISY_UNIFORM,
    LemmaId.DIVERGENCE_RECURSION,
)
DEFAULT_EXACT_STEPS = 100
CSV_FLOAT_FORMAT = "%.17g"


@dataclass
class Preparation:
    """一次实验的公共准备结果"""
    config: ExperimentConfig
    instance: ProblemInstance
    x0: Vector
    beta: float
    beta_source: str
    constants: StopConstants
    policy: StoppingPolicy
    bounds: NoiseBounds
    init_condition: bool


@dataclass
class CellOutcome:
    """单元运行结果"""
    summary: CellSummary
    trace: Optional[IterationTrace] = None
    noisy: Optional[NoisyFunctional] = None


class ExperimentService:
    """实验服务"""

    def load_config(self, path: str) -> ExperimentConfig:
        """读取并验证 JSON 配置"""
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except FileNotFoundError:
            raise InvalidConfigError(f"配置文件不存在: {path}")
        except json.JSONDecodeError as e:
            raise InvalidConfigError(f"配置文件不是合法 JSON: {path} - {str(e)}")
        return self.parse_config(data)

    def parse_config(self, data: dict) -> ExperimentConfig:
        try:
            return ExperimentConfig.model_validate(data)
        except ValidationError as e:
            raise InvalidConfigError(f"配置验证失败: {str(e)}")

    def build_problem(self, config: ExperimentConfig) -> ProblemInstance:
        """按配置构造问题实例"""
        builder = problem_registry.get_builder(config.problem)
        if builder is None:
            raise InvalidConfigError(
                f"未知问题: {config.problem}, 可用: {problem_registry.list_all_problems()}"
            )

        params = dict(config.problem_params)
        if config.dimension is not None:
            if config.problem == "quadratic":
                params["dimension"] = config.dimension
            elif config.problem == "scalar-quadratic":
                if config.dimension != 1:
                    raise InvalidConfigError(f"标量问题维数必须为 1, 实际 {config.dimension}")
            else:
                params["grid_size"] = config.dimension
        if config.step_scale is not None:
            params["step_scale"] = config.step_scale

        try:
            instance = builder.create(**params)
        except IllPosedError:
            raise
        except (ValueError, TypeError) as e:
            raise InvalidConfigError(f"问题参数无效: {str(e)}")
        logger.info(f"✅ 问题构造完成: {instance.name} (维数 {instance.ball.dimension})")
        return instance

    def initial_point(self, config: ExperimentConfig, instance: ProblemInstance) -> Vector:
        """x₀ = x* + offset, 必须位于球内"""
        if config.x0_offset == "default":
            offset = instance.default_x0_offset
        elif config.x0_offset == "zero":
            offset = np.zeros(instance.ball.dimension)
        elif isinstance(config.x0_offset, str):
            raise InvalidConfigError(f"未知 x0 预设: {config.x0_offset}, 可用: default, zero")
        else:
            offset = config.x0_offset
            if len(offset) != instance.ball.dimension:
                raise InvalidConfigError(
                    f"x0_offset 长度 {len(offset)} 与问题维数 {instance.ball.dimension} 不一致"
                )

        x0 = instance.x0_from_offset(offset)
        if not in_ball(instance.ball, x0):
            raise InvalidConfigError(
                f"初值条件 (init) 不成立: ‖x0 − x*‖ = {instance.ball.distance(x0):.6g} "
                f"超出球半径 ρ = {instance.ball.radius:.6g}"
            )
        return x0

    def prepare(self, config: ExperimentConfig) -> Preparation:
        """构造问题、确定 β 与停止规则"""
        instance = self.build_problem(config)
        x0 = self.initial_point(config, instance)
        exact = instance.exact_functional
        if not exact.lipschitz < 1.0:
            raise InvalidConfigError(f"精确泛函的 L 必须小于 1, 实际 {exact.lipschitz:.6g}; 请减小 step_scale")

        analytic = instance.analytic_facts.beta if gamma_value(config.gamma) == 0.0 else None
        estimated = None
        if analytic is None:
            estimate = estimate_beta(
                exact, instance.ball, config.gamma, config.condition_samples, seed=config.condition_seed
            )
            estimated = estimate.value if estimate.conclusive else None
        beta, source = resolve_beta(analytic, estimated)
        constants = stop_constants(beta)

        policy = StoppingPolicy(
            c0=config.stop.c0, kappa=config.stop.kappa, rho=instance.ball.radius, xi=constants.xi
        )
        init_condition = check_init_condition(x0, exact, beta, instance.ball)
        if not init_condition:
            logger.warning("⚠️ 初值条件 (init) 的数值形式不成立, 继续运行并在摘要中标记")

        return Preparation(
            config=config,
            instance=instance,
            x0=x0,
            beta=beta,
            beta_source=source,
            constants=constants,
            policy=policy,
            bounds=instance.noise_bounds(),
            init_condition=init_condition,
        )

    def _exact_steps(self, prep: Preparation) -> int:
        if prep.config.max_iter is not None:
            return min(prep.config.max_iter, settings.MAX_ITER_CAP)
        if not prep.config.noise_levels:
            return DEFAULT_EXACT_STEPS
        smallest = min(prep.config.noise_levels)
        noisy = make_noisy(
            prep.instance.operator, prep.instance.exact_functional, smallest, prep.config.seeds[0], prep.bounds
        )
        return min(10 * max(stopping_index(prep.policy, noisy.delta), 1), settings.MAX_ITER_CAP)

    def _cells(self, config: ExperimentConfig) -> List[Tuple[int, float, int]]:
        cells = []
        for i, level in enumerate(config.noise_levels):
            for seed in config.seeds:
                cells.append((i, level, seed))
        return cells

    def _run_cell(self, prep: Preparation, index: int, level: float, seed: int) -> CellOutcome:
        instance = prep.instance
        exact = instance.exact_functional
        e0 = instance.ball.distance(prep.x0)
        noisy = make_noisy(instance.operator, exact, level, seed, prep.bounds)
        n_delta = stopping_index(prep.policy, noisy.delta)

        summary = dict(
            index=index,
            data_noise_level=level,
            seed=seed,
            delta=noisy.delta,
            psi_delta=noisy.psi_delta,
            lipschitz_noisy=noisy.lipschitz_noisy,
            n_delta=n_delta,
        )
        phi = noisy.phi_bound()
        summary["noisy_init_condition"] = check_noisy_init_condition(
            prep.x0, noisy, prep.constants, instance.ball, n_delta + 1, phi
        )
        summary["theorem_conditions"] = theorem_conditions(
            prep.x0, exact, noisy, prep.constants, instance.ball, phi
        )

        try:
            trace = run_noisy(
                noisy,
                exact,
                prep.x0,
                n_steps=n_delta,
                track_exact=prep.config.track_exact,
                problem=instance.name,
            )
        except RefusalError as e:
            logger.warning(f"⚠️ 单元 (level={level:g}, seed={seed}) 被拒绝: {str(e)}")
            return CellOutcome(
                summary=CellSummary(
                    **summary, refused=True, refusal_reason=str(e), final_error=e0, min_error=e0
                ),
                noisy=noisy,
            )

        return CellOutcome(
            summary=CellSummary(
                **summary,
                escaped_at=trace.escaped_at,
                final_error=trace.errors[-1],
                min_error=min(trace.errors),
                final_value=trace.values[-1],
                final_exact_value=trace.exact_values[-1] if trace.track_exact else None,
            ),
            trace=trace,
            noisy=noisy,
        )

    async def _sweep(self, prep: Preparation, out_dir: Path, workers: int) -> List[CellOutcome]:
        """并发执行全部单元, 每个单元写自己的轨迹文件"""
        semaphore = asyncio.Semaphore(max(1, workers))

        async def run_one(index: int, level: float, seed: int) -> CellOutcome:
            async with semaphore:
                outcome = await asyncio.to_thread(self._run_cell, prep, index, level, seed)
                if outcome.trace is not None:
                    files = await self.write_trace(out_dir, f"noisy_d{index}_s{seed}", outcome.trace)
                    outcome.summary = outcome.summary.model_copy(update={"trace_files": files})
                return outcome

        return await asyncio.gather(*(run_one(*cell) for cell in self._cells(prep.config)))

    def _exact_summary(self, trace: IterationTrace, max_iter: int, files: List[str]) -> ExactSummary:
        return ExactSummary(
            max_iter=max_iter,
            stopped_at=trace.stopped_at,
            escaped_at=trace.escaped_at,
            initial_error=trace.errors[0],
            final_error=trace.errors[-1],
            final_value=trace.values[-1],
            trace_files=files,
        )

    async def run(self, config: ExperimentConfig, out_dir: Path, workers: int, gnuplot: bool = False) -> RunSummary:
        """精确运行 + 每个 (噪声水平, 种子) 一次噪声运行"""
        prep = self.prepare(config)
        max_iter = self._exact_steps(prep)
        exact_trace = await asyncio.to_thread(
            run_exact, prep.instance.exact_functional, prep.x0, max_iter, prep.instance.name
        )
        exact_files = await self.write_trace(out_dir, "exact", exact_trace)
        outcomes = await self._sweep(prep, out_dir, workers)

        summary = RunSummary(
            problem=prep.instance.name,
            parameters=prep.instance.parameters,
            step_scale=prep.instance.step_scale,
            lipschitz=prep.instance.exact_functional.lipschitz,
            beta=prep.beta,
            beta_source=prep.beta_source,
            theta=prep.constants.theta,
            xi=prep.constants.xi,
            radius=prep.instance.ball.radius,
            init_condition=prep.init_condition,
            exact=self._exact_summary(exact_trace, max_iter, exact_files),
            cells=[outcome.summary for outcome in outcomes],
        )
        await self.write_model(out_dir / "summary.json", summary)
        if gnuplot:
            await self.write_gnuplot(out_dir, exact_files, [o.summary.trace_files for o in outcomes])

        for cell in summary.cells:
            conditions = cell.theorem_conditions
            logger.info(
                f"level={cell.data_noise_level:g} seed={cell.seed}: N_δ={cell.n_delta}, "
                f"‖e‖={cell.final_error:.4e}, 定理条件{'成立' if conditions and conditions.all_hold else '不全成立'}"
            )
        logger.info(f"✅ run 完成: {len(summary.cells)} 个噪声单元")
        return summary

    async def study(self, config: ExperimentConfig, out_dir: Path, workers: int, gnuplot: bool = False) -> StudyResult:
        """噪声水平阶梯上的收敛研究"""
        if len(config.noise_levels) < 3:
            raise InvalidConfigError(f"收敛研究至少需要 3 个噪声水平, 实际 {len(config.noise_levels)}")
        if not config.levels_strictly_decreasing():
            raise InvalidConfigError(f"收敛研究要求噪声水平严格递减: {config.noise_levels}")

        prep = self.prepare(config)
        outcomes = await self._sweep(prep, out_dir, workers)
        rows = [
            StudyRow(
                data_noise_level=o.summary.data_noise_level,
                seed=o.summary.seed,
                delta=o.summary.delta,
                n_delta=o.summary.n_delta,
                final_error=o.summary.final_error,
                min_error=o.summary.min_error,
                final_value=o.summary.final_value,
                escaped=o.summary.escaped_at is not None,
                refused=o.summary.refused,
                zero_iterations=o.summary.n_delta == 0,
            )
            for o in outcomes
        ]
        result = self.assess_trend(config.problem, rows, config.noise_levels)

        frame = pd.DataFrame([row.model_dump(mode="json") for row in rows])
        await self.write_text(out_dir / "study.csv", frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT))
        await self.write_model(out_dir / "study.json", result)
        if gnuplot:
            await self.write_gnuplot(out_dir, [], [o.summary.trace_files for o in outcomes])
        logger.info(f"✅ study 完成: 趋势判定 {result.trend_verdict.value}")
        return result

    def assess_trend(self, problem: str, rows: List[StudyRow], levels: List[float]) -> StudyResult:
        """按每级中位数判定趋势: 每级 m_{i+1} < (1 + slack)·m_i 且末级严格小于首级"""
        slack = settings.STUDY_SLACK
        frame = pd.DataFrame([row.model_dump() for row in rows])
        frame["unusable"] = frame["escaped"] | frame["refused"]
        grouped = frame.groupby("data_noise_level", sort=False).agg(
            median_final_error=("final_error", "median"),
            median_min_error=("min_error", "median"),
            escapes=("unusable", "sum"),
        )
        grouped = grouped.reindex(levels)
        medians = [
            LevelMedian(
                data_noise_level=float(level),
                median_final_error=float(row.median_final_error),
                median_min_error=float(row.median_min_error),
                escapes=int(row.escapes),
            )
            for level, row in grouped.iterrows()
        ]

        finals = [m.median_final_error for m in medians]
        if any(m.escapes > 0 for m in medians[-2:]):
            verdict = TrendVerdict.INCONCLUSIVE
        elif all(b < (1.0 + slack) * a for a, b in zip(finals, finals[1:])) and finals[-1] < finals[0]:
            verdict = TrendVerdict.DECREASING
        else:
            verdict = TrendVerdict.NON_MONOTONE
        return StudyResult(problem=problem, rows=rows, medians=medians, trend_verdict=verdict, slack=slack)

    async def diagnose(self, config: ExperimentConfig, out_dir: Path) -> ConditionReport:
        """运行全部条件估计量并输出报告与表格"""
        instance = self.build_problem(config)
        noisy = None
        if config.noise_levels:
            noisy = make_noisy(
                instance.operator,
                instance.exact_functional,
                min(config.noise_levels),
                config.seeds[0],
                instance.noise_bounds(),
            )
        report = await asyncio.to_thread(
            diagnose_conditions,
            instance,
            config.condition_samples,
            config.condition_seed,
            config.gamma,
            config.balance_gamma,
            noisy,
        )
        await self.write_model(out_dir / "condition_report.json", report)
        await self.write_text(out_dir / "condition_table.txt", self.condition_table(report))
        logger.info(f"✅ diagnose 完成: {len(report.witnesses)} 个违反见证")
        return report

    def condition_table(self, report: ConditionReport) -> str:
        estimates = pd.DataFrame(
            [
                {
                    "estimate": e.name,
                    "value": e.value,
                    "status": e.status.value,
                    "samples": e.samples,
                    "excluded": e.excluded,
                    "analytic": report.analytic_facts.get(e.name),
                }
                for e in report.estimates
            ]
        )
        checks = pd.DataFrame(
            [
                {"check": c.name, "passed": c.passed, "checked": c.checked, "worst_margin": c.worst_margin}
                for c in report.checks
            ]
        )
        lines = [f"problem: {report.problem}", f"gamma: {report.gamma}", ""]
        lines.append(estimates.to_string(index=False, float_format=lambda v: f"{v:.6e}"))
        if not checks.empty:
            lines += ["", checks.to_string(index=False, float_format=lambda v: f"{v:.6e}")]
        if report.derived_ncgb is not None:
            pair = report.derived_ncgb
            lines += ["", f"derived (gamma, beta) from cone: ({pair.gamma:.6e}, {pair.beta:.6e})"]
        if report.tau_lower_bound is not None:
            lines.append(f"tau lower bound: {report.tau_lower_bound:.6e}")
        return "\n".join(lines) + "\n"

    async def verify(self, config: ExperimentConfig, out_dir: Path, workers: int) -> VerificationReport:
        """运行轨迹并对全部适用不等式校验"""
        prep = self.prepare(config)
        exact = prep.instance.exact_functional
        L = exact.lipschitz
        max_iter = self._exact_steps(prep)
        exact_trace = await asyncio.to_thread(run_exact, exact, prep.x0, max_iter, prep.instance.name)
        outcomes = await self._sweep(prep, out_dir, workers)

        fault = config.inject_fault
        if fault is not None:
            exact_trace, outcomes = self._inject(fault.lemma, fault.step, exact_trace, outcomes)

        results = [
            check_descent(exact_trace, L, label="exact"),
            check_error_bound(exact_trace, prep.beta, L, label="exact"),
            check_summability(exact_trace, prep.beta, L, label="exact"),
        ]
        for outcome in outcomes:
            results.extend(self._noisy_checks(prep, outcome, exact_trace))

        failed = sorted({r.lemma_id for r in results if r.status == LemmaStatus.FAILED}, key=list(LemmaId).index)
        report = VerificationReport(
            problem=prep.instance.name,
            passed=not failed,
            failed_lemmas=failed,
            injected_fault=fault.lemma if fault is not None else None,
            results=results,
        )
        await self.write_model(out_dir / "lemma_checks.json", report)
        await self.write_text(out_dir / "lemma_table.txt", self.lemma_table(results))
        if failed:
            logger.error(f"❌ 校验失败: {', '.join(lemma.value for lemma in failed)}")
        else:
            logger.info(f"✅ verify 完成: {len(results)} 项校验")
        return report

    def _noisy_checks(
        self, prep: Preparation, outcome: CellOutcome, exact_trace: IterationTrace
    ) -> List[LemmaCheckResult]:
        summary = outcome.summary
        label = f"noisy level={summary.data_noise_level:g} seed={summary.seed}"
        if outcome.trace is None:
            return [inapplicable(lemma, summary.refusal_reason or "运行被拒绝", label) for lemma in NOISY_LEMMAS]

        trace = outcome.trace
        noisy = outcome.noisy
        return [
            check_descent(trace, noisy.lipschitz_noisy, LemmaId.NOISY_DESCENT, label=label),
            check_noisy_recursion(trace, prep.constants, noisy.delta, label=label),
            check_noisy_uniform(
                trace, prep.constants, noisy.delta, noisy.lipschitz_noisy, trace.values[0], label=label
            ),
            check_divergence_recursion(
                trace, exact_trace, prep.instance.exact_functional.lipschitz, noisy.delta, label=label
            ),
        ]

    def _inject(
        self, lemma: LemmaId, step: int, exact_trace: IterationTrace, outcomes: List[CellOutcome]
    ) -> Tuple[IterationTrace, List[CellOutcome]]:
        """在精确轨迹或首个可用噪声轨迹上注入故障"""
        try:
            if lemma in EXACT_LEMMAS:
                return corrupt_trace(exact_trace, lemma, step), outcomes
            for outcome in outcomes:
                if outcome.trace is not None and outcome.trace.stopped_at > step:
                    outcome.trace = corrupt_trace(outcome.trace, lemma, step)
                    return exact_trace, outcomes
        except ValueError as e:
            raise InvalidConfigError(f"故障注入无效: {str(e)}")
        raise InvalidConfigError(f"没有步数超过 {step} 的噪声轨迹可供注入 {lemma.value}")

    def lemma_table(self, results: List[LemmaCheckResult]) -> str:
        frame = pd.DataFrame(
            [
                {
                    "lemma": r.lemma_id.value,
                    "trace": r.trace_label,
                    "status": r.status.value,
                    "worst_margin": r.worst_margin,
                    "witness_step": "" if r.witness_step is None else r.witness_step,
                    "checked": r.checked_steps,
                }
                for r in results
            ]
        )
        return frame.to_string(index=False, float_format=lambda v: f"{v:.6e}") + "\n"

    async def write_trace(self, out_dir: Path, stem: str, trace: IterationTrace) -> List[str]:
        """轨迹写为 CSV (逐步数据) 与 JSON (完整记录), 返回相对路径"""
        exact_column = trace.values if trace.kind.value == "exact" else trace.exact_values
        noisy_column = trace.values if trace.kind.value == "noisy" else None
        frame = pd.DataFrame(
            {
                "k": np.arange(trace.stopped_at + 1),
                "err": trace.errors,
                "J": exact_column if exact_column is not None else math.nan,
                "Jdelta": noisy_column if noisy_column is not None else math.nan,
                "grad_norm": trace.grad_norms,
                "inner_ek": trace.inner_products,
            }
        )
        csv_name = f"traces/{stem}.csv"
        json_name = f"traces/{stem}.json"
        await self.write_text(out_dir / csv_name, frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT))
        await self.write_model(out_dir / json_name, trace)
        return [csv_name, json_name]

    async def write_gnuplot(self, out_dir: Path, exact_files: List[str], cell_files: List[List[str]]):
        """生成误差曲线的 gnuplot 脚本"""
        csvs = [name for name in exact_files if name.endswith(".csv")]
        csvs += [name for files in cell_files for name in files if name.endswith(".csv")]
        lines = [
            "set datafile separator ','",
            "set logscale y",
            "set xlabel 'k'",
            "set ylabel '||x_k - x*||'",
            "set key outside",
        ]
        if csvs:
            plots = [f"'{name}' using 'k':'err' with lines title '{Path(name).stem}'" for name in csvs]
            lines.append("plot " + ", \\\n     ".join(plots))
        await self.write_text(out_dir / "plot.gp", "\n".join(lines) + "\n")

    async def write_model(self, path: Path, model: BaseModel):
        await self.write_text(path, model.model_dump_json(indent=2) + "\n")

    async def write_text(self, path: Path, content: str):
        path.parent.mkdir(parents=True, exist_ok=True)
        async with aiofiles.open(path, "w", encoding="utf-8", newline="\n") as f:
            await f.write(content)


# 全局实验服务实例
experiment_service = ExperimentService()
