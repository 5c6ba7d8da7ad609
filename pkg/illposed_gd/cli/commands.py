# -*- coding: utf-8 -*-
"""
run / study / diagnose / verify / schema 命令
"""

import json
from pathlib import Path
from typing import List, Optional, Tuple, Type

from pydantic import BaseModel

from illposed_gd.cli.base import (
    EXIT_CHECK_FAILED,
    EXIT_OK,
    CommandMetadata,
    CommandOption,
    CommandResult,
    ExperimentCommand,
    command_registry,
    list_artifacts,
)
from illposed_gd.core.config import settings
from illposed_gd.core.logger import logger
from illposed_gd.schemas.config import ExperimentConfig
from illposed_gd.schemas.reports import ConditionReport, RunSummary, StudyResult, VerificationReport
from illposed_gd.schemas.trace import IterationTrace
from illposed_gd.services.experiment_service import experiment_service

CONFIG_OPTIONS = [
    CommandOption(name="config", description="JSON 配置文件", required=True),
    CommandOption(name="out", description="输出目录, 覆盖配置中的 output_dir"),
    CommandOption(name="workers", description="并发单元数", default=settings.DEFAULT_WORKERS),
    CommandOption(name="gnuplot", description="生成 plot.gp", default=False),
]

# schema 命令导出的模型: 文件名 -> 模型
ARTIFACT_MODELS: List[Tuple[str, Type[BaseModel]]] = [
    ("experiment_config", ExperimentConfig),
    ("trace", IterationTrace),
    ("summary", RunSummary),
    ("study", StudyResult),
    ("condition_report", ConditionReport),
    ("lemma_checks", VerificationReport),
]


def _load(config: str, out: Optional[str]) -> Tuple[ExperimentConfig, Path]:
    experiment = experiment_service.load_config(config)
    return experiment, Path(out or experiment.output_dir)


class RunCommand(ExperimentCommand):
    """单次精确运行与噪声扫描"""

    @property
    def metadata(self) -> CommandMetadata:
        return CommandMetadata(
            name="run",
            description="精确数据运行与每个 (噪声水平, 种子) 的噪声运行, 输出轨迹与摘要",
            options=CONFIG_OPTIONS,
        )

    async def execute(self, config: str, out: Optional[str], workers: int, gnuplot: bool) -> CommandResult:
        experiment, out_dir = _load(config, out)
        summary = await experiment_service.run(experiment, out_dir, workers, gnuplot)
        return CommandResult(success=True, exit_code=EXIT_OK, result=summary, artifacts=list_artifacts(out_dir))


class StudyCommand(ExperimentCommand):
    """噪声水平阶梯上的收敛研究"""

    @property
    def metadata(self) -> CommandMetadata:
        return CommandMetadata(
            name="study",
            description="在递减噪声水平上运行扫描, 按中位数判定误差趋势",
            options=CONFIG_OPTIONS,
        )

    async def execute(self, config: str, out: Optional[str], workers: int, gnuplot: bool) -> CommandResult:
        experiment, out_dir = _load(config, out)
        result = await experiment_service.study(experiment, out_dir, workers, gnuplot)
        return CommandResult(success=True, exit_code=EXIT_OK, result=result, artifacts=list_artifacts(out_dir))


class DiagnoseCommand(ExperimentCommand):
    """非线性条件诊断"""

    @property
    def metadata(self) -> CommandMetadata:
        return CommandMetadata(
            name="diagnose",
            description="运行全部条件估计量, 输出条件报告与表格",
            options=CONFIG_OPTIONS,
        )

    async def execute(self, config: str, out: Optional[str], workers: int, gnuplot: bool) -> CommandResult:
        experiment, out_dir = _load(config, out)
        report = await experiment_service.diagnose(experiment, out_dir)
        return CommandResult(success=True, exit_code=EXIT_OK, result=report, artifacts=list_artifacts(out_dir))


class VerifyCommand(ExperimentCommand):
    """轨迹不等式校验"""

    @property
    def metadata(self) -> CommandMetadata:
        return CommandMetadata(
            name="verify",
            description="运行轨迹并校验全部适用不等式; 任一失败则退出码为 1",
            options=CONFIG_OPTIONS,
        )

    async def execute(self, config: str, out: Optional[str], workers: int, gnuplot: bool) -> CommandResult:
        experiment, out_dir = _load(config, out)
        report = await experiment_service.verify(experiment, out_dir, workers)
        if report.passed:
            return CommandResult(success=True, exit_code=EXIT_OK, result=report, artifacts=list_artifacts(out_dir))
        failed = ", ".join(lemma.value for lemma in report.failed_lemmas)
        return CommandResult(
            success=False,
            exit_code=EXIT_CHECK_FAILED,
            result=report,
            error=f"校验失败: {failed}",
            artifacts=list_artifacts(out_dir),
        )


class SchemaCommand(ExperimentCommand):
    """导出结果文件的 JSON Schema"""

    @property
    def metadata(self) -> CommandMetadata:
        return CommandMetadata(
            name="schema",
            description="将各结果模型的 JSON Schema 写入目录",
            options=[CommandOption(name="out", description="输出目录", default="schemas")],
        )

    async def execute(self, out: str) -> CommandResult:
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, model in ARTIFACT_MODELS:
            schema = model.model_json_schema()
            (out_dir / f"{name}.schema.json").write_text(
                json.dumps(schema, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
            )
        return CommandResult(success=True, exit_code=EXIT_OK, artifacts=list_artifacts(out_dir))


def register_all_commands():
    """注册所有命令"""
    commands_to_register = [
        RunCommand(),
        StudyCommand(),
        DiagnoseCommand(),
        VerifyCommand(),
        SchemaCommand(),
    ]

    registered_count = 0
    for command in commands_to_register:
        try:
            command_registry.register(command)
            registered_count += 1
            logger.debug(f"✅ 命令注册成功: {command.metadata.name}")
        except Exception as e:
            logger.error(f"❌ 命令注册失败: {command.metadata.name} - {str(e)}")

    return registered_count
