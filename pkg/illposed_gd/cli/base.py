# -*- coding: utf-8 -*-
"""
命令基础类与命令注册表
"""

from abc import ABC, abstractmethod
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ValidationError

from illposed_gd.core.exceptions import IllPosedError, InvalidConfigError
from illposed_gd.core.logger import logger

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID_CONFIG = 2
# 非预期异常, 与校验失败 (1) 区分
EXIT_RUNTIME_ERROR = 3


class CommandOption(BaseModel):
    """命令选项模型"""
    name: str
    description: str
    required: bool = False
    default: Optional[Any] = None


class CommandMetadata(BaseModel):
    """命令元数据"""
    name: str
    description: str
    options: List[CommandOption] = []


class CommandResult(BaseModel):
    """命令执行结果"""
    success: bool
    exit_code: int = EXIT_OK
    result: Optional[Any] = None
    error: Optional[str] = None
    artifacts: List[str] = []
    execution_time: Optional[float] = None


def list_artifacts(out_dir: Path) -> List[str]:
    """输出目录下全部文件的相对路径 (排序)"""
    if not out_dir.exists():
        return []
    return sorted(str(path.relative_to(out_dir)) for path in out_dir.rglob("*") if path.is_file())


class ExperimentCommand(ABC):
    """实验命令基础类"""

    @property
    @abstractmethod
    def metadata(self) -> CommandMetadata:
        """返回命令元数据"""
        pass

    @abstractmethod
    async def execute(self, **kwargs) -> CommandResult:
        """执行命令逻辑"""
        pass

    def validate_parameters(self, **kwargs) -> Dict[str, Any]:
        """验证参数"""
        validated = {}
        for option in self.metadata.options:
            value = kwargs.get(option.name)

            if option.required and value is None:
                raise InvalidConfigError(f"缺少必需参数: --{option.name}")

            if value is None and option.default is not None:
                value = option.default

            validated[option.name] = value

        return validated

    async def safe_execute(self, **kwargs) -> CommandResult:
        """安全执行命令: 配置或问题设定错误 (IllPosedError 族) 返回 2, 非预期异常返回 3"""
        start_time = datetime.now()

        try:
            validated_params = self.validate_parameters(**kwargs)
            result = await self.execute(**validated_params)
        except (IllPosedError, ValidationError) as e:
            result = CommandResult(success=False, exit_code=EXIT_INVALID_CONFIG, error=str(e))
        except Exception as e:
            logger.exception(f"❌ 命令 {self.metadata.name} 出现非预期异常")
            result = CommandResult(success=False, exit_code=EXIT_RUNTIME_ERROR, error=f"{type(e).__name__}: {str(e)}")

        result.execution_time = (datetime.now() - start_time).total_seconds()
        return result


class CommandRegistry:
    """命令注册表"""

    def __init__(self):
        self._commands: Dict[str, ExperimentCommand] = {}

    def register(self, command: ExperimentCommand):
        """注册命令"""
        self._commands[command.metadata.name] = command

    def get_command(self, name: str) -> Optional[ExperimentCommand]:
        """获取命令"""
        return self._commands.get(name)

    def list_all_commands(self) -> List[str]:
        """列出所有命令名称"""
        return list(self._commands.keys())

    def get_commands_metadata(self) -> List[CommandMetadata]:
        return [command.metadata for command in self._commands.values()]


# 全局命令注册表
command_registry = CommandRegistry()
