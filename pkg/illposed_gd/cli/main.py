# -*- coding: utf-8 -*-
"""
命令行入口: illposed-gd run|study|diagnose|verify|schema
"""

import argparse
import asyncio
import sys
from typing import List, Optional

from illposed_gd.cli import CommandResult, command_registry
from illposed_gd.cli.base import EXIT_INVALID_CONFIG, CommandOption
from illposed_gd.core.logger import logger


def _add_option(sub: argparse.ArgumentParser, option: CommandOption):
    flag = f"--{option.name}"
    if isinstance(option.default, bool):
        sub.add_argument(flag, action="store_true", default=option.default, help=option.description)
        return
    value_type = type(option.default) if option.default is not None else str
    sub.add_argument(
        flag,
        type=value_type,
        required=option.required,
        default=option.default,
        help=option.description,
    )


def build_parser() -> argparse.ArgumentParser:
    """由命令注册表的元数据生成子命令与选项"""
    parser = argparse.ArgumentParser(
        prog="illposed-gd",
        description="不适定问题梯度迭代: 运行、收敛研究、条件诊断与不等式校验",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    for metadata in command_registry.get_commands_metadata():
        sub = subparsers.add_parser(metadata.name, help=metadata.description)
        for option in metadata.options:
            _add_option(sub, option)
    return parser


async def dispatch(args: argparse.Namespace) -> CommandResult:
    command = command_registry.get_command(args.command)
    options = {key: value for key, value in vars(args).items() if key != "command"}
    return await command.safe_execute(**options)


def main(argv: Optional[List[str]] = None) -> int:
    """解析参数并执行命令, 返回退出码"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INVALID_CONFIG if e.code else 0

    result = asyncio.run(dispatch(args))
    if result.success:
        logger.info(f"✅ {args.command} 完成 ({result.execution_time:.2f}s), 共 {len(result.artifacts)} 个文件")
    else:
        logger.error(f"❌ {args.command} 失败 (退出码 {result.exit_code}): {result.error}")
        print(result.error, file=sys.stderr)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
