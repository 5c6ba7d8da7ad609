# -*- coding: utf-8 -*-
"""
命令行包初始化
"""

from illposed_gd.cli.base import CommandResult, command_registry
from illposed_gd.cli.commands import register_all_commands

# 自动注册命令
register_all_commands()

__all__ = ["CommandResult", "command_registry", "register_all_commands"]
