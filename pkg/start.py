#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
illposed-gd 启动脚本

用法: python start.py run|study|diagnose|verify --config configs/quadratic.json [--out DIR] [--workers N] [--gnuplot]
"""

import sys
from pathlib import Path

from dotenv import load_dotenv

# 添加项目根目录到Python路径
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))


def load_environment(path: str = ".env") -> bool:
    """在导入 illposed_gd (及其 settings) 之前加载 .env, 返回文件是否存在"""
    env_file = Path(path)
    if not env_file.exists():
        return False
    load_dotenv(env_file)
    return True


def create_directories():
    """创建必要的目录"""
    from illposed_gd.core.config import settings

    for directory in (settings.LOG_DIR, settings.RESULTS_DIR):
        Path(directory).mkdir(parents=True, exist_ok=True)


def main():
    """主函数"""
    if not load_environment():
        print("⚠️  未找到 .env 文件, 使用默认配置 (参考 env.example)", file=sys.stderr)

    create_directories()

    from illposed_gd.cli.main import main as cli_main

    return cli_main(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
