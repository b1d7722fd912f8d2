"""CLI 模块

提供子命令式命令行的基类。
"""

__version__ = "0.1.0"

from .base_cli import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, BaseCLI, UsageError, main

__all__ = ["BaseCLI", "UsageError", "main", "EXIT_OK", "EXIT_FAILURE", "EXIT_USAGE"]
