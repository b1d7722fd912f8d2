"""CLI 基类模块

提供子命令式命令行的公共部分：
- 通用参数（日志级别、配置目录、输出路径与格式、随机种子）
- 命令行参数覆盖配置
- 输出文件与运行清单的写出
- 退出码约定：0 成功，1 验证失败或运行错误，2 用法错误
"""

import argparse
import logging
import os
import sys
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional, Sequence

from logger import apply_logging_config, set_console_level, setup_logger, _ as _t
from utils.config_manager import load_config
from utils.exceptions import BakSneppenError, ConfigError
from utils.serialization import build_manifest, manifest_path_for, write_csv, write_json

logger = setup_logger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

# 命令行参数名 -> 配置键
FLAG_OVERRIDES = {
    "k": "coeffs.default_k",
    "kmax": "coeffs.stability_k",
    "format": "output.format",
    "seed": "simulation.seed",
    "n_species": "simulation.n_species",
    "samples": "simulation.n_samples",
    "burn_in": "simulation.burn_in",
    "thin": "simulation.thinning",
    "ymin": "solver.y_min",
    "tol": "solver.rel_tol",
    "level": "validation.level",
}


class UsageError(BakSneppenError):
    """命令行用法错误"""


class BaseCLI(ABC):
    """CLI 基类

    子类在 _add_commands 中注册子命令，并在 execute 中完成实际工作。
    """

    def __init__(self, description: str, prog: str, version: str = "0.1.0"):
        """初始化 CLI

        Args:
            description: 程序描述
            prog: 程序名称
            version: 版本号
        """
        self.description = description
        self.prog = prog
        self.version = version
        self.argv: List[str] = []
        self.parser = self._create_parser()

    def _setup_cli_logging(self, verbose: int = 0, quiet: bool = False) -> None:
        """设置控制台日志级别（0=WARNING, 1=INFO, 2+=DEBUG）"""
        if quiet:
            level = logging.ERROR
        elif verbose >= 2:
            level = logging.DEBUG
        elif verbose == 1:
            level = logging.INFO
        else:
            level = logging.WARNING
        set_console_level(level)

    def _common_parser(self) -> argparse.ArgumentParser:
        """所有子命令共享的参数"""
        common = argparse.ArgumentParser(add_help=False)
        common.add_argument("--verbose", "-v", action="count", default=0,
                            help=_t("增加日志详细程度（-v=INFO, -vv=DEBUG）"))
        common.add_argument("--quiet", "-q", action="store_true", help=_t("只显示错误信息"))
        common.add_argument("--config-dir", type=str, default=None, help=_t("配置文件目录"))
        common.add_argument("--out", "-o", type=str, default=None,
                            help=_t("输出文件路径，- 表示标准输出"))
        common.add_argument("--format", "-f", type=str, default=None, choices=["csv", "json"],
                            help=_t("输出格式"))
        common.add_argument("--seed", type=int, default=None, help=_t("随机种子"))
        return common

    def _create_parser(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(description=self.description, prog=self.prog)
        parser.add_argument("--version", action="version", version=f"%(prog)s {self.version}")
        subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
        subparsers.required = True
        self._add_commands(subparsers, self._common_parser())
        return parser

    @abstractmethod
    def _add_commands(self, subparsers: Any, common: argparse.ArgumentParser) -> None:
        """注册子命令（子类实现）"""

    def parse_args(self, args_list: Optional[Sequence[str]] = None) -> argparse.Namespace:
        return self.parser.parse_args(args_list)

    def update_config(self, args: argparse.Namespace) -> Dict[str, Any]:
        """加载配置并用命令行参数覆盖

        Args:
            args: 解析后的参数

        Returns:
            Dict[str, Any]: 生效配置
        """
        config = load_config(args.config_dir)
        for flag, key in FLAG_OVERRIDES.items():
            value = getattr(args, flag, None)
            if value is None:
                continue
            section, name = key.split(".")
            config.setdefault(section, {})[name] = value
        return config

    @abstractmethod
    def execute(self, args: argparse.Namespace, config: Dict[str, Any]) -> int:
        """执行子命令（子类实现），返回退出码"""

    # ---- 输出 --------------------------------------------------------------

    def output_path(self, args: argparse.Namespace, config: Dict[str, Any], stem: str) -> str:
        """--out 指定时直接使用，否则为 <output.dir>/<stem>.<format>"""
        if args.out:
            return args.out
        return os.path.join(config["output"]["dir"], f"{stem}.{config['output']['format']}")

    def emit(self, path: str, fmt: str, header: Sequence[str], rows: Sequence[Sequence[Any]],
             payload: Any = None) -> Optional[str]:
        """按格式写出表格；JSON 格式写出 payload（默认为行字典列表）"""
        if fmt == "json":
            data = payload if payload is not None else [dict(zip(header, row)) for row in rows]
            return write_json(data, path)
        return write_csv(header, rows, path)

    def write_manifest(self, args: argparse.Namespace, config: Dict[str, Any],
                       outputs: Sequence[Optional[str]], seeds: Optional[Dict[str, Any]] = None,
                       results: Optional[Dict[str, Any]] = None) -> str:
        """写出运行清单"""
        manifest = build_manifest(args.command, self.argv, config,
                                  [p for p in outputs if p], seeds, results, self.version)
        path = manifest_path_for(args.out, config["output"]["dir"])
        write_json(manifest, path)
        logger.info(_t("已写入运行清单") + f": {path}")
        return path

    # ---- 主流程 ------------------------------------------------------------

    def run(self, args_list: Optional[Sequence[str]] = None) -> int:
        """运行主逻辑

        Args:
            args_list: 命令行参数列表，默认取 sys.argv[1:]

        Returns:
            int: 退出码
        """
        self.argv = list(sys.argv[1:] if args_list is None else args_list)
        try:
            args = self.parse_args(self.argv)
        except SystemExit as e:
            return EXIT_OK if e.code in (0, None) else EXIT_USAGE

        self._setup_cli_logging(verbose=args.verbose, quiet=args.quiet)

        try:
            config = self.update_config(args)
            apply_logging_config(config.get("logging", {}))
            self._setup_cli_logging(verbose=args.verbose, quiet=args.quiet)
            return self.execute(args, config)
        except (UsageError, ConfigError) as e:
            logger.error(_t("参数错误") + f": {e}")
            return EXIT_USAGE
        except BakSneppenError as e:
            logger.error(_t("运行失败") + f": {type(e).__name__}: {e}")
            return EXIT_FAILURE


def main(cli_class: type, args_list: Optional[Sequence[str]] = None) -> int:
    """主入口函数

    Args:
        cli_class: CLI 类
        args_list: 命令行参数列表

    Returns:
        int: 退出码
    """
    cli = cli_class()
    return cli.run(args_list)
