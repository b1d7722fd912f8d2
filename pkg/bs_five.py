#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""bsfive 主脚本

五物种 Bak–Sneppen 模型的命令行入口：精确系数表、五阶方程、稳态密度、
蒙特卡洛模拟与验证报告。
"""

import argparse
import os
import sys
from typing import Any, Dict, Optional, Sequence

import numpy as np

from cli.base_cli import EXIT_OK, BaseCLI, UsageError, main
from logger import setup_logger, _ as _t
from models.config import QuadratureConfig, SeriesConfig, SimConfig, SolverConfig
from sneppen import exact_coeffs, figures, hypergeom, ode5
from sneppen.hypergeom import FnmSpec
from sneppen.simulator import Simulator, ks_test
from sneppen.steady_density import SteadyModel
from sneppen.validation import Validator, tabulated
from utils.serialization import format_rational, write_json

__version__ = "0.1.0"

logger = setup_logger(__name__)


class BsFiveCLI(BaseCLI):
    """bsfive CLI 类"""

    def __init__(self):
        super().__init__(
            description="bsfive - 五物种 Bak–Sneppen 模型的精确与数值稳态分布",
            prog="bsfive",
            version=__version__,
        )

    def _add_commands(self, subparsers: Any, common: argparse.ArgumentParser) -> None:
        p = subparsers.add_parser("coeffs", parents=[common], help=_t("输出精确系数表 α_{i,j,k}"))
        p.add_argument("--k", type=int, default=None, help=_t("步数 k"))

        p = subparsers.add_parser("limits", parents=[common], help=_t("输出极限系数 β 与边界条件"))
        p.add_argument("--kmax", type=int, default=None, help=_t("读取极限时迭代到的步数"))

        p = subparsers.add_parser("solve", parents=[common], help=_t("求解 ℬ₁ 的五阶方程"))
        p.add_argument("--ymin", type=float, default=None, help=_t("积分下限 y_min"))
        p.add_argument("--tol", type=float, default=None, help=_t("相对容差"))

        for name, text in (("marginal", "稳态边缘密度"), ("cdf", "稳态边缘分布函数")):
            p = subparsers.add_parser(name, parents=[common], help=_t(text))
            p.add_argument("--ymin", type=float, default=None, help=_t("积分下限 y_min"))
            p.add_argument("--tol", type=float, default=None, help=_t("相对容差"))
            p.add_argument("--k", type=int, default=None,
                           help=_t("改为输出第 k 步的精确多项式曲线"))

        p = subparsers.add_parser("simulate", parents=[common], help=_t("蒙特卡洛模拟"))
        p.add_argument("--n-species", type=int, default=None, help=_t("物种数 N"))
        p.add_argument("--samples", type=int, default=None, help=_t("记录的样本总数"))
        p.add_argument("--burn-in", type=int, default=None, help=_t("预热步数"))
        p.add_argument("--thin", type=int, default=None, help=_t("记录间隔步数"))
        p.add_argument("--kstep", type=int, default=None, help=_t("改为 k 步模拟"))
        p.add_argument("--histogram", type=int, default=None, metavar="BINS",
                       help=_t("输出直方图而不是样本"))
        p.add_argument("--pool-sites", action="store_true", help=_t("汇集所有位点的样本"))

        p = subparsers.add_parser("hyperg", parents=[common], help=_t("超几何函数求值"))
        p.add_argument("action", choices=["eval"])
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--m", type=int, required=True)
        p.add_argument("--x", type=float, required=True)
        p.add_argument("--order", type=int, default=0, help=_t("导数阶数"))

        p = subparsers.add_parser("figure-data", parents=[common], help=_t("输出曲线数据"))
        p.add_argument("--which", choices=list(figures.FIGURES), required=True)

        p = subparsers.add_parser("validate", parents=[common], help=_t("运行验证报告"))
        p.add_argument("--level", choices=["quick", "full"], default=None)

    def execute(self, args: argparse.Namespace, config: Dict[str, Any]) -> int:
        handler = {
            "coeffs": self.cmd_coeffs,
            "limits": self.cmd_limits,
            "solve": self.cmd_solve,
            "marginal": self.cmd_curve,
            "cdf": self.cmd_curve,
            "simulate": self.cmd_simulate,
            "hyperg": self.cmd_hyperg,
            "figure-data": self.cmd_figure_data,
            "validate": self.cmd_validate,
        }[args.command]
        return handler(args, config)

    # ---- 共用 --------------------------------------------------------------

    def _grid(self, config: Dict[str, Any]) -> np.ndarray:
        return np.linspace(0.0, 1.0, int(config["output"].get("grid_points", 201)))

    def _model(self, config: Dict[str, Any]) -> SteadyModel:
        ctx = hypergeom.Hypergeometric(SeriesConfig.from_config(config.get("series")))
        sol = ode5.solve(SolverConfig.from_config(config.get("solver")), ctx=ctx)
        return SteadyModel(sol, QuadratureConfig.from_config(config.get("quadrature")), ctx,
                           config.get("density", {}).get("marginal_convention", "derived"))

    # ---- 子命令 ------------------------------------------------------------

    def cmd_coeffs(self, args: argparse.Namespace, config: Dict[str, Any]) -> int:
        k = int(config["coeffs"]["default_k"])
        max_k = int(config["coeffs"].get("max_k", 15))
        if not 1 <= k <= max_k:
            raise UsageError(f"k 必须在 1..{max_k} 内: {k}")
        table = exact_coeffs.table_at(k)
        fmt = config["output"]["format"]
        out = self.output_path(args, config, f"coeffs_k{k}")
        written = self.emit(out, fmt, ["i", "j", "value"], table.to_rows(), table.to_dict())
        self.write_manifest(args, config, [written], results={"k": k, "nonzero": len(table)})
        return EXIT_OK

    def cmd_limits(self, args: argparse.Namespace, config: Dict[str, Any]) -> int:
        k_max = int(config["coeffs"]["stability_k"])
        if k_max < 2:
            raise UsageError(f"kmax 必须 ≥ 2: {k_max}")
        lt = exact_coeffs.limits(k_max)
        bc = [format_rational(v) for v in exact_coeffs.boundary_conditions_from_limits(lt)]
        fmt = config["output"]["format"]
        out = self.output_path(args, config, f"limits_k{k_max}")
        written = self.emit(out, fmt, ["i", "j", "value"], lt.to_rows(),
                            {"limits": lt.to_dict(), "boundary_conditions": bc})
        self.write_manifest(args, config, [written],
                            results={"k_used": k_max, "boundary_conditions": bc})
        return EXIT_OK

    def cmd_solve(self, args: argparse.Namespace, config: Dict[str, Any]) -> int:
        model = self._model(config)
        sol = model.sol
        ys = np.linspace(sol.y_min, 1.0, int(config["output"].get("grid_points", 201)))
        rows = [[float(y), sol.eval(y, 0), sol.eval(y, 1), sol.eval(y, 2)] for y in ys]
        out = self.output_path(args, config, "solve")
        written = self.emit(out, config["output"]["format"], ["y", "B1", "B1p", "B1pp"], rows)
        diagnostics = dict(sol.diagnostics.to_dict(), **model.summary())
        if args.out and args.out != "-":
            diag_path = f"{os.path.splitext(args.out)[0]}.diagnostics.json"
        else:
            diag_path = os.path.join(config["output"]["dir"], "solve.diagnostics.json")
        write_json(diagnostics, diag_path)
        self.write_manifest(args, config, [written, diag_path], results=diagnostics)
        return EXIT_OK

    def cmd_curve(self, args: argparse.Namespace, config: Dict[str, Any]) -> int:
        if getattr(args, "k", None) is not None:
            return self._exact_curve(args, config, args.k)
        model = self._model(config)
        xs = self._grid(config)
        if args.command == "marginal":
            values, flags = model.marginal_pdf_flagged(xs)
        else:
            values, flags = model.marginal_cdf_flagged(xs)
        rows = [[float(x), float(v), bool(f)] for x, v, f in zip(xs, values, flags)]
        out = self.output_path(args, config, args.command)
        written = self.emit(out, config["output"]["format"], ["x", "value", "extrapolated"], rows)
        self.write_manifest(args, config, [written], results=model.summary())
        return EXIT_OK

    def _exact_curve(self, args: argparse.Namespace, config: Dict[str, Any], k: int) -> int:
        """第 k 步的精确边缘密度或分布函数，附精确均值与 i=1 行恒等式"""
        max_k = int(config["coeffs"].get("max_k", 15))
        if not 1 <= k < max_k:
            raise UsageError(f"k 必须在 1..{max_k - 1} 内: {k}")
        tables = exact_coeffs.tables_up_to(k + 1)
        density = exact_coeffs.marginal_poly_k(tables[k - 1])
        poly = density if args.command == "marginal" else density.antiderivative()
        xs = self._grid(config)
        rows = [[float(x), float(v), False] for x, v in zip(xs, poly(xs))]
        out = self.output_path(args, config, f"{args.command}_k{k}")
        written = self.emit(out, config["output"]["format"], ["x", "value", "extrapolated"], rows)
        results = {
            "k": k,
            "mean": format_rational(exact_coeffs.marginal_moment_k(tables[k - 1], 1)),
            "next_row_identity": exact_coeffs.marginal_from_next_row(tables[k]) == density,
        }
        self.write_manifest(args, config, [written], results=results)
        return EXIT_OK

    def cmd_simulate(self, args: argparse.Namespace, config: Dict[str, Any]) -> int:
        overrides = {"pool_sites": True} if args.pool_sites else {}
        cfg = SimConfig.from_config(config.get("simulation"), **overrides)
        simulator = Simulator(cfg)
        if args.kstep is not None:
            if args.kstep < 0:
                raise UsageError(f"kstep 不能为负: {args.kstep}")
            ecdf = simulator.run_kstep(args.kstep)
        else:
            ecdf = simulator.run_steady()

        results: Dict[str, Any] = {
            "n": len(ecdf),
            "mean": ecdf.mean,
            "std_error": ecdf.std_error,
            "moments": {str(r): ecdf.moment(r) for r in (1, 2, 3)},
        }
        confidence = float(config["validation"].get("confidence", 0.99))
        if cfg.n_species == 5:
            if args.kstep is None:
                reference = tabulated(self._model(config).marginal_cdf)
            elif args.kstep == 0:
                reference = lambda x: np.clip(x, 0.0, 1.0)  # noqa: E731
            else:
                reference = exact_coeffs.marginal_cdf_poly_k(exact_coeffs.table_at(args.kstep))
            results["ks"] = ks_test(ecdf, reference, confidence).to_dict()

        out = self.output_path(args, config, "simulate")
        fmt = config["output"]["format"]
        if args.histogram:
            edges, density = ecdf.histogram(args.histogram)
            rows = [[float(edges[n]), float(edges[n + 1]), float(d)] for n, d in enumerate(density)]
            written = self.emit(out, fmt, ["bin_lo", "bin_hi", "density"], rows)
        else:
            written = self.emit(out, fmt, ["value"], [[float(v)] for v in ecdf.samples])
        seeds = {"seed": cfg.seed, "n_replicas": cfg.n_replicas,
                 "spawn_keys": [list(s.spawn_key) for s in simulator.seeds]}
        self.write_manifest(args, config, [written], seeds=seeds, results=results)
        return EXIT_OK

    def cmd_hyperg(self, args: argparse.Namespace, config: Dict[str, Any]) -> int:
        cfg = SeriesConfig.from_config(config.get("series"))
        spec = FnmSpec(args.n, args.m)
        if args.order == 0:
            value = hypergeom.F(spec, args.x, cfg)
        else:
            value = hypergeom.F_deriv(spec, args.x, args.order, cfg)
        row = [args.n, args.m, args.x, args.order, float(value)]
        header = ["n", "m", "x", "order", "value"]
        out = args.out or "-"
        written = self.emit(out, config["output"]["format"], header, [row], dict(zip(header, row)))
        self.write_manifest(args, config, [written], results=dict(zip(header, row)))
        return EXIT_OK

    def cmd_figure_data(self, args: argparse.Namespace, config: Dict[str, Any]) -> int:
        model = self._model(config)
        header, rows = figures.figure_data(args.which, model,
                                           int(config["output"].get("grid_points", 201)))
        out = self.output_path(args, config, args.which)
        written = self.emit(out, config["output"]["format"], header, rows)
        self.write_manifest(args, config, [written], results=model.summary())
        return EXIT_OK

    def cmd_validate(self, args: argparse.Namespace, config: Dict[str, Any]) -> int:
        level = config["validation"].get("level", "quick")
        report = Validator(level, config).run()
        for line in report.summary_lines():
            print(line)
        out = args.out or os.path.join(config["output"]["dir"], "validation.json")
        written = write_json(report.to_dict(), out)
        self.write_manifest(args, config, [written],
                            seeds={"seed": config["simulation"].get("seed")},
                            results={"passed": report.passed, "counts": report.counts()})
        return report.exit_code


def main_entry(args_list: Optional[Sequence[str]] = None) -> int:
    """主入口"""
    return main(BsFiveCLI, args_list)


if __name__ == "__main__":
    sys.exit(main_entry())
