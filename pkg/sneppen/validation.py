"""验证报告模块

把各模块的解析结果与精确系数表、恒等式和蒙特卡洛模拟逐项对照，生成 ValidationReport。

- quick: 精确检查、超几何恒等式、方程残差与收敛趋势（不运行模拟）
- full: 另外运行 k 步与稳态模拟并做 KS 检验

单项检查抛出的异常按 error_handling.fail_strategy 处理，报告不会中途中断。
"""

import copy
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np

from logger import setup_logger, _ as _t
from models.config import QuadratureConfig, SeriesConfig, SimConfig, SolverConfig
from models.report import CheckRecord, ValidationReport
from sneppen import exact_coeffs, hypergeom, ode5
from sneppen.exact_coeffs import CoeffTable
from sneppen.hypergeom import F12, F21, F23, F24, F45, Convention, Hypergeometric
from sneppen.reference_tables import PUBLISHED_K, published_table
from sneppen.simulator import Simulator, ks_critical, ks_test
from sneppen.steady_density import SteadyModel
from utils.config_manager import ConfigManager
from utils.error_handler import ErrorHandler

logger = setup_logger(__name__)

LEVELS = ("quick", "full")
STABILITY_K_MAX = 10
PRINTED_D_SUM = Fraction(40, 9)
STEADY_KS_TOLERANCE = 5e-3
# ℬ₁⁽⁵⁾ 取自稠密插值的差分，比插值本身低一阶
ODE_INTERPOLANT_TOLERANCE = 1e-5
KGEN_K_MAX = 16
KGEN_Z = 0.05


@dataclass(frozen=True)
class CheckSpec:
    """一项检查的定义"""
    name: str
    method: Callable[[CheckRecord], None]
    tolerance: Optional[float] = None
    full_only: bool = False


def tabulated(fn: Callable[[np.ndarray], np.ndarray], points: int = 20001) -> Callable:
    """在 [0,1] 的均匀网格上把 fn 制成线性插值表，用于大样本 KS 检验"""
    grid = np.linspace(0.0, 1.0, points)
    values = np.asarray(fn(grid), dtype=float)
    return lambda x: np.interp(x, grid, values)


class Validator:
    """验收检查集合

    Args:
        level: "quick" 或 "full"
        config: 完整配置字典，默认使用内置默认值
        tables: 替换 k = 1..5 的系数表（用于故障注入）
        error_handler: 单项检查的错误处理器
    """

    def __init__(self, level: str = "quick", config: Optional[Mapping[str, Any]] = None,
                 tables: Optional[Sequence[CoeffTable]] = None,
                 error_handler: Optional[ErrorHandler] = None):
        if level not in LEVELS:
            raise ValueError(f"level 必须是 {LEVELS} 之一: {level}")
        self.level = level
        self.config: Dict[str, Any] = copy.deepcopy(dict(config or ConfigManager.DEFAULT_CONFIG))
        self.tables = tuple(tables) if tables is not None else None
        strategy = self.config.get("error_handling", {}).get("fail_strategy", "log")
        self.error_handler = error_handler or ErrorHandler(fail_strategy=strategy,
                                                           on_failure=lambda e: e)
        self.series_cfg = SeriesConfig.from_config(self.config.get("series"))
        self.solver_cfg = SolverConfig.from_config(self.config.get("solver"))
        self.quad_cfg = QuadratureConfig.from_config(self.config.get("quadrature"))
        self.validation = self.config.get("validation", {})
        self.convention = self.config.get("density", {}).get("marginal_convention", "derived")
        self.ctx = Hypergeometric(self.series_cfg)
        self._sol: Optional[ode5.DenseSolution] = None
        self._model: Optional[SteadyModel] = None

    # ---- 共享对象 ----------------------------------------------------------

    @property
    def sol(self) -> ode5.DenseSolution:
        if self._sol is None:
            self._sol = ode5.solve(self.solver_cfg, ctx=self.ctx)
        return self._sol

    @property
    def model(self) -> SteadyModel:
        if self._model is None:
            self._model = SteadyModel(self.sol, self.quad_cfg, self.ctx, self.convention)
        return self._model

    def sim_config(self, n_samples: int) -> SimConfig:
        return SimConfig.from_config(self.config.get("simulation"), n_samples=n_samples)

    def checks(self) -> List[CheckSpec]:
        """按报告顺序列出全部检查"""
        return [
            CheckSpec("table_reproduction", self.check_table_reproduction, 0.0),
            CheckSpec("stabilization", self.check_stabilization, 0.0),
            CheckSpec("exact_normalization", self.check_exact_normalization, 0.0),
            CheckSpec("hypergeometric_identities", self.check_hypergeometric, 1e-9),
            CheckSpec("kgen_factorization", self.check_kgen_factorization, 1e-8),
            CheckSpec("hypergeometric_d1_plus_d2", self.info_d_sum),
            CheckSpec("hypergeometric_conventions", self.info_conventions),
            CheckSpec("ode_correctness", self.check_ode, ODE_INTERPOLANT_TOLERANCE),
            CheckSpec("steady_self_consistency", self.check_steady, 1e-2),
            CheckSpec("steady_normalization_conventions", self.info_steady),
            CheckSpec("coupled_system_residuals", self.check_coupled, 1e-5),
            CheckSpec("kstep_vs_simulation", self.check_kstep, full_only=True),
            CheckSpec("steady_vs_simulation", self.check_steady_simulation,
                      STEADY_KS_TOLERANCE, full_only=True),
            CheckSpec("convergence_trend", self.check_trend),
        ]

    def run(self) -> ValidationReport:
        """运行全部检查"""
        report = ValidationReport(level=self.level)
        logger.info(_t("开始验证") + f": level={self.level}")
        for spec in self.checks():
            record = report.add(CheckRecord(spec.name, tolerance=spec.tolerance))
            if spec.full_only and self.level != "full":
                record.skip("仅在 full 级别运行")
                continue
            record.start()
            outcome = self.error_handler.call(spec.method, record)
            if isinstance(outcome, Exception):
                message = f"{type(outcome).__name__}: {outcome}"
                if self.error_handler.fail_strategy == "skip":
                    record.skip(message)
                else:
                    record.fail(message)
            elif record.failed:
                logger.error(_t("检查未通过") + f": {spec.name}, measured={record.measured}")
            else:
                logger.debug(_t("检查完成") + f": {spec.name} [{record.status.value}]")
        report.finish()
        logger.info(_t("验证结束") + f": {report.counts()}")
        return report

    # ---- 精确检查 ----------------------------------------------------------

    def _early_tables(self) -> Sequence[CoeffTable]:
        if self.tables is not None:
            return self.tables
        return exact_coeffs.tables_up_to(max(PUBLISHED_K))

    def check_table_reproduction(self, record: CheckRecord) -> None:
        tables = {t.k: t for t in self._early_tables()}
        mismatches = []
        for k in PUBLISHED_K:
            expected = published_table(k)
            actual = dict(tables[k].entries)
            for entry in sorted(set(expected) | set(actual)):
                if expected.get(entry, 0) != actual.get(entry, 0):
                    mismatches.append({"k": k, "entry": list(entry),
                                       "expected": str(expected.get(entry, 0)),
                                       "actual": str(actual.get(entry, 0))})
        record.finish(not mismatches, measured=len(mismatches), mismatches=mismatches[:20],
                      entries=sum(len(published_table(k)) for k in PUBLISHED_K))

    def check_stabilization(self, record: CheckRecord) -> None:
        rows = exact_coeffs.stabilization_report(STABILITY_K_MAX)
        violations = sum(len(row["violations"]) for row in rows)
        record.finish(violations == 0, measured=violations,
                      claimed=sum(row["claimed"] for row in rows), k_max=STABILITY_K_MAX)

    def check_exact_normalization(self, record: CheckRecord) -> None:
        bad = []
        for table in exact_coeffs.tables_up_to(STABILITY_K_MAX):
            total = exact_coeffs.integral_gk(table)
            marginal = exact_coeffs.marginal_poly_k(table).integral(0, 1)
            if total != 1 or marginal != 1:
                bad.append({"k": table.k, "integral": str(total), "marginal": str(marginal)})
        record.finish(not bad, measured=len(bad), failures=bad)

    # ---- 超几何恒等式 ------------------------------------------------------

    def check_hypergeometric(self, record: CheckRecord) -> None:
        ctx = self.ctx
        x50 = np.linspace(0.0, 0.98, 50)
        x100 = np.linspace(0.0, 1.0, 100)
        w = 1.0 - x50
        ode = (4 * ctx.G(x50) - 7 * w * ctx.G(x50, 1) + 3 * w ** 2 * ctx.G(x50, 2)
               - (2 + w ** 3) / 3 * ctx.G(x50, 3))
        d1, d2 = ctx.basis_constants()
        deviations = {
            "F_at_0": (max(abs(hypergeom.F(s, 0.0, self.series_cfg) - 1.0)
                           for s in (F12, F21, F23, F24, F45)), 1e-12),
            "G_at_0": (abs(ctx.G(0.0)), 1e-10),
            "G_prime_at_0": (abs(ctx.G(0.0, 1) - 1.0), 1e-10),
            "G_second_at_0": (abs(ctx.G(0.0, 2) - 1.0), 1e-10),
            "G_ode_residual": (float(np.max(np.abs(ode))), 1e-9),
            "scriptG_prime_vs_G": (max(abs(ctx.scriptG(x, 1) - ctx.G(1.0 - x)) for x in x100), 1e-12),
            "G2_at_z_1": (float(np.max(np.abs(ctx.G2(x100, 1.0) - ctx.G(x100)))), 1e-12),
            "wronskian": (abs(ctx.wronskian_normalization() - 8.0 / 9.0), 1e-12),
            "basis_constants": (max(abs(d1 + 9.0 / 8.0 * ctx.c21), abs(d2 - 9.0 / 8.0 * ctx.c45)),
                                1e-12),
        }
        passed = all(dev <= tol for dev, tol in deviations.values())
        record.finish(passed, measured=max(dev for dev, _tol in deviations.values()),
                      deviations={k: {"deviation": d, "tolerance": t}
                                  for k, (d, t) in deviations.items()})

    def check_kgen_factorization(self, record: CheckRecord) -> None:
        """Σ_{i,k}α_{i,j,k}xⁱzᵏ = G₂(x,z)·Σ_kα_{1,j,k}zᵏ，在截断的系数表上比较"""
        tables = exact_coeffs.tables_up_to(KGEN_K_MAX)
        printed = Hypergeometric(self.series_cfg, Convention.PRINTED)
        worst, worst_printed = 0.0, 0.0
        points = []
        for j in (1, 2):
            for x in (0.3, 0.7):
                full, row = exact_coeffs.kgen_partial_sums(tables, x, KGEN_Z, j)
                deviation = abs(full - row * self.ctx.G2(x, KGEN_Z)) / abs(full)
                printed_dev = abs(full - row * printed.G2(x, KGEN_Z)) / abs(full)
                worst = max(worst, deviation)
                worst_printed = max(worst_printed, printed_dev)
                points.append({"j": j, "x": x, "full": full, "row": row,
                               "deviation": deviation, "printed_deviation": printed_dev})
        record.finish(worst < 1e-8, measured=worst, printed_convention=worst_printed,
                      z=KGEN_Z, k_max=KGEN_K_MAX, points=points)

    def info_d_sum(self, record: CheckRecord) -> None:
        d1, d2 = self.ctx.basis_constants()
        printed = Hypergeometric(self.series_cfg, Convention.PRINTED)
        p1, p2 = printed.basis_constants()
        note = (f"d₁+d₂ = {d1 + d2:.6g}（printed 约定 {p1 + p2:.6g}），两种约定都得不到 40/9；"
                "该差异为已知出入，不参与判定")
        record.inform(measured=d1 + d2, d1=d1, d2=d2, printed=float(PRINTED_D_SUM),
                      difference=d1 + d2 - float(PRINTED_D_SUM),
                      printed_convention_sum=p1 + p2, reproduced=False, note=note)
        logger.warning(_t("d₁+d₂ 与 40/9 不符") + f": {d1 + d2:.6g}")

    def info_conventions(self, record: CheckRecord) -> None:
        record.inform(report=hypergeom.consistency_report(self.series_cfg))

    # ---- 五阶方程 ----------------------------------------------------------

    def check_ode(self, record: CheckRecord) -> None:
        sol = self.sol
        boundary_exact = all(sol.eval(1.0, r) == float(sol.boundary[r]) for r in range(5))
        expected = exact_coeffs.boundary_conditions_from_limits(
            exact_coeffs.limits(STABILITY_K_MAX))
        boundary_from_limits = all(float(b) == float(e) for b, e in zip(sol.boundary, expected))

        residuals, rhs_residuals = [], []
        for y in np.linspace(sol.y_min, sol.y_start, 100):
            res, scale = sol.residual(y)
            residuals.append(abs(res) / scale if scale else abs(res))
            res, scale = sol.rhs_residual(y)
            rhs_residuals.append(abs(res) / scale if scale else abs(res))
        residual = max(residuals)
        rhs_residual = max(rhs_residuals)

        tight = SolverConfig.from_config(self.solver_cfg.to_dict(),
                                         rel_tol=self.solver_cfg.rel_tol / 100,
                                         abs_tol=self.solver_cfg.abs_tol / 100)
        halving = abs(ode5.solve(tight, ctx=self.ctx).eval(0.5) - sol.eval(0.5))

        fixed = SolverConfig.from_config(self.solver_cfg.to_dict(), fixed_step=1e-3)
        rk4 = abs(ode5.solve(fixed, ctx=self.ctx).eval(0.5) - sol.eval(0.5))

        identity = 0.0
        for y in (0.3, 0.6, 0.9):
            c = ode5.coefficients(y, self.ctx)
            identity = max(identity, abs(c[1] + y * c[0]) / max(abs(c[1]), 1.0))
        raw = 0.0
        for y in (0.4, 0.8):
            c = ode5.coefficients(y, self.ctx)
            r = ode5.raw_coefficients(y, self.ctx)
            raw = max(raw, float(np.max(np.abs(c - r)) / np.max(np.abs(c))))

        passed = (boundary_exact and boundary_from_limits
                  and residual < ODE_INTERPOLANT_TOLERANCE and rhs_residual < 1e-7
                  and halving < 1e-8 and identity < 1e-14 and raw < 1e-8 and rk4 < 1e-6)
        record.finish(passed, measured=residual, boundary_exact=boundary_exact,
                      boundary_from_limits=boundary_from_limits,
                      boundary_expected=[str(v) for v in expected],
                      rhs_residual=rhs_residual,
                      tolerance_halving=halving, fixed_step_rk4=rk4,
                      c1_plus_y_c0=identity, raw_vs_simplified=raw,
                      diagnostics=sol.diagnostics.to_dict())

    # ---- 稳态密度 ----------------------------------------------------------

    def check_steady(self, record: CheckRecord) -> None:
        model = self.model
        grid = np.linspace(0.0, 1.0, 1000)
        pdf0 = abs(model.marginal_pdf(0.0) - 0.6)
        cdf = model.marginal_cdf(grid)
        monotone = bool(np.all(np.diff(cdf) >= -1e-12))
        nonneg = float(np.min(model.marginal_pdf(grid)))
        cdf1 = abs(model.marginal_cdf(1.0) - 1.0)
        passed = pdf0 < 1e-10 and monotone and cdf1 < 1e-2
        record.finish(passed, measured=cdf1, pdf_at_0_deviation=pdf0, cdf_monotone=monotone,
                      min_pdf=nonneg)

    def info_steady(self, record: CheckRecord) -> None:
        model = self.model
        xs = np.linspace(0.0, 1.0, 101)
        lo, hi = np.meshgrid(xs, xs, indexing="ij")
        mask = lo <= hi
        q_min = float(np.min(model._q_bulk(lo[mask], hi[mask])))
        record.inform(measured=model.summary()["B1_at_0"], q_min=q_min, **model.summary())

    def check_coupled(self, record: CheckRecord) -> None:
        model = self.model
        worst: Dict[str, float] = {"first": 0.0, "first_printed_sign": 0.0,
                                   "second": 0.0, "integro_differential": 0.0}
        for y in np.linspace(0.05, 0.95, 10):
            first = model.first_coupled_residual(y)
            second = model.second_coupled_residual(y)
            integro = model.integro_differential_residual(1.0 - y)
            worst["first"] = max(worst["first"], abs(first["residual"]) / first["scale"])
            worst["first_printed_sign"] = max(worst["first_printed_sign"],
                                              abs(first["printed_sign_residual"]) / first["scale"])
            worst["second"] = max(worst["second"], abs(second["residual"]) / second["scale"])
            worst["integro_differential"] = max(worst["integro_differential"],
                                                abs(integro["residual"]) / integro["scale"])
        measured = max(worst["first"], worst["second"], worst["integro_differential"])
        record.finish(measured < 1e-5, measured=measured, **worst)

    # ---- 模拟对照 ----------------------------------------------------------

    def check_kstep(self, record: CheckRecord) -> None:
        n = int(self.validation.get("kstep_samples", 1000000))
        confidence = float(self.validation.get("confidence", 0.99))
        ks = [int(k) for k in self.validation.get("kstep_ks", [1, 3, 5])]
        tables = exact_coeffs.tables_up_to(max(max(ks), 1))
        simulator = Simulator(self.sim_config(n))
        results = {}
        for k in ks:
            ecdf = simulator.run_kstep(k)
            cdf = (lambda x: np.clip(x, 0.0, 1.0)) if k == 0 else \
                exact_coeffs.marginal_cdf_poly_k(tables[k - 1])
            results[str(k)] = ks_test(ecdf, cdf, confidence).to_dict()
        passed = all(r["passed"] for r in results.values())
        record.tolerance = ks_critical(n, confidence)
        record.finish(passed, measured=max(r["statistic"] for r in results.values()),
                      results=results)

    def check_steady_simulation(self, record: CheckRecord) -> None:
        n = int(self.validation.get("steady_samples", 10000000))
        confidence = float(self.validation.get("confidence", 0.99))
        cfg = self.sim_config(n)
        if cfg.n_species != 5:
            record.skip(f"解析参照只适用于 N=5: N={cfg.n_species}")
            return
        ecdf = Simulator(cfg).run_steady()
        derived = SteadyModel(self.sol, self.quad_cfg, self.ctx, "derived")
        printed = SteadyModel(self.sol, self.quad_cfg, self.ctx, "printed")
        d_derived = ks_test(ecdf, tabulated(derived.marginal_cdf), confidence)
        d_printed = ks_test(ecdf, tabulated(printed.marginal_cdf), confidence)
        chosen = d_derived if self.convention == "derived" else d_printed
        tolerance = max(STEADY_KS_TOLERANCE, chosen.critical)
        record.tolerance = tolerance
        record.finish(chosen.statistic < tolerance, measured=chosen.statistic,
                      derived=d_derived.to_dict(), printed=d_printed.to_dict(),
                      empirical_mean=ecdf.mean, empirical_std_error=ecdf.std_error,
                      analytic_mean=self.model.marginal_moment(1),
                      burn_in=cfg.burn_in, thinning=cfg.thinning, seed=cfg.seed)

    # ---- 收敛趋势 ----------------------------------------------------------

    def check_trend(self, record: CheckRecord) -> None:
        ks = sorted(int(k) for k in self.validation.get("trend_k", [4, 6, 8, 10, 12]))
        tables = exact_coeffs.tables_up_to(max(ks))
        grid = np.linspace(0.0, 0.95, 501)
        limit = self.model.marginal_pdf(grid)
        distances = {}
        for k in ks:
            poly = exact_coeffs.marginal_poly_k(tables[k - 1])
            distances[k] = float(np.max(np.abs(poly(grid) - limit)))
        values = [distances[k] for k in ks]
        monotone = all(b < a for a, b in zip(values, values[1:]))
        record.finish(monotone, measured=values[-1],
                      distances={str(k): v for k, v in distances.items()})


def validate(level: str = "quick", config: Optional[Mapping[str, Any]] = None,
             tables: Optional[Sequence[CoeffTable]] = None) -> ValidationReport:
    """运行验证并返回报告"""
    return Validator(level, config, tables).run()
