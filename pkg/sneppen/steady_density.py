"""稳态密度模块

由 ℬ₁ 与 𝒢 组装稳态对象：
- B_{∘,0}(x) = ∫_{1−x}^{1} [𝒢″(ξ)ℬ₁(ξ) − 𝒢(ξ)ℬ₁″(ξ)]/ξ dξ
- q(x, y) = 𝒢′(1−x)ℬ₁′(1−y) + B_{∘,0}(x)，0 ≤ x ≤ y ≤ 1
- 五维联合密度 Σ_ν q(min(f_ν, f_{ν+1}), max(f_ν, f_{ν+1}))
- 边缘密度与分布函数，以及 N → ∞ 时猜想的极限分布

边缘密度有两种约定：derived 为 3/5 + 2ℬ₁′(1−x)，与有限 k 的多项式边缘密度一致；
printed 为 3/5 + ℬ₁′(1−x)。边界条件本身从不重新归一化。
"""

import threading
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicHermiteSpline

from logger import setup_logger, _ as _t
from models.config import QuadratureConfig, SolverConfig
from sneppen import ode5
from sneppen.hypergeom import Hypergeometric, default_context
from utils.config_manager import ConfigValidator
from utils.exceptions import DomainError, QuadratureError

logger = setup_logger(__name__)

ArrayLike = Union[float, np.ndarray]

MARGINAL_CONVENTIONS = ("derived", "printed")
CRITICAL_FITNESS = 2.0 / 3.0


def conjectured_cdf(x: ArrayLike) -> ArrayLike:
    """N → ∞ 时猜想的边缘分布：[2/3, 1] 上的均匀分布"""
    x_arr = np.asarray(x, dtype=float)
    out = np.clip(3.0 * x_arr - 2.0, 0.0, 1.0)
    return float(out) if np.ndim(x) == 0 else out


class SteadyModel:
    """稳态模型

    构造后不再修改；B_{∘,0} 的插值表在第一次使用时建立（加锁），
    之后所有求值都可以并发调用。

    Args:
        sol: ℬ₁ 的稠密解，默认按 SolverConfig() 求解
        quad_cfg: 数值积分参数
        ctx: 超几何求值器
        marginal_convention: "derived" 或 "printed"
    """

    def __init__(self, sol: Optional[ode5.DenseSolution] = None,
                 quad_cfg: Optional[QuadratureConfig] = None,
                 ctx: Optional[Hypergeometric] = None,
                 marginal_convention: str = "derived"):
        self.ctx = ctx or default_context()
        self.sol = sol or ode5.solve(SolverConfig(), ctx=self.ctx)
        self.quad_cfg = quad_cfg or QuadratureConfig()
        self.marginal_convention = ConfigValidator.validate_choice(
            marginal_convention, "marginal_convention", list(MARGINAL_CONVENTIONS)
        ).lower()
        self._table: Optional[CubicHermiteSpline] = None
        self._table_lock = threading.Lock()
        self._clip_warned = False

    def __repr__(self) -> str:
        return f"SteadyModel(convention={self.marginal_convention}, sol={self.sol!r})"

    @property
    def x_max(self) -> float:
        """不需要外推的最大 x"""
        return 1.0 - self.sol.y_min

    @property
    def marginal_factor(self) -> float:
        return 2.0 if self.marginal_convention == "derived" else 1.0

    # ---- B_{∘,0} -----------------------------------------------------------

    def integrand(self, xi: float) -> float:
        """[𝒢″(ξ)ℬ₁(ξ) − 𝒢(ξ)ℬ₁″(ξ)]/ξ"""
        g = self.ctx.scriptG_all(xi)
        return (g[2] * self.sol.eval(xi, 0) - g[0] * self.sol.eval(xi, 2)) / xi

    def _quad(self, lo: float, hi: float) -> float:
        value, abserr, *rest = quad(self.integrand, lo, hi,
                                    epsabs=self.quad_cfg.abs_tol,
                                    epsrel=self.quad_cfg.rel_tol,
                                    limit=self.quad_cfg.limit, full_output=1)
        target = max(self.quad_cfg.abs_tol, self.quad_cfg.rel_tol * abs(value))
        if abserr > target:
            if abserr > 1e3 * target:
                raise QuadratureError(
                    f"积分 [{lo:g}, {hi:g}] 未收敛: 误差估计 {abserr:.3e}")
            logger.warning(_t("积分误差估计超出容差") + f": [{lo:g}, {hi:g}] err={abserr:.3e}")
        return value

    def _clip(self, x: float) -> Tuple[float, bool]:
        if not 0.0 <= x <= 1.0:
            raise DomainError(f"x 必须在 [0, 1] 内: {x}")
        if x <= self.x_max:
            return x, False
        if not self._clip_warned:
            self._clip_warned = True
            logger.warning(_t("x 接近 1，B∘,0 的积分下限截断在 y_min") + f": x_max={self.x_max:g}")
        return self.x_max, True

    def b_circ_0(self, x: float) -> float:
        """B_{∘,0}(x)，在 [1−x, 1] 上自适应积分

        x > 1 − y_min 时积分下限截断在 y_min 并记录一次告警。
        """
        x, _clipped = self._clip(float(x))
        if x == 0.0:
            return 0.0
        return self._quad(1.0 - x, 1.0)

    def _build_table(self) -> CubicHermiteSpline:
        nodes = np.linspace(0.0, self.x_max, self.quad_cfg.table_points)
        values = np.zeros_like(nodes)
        for i in range(1, len(nodes)):
            values[i] = values[i - 1] + self._quad(1.0 - nodes[i], 1.0 - nodes[i - 1])
        slopes = np.array([self.integrand(1.0 - x) for x in nodes])
        logger.debug(_t("B∘,0 插值表已建立") + f": {len(nodes)} 个节点")
        return CubicHermiteSpline(nodes, values, slopes)

    @property
    def table(self) -> CubicHermiteSpline:
        """B_{∘,0} 的三次 Hermite 插值表"""
        if self._table is None:
            with self._table_lock:
                if self._table is None:
                    self._table = self._build_table()
        return self._table

    def b_circ_0_table(self, x: ArrayLike) -> ArrayLike:
        """用插值表批量求 B_{∘,0}，x > 1 − y_min 处取截断值"""
        x_arr = np.asarray(x, dtype=float)
        if np.any((x_arr < 0) | (x_arr > 1)):
            raise DomainError(f"x 必须在 [0, 1] 内: {x}")
        out = self.table(np.minimum(x_arr, self.x_max))
        return float(out) if np.ndim(x) == 0 else out

    # ---- q 与联合密度 ------------------------------------------------------

    def q_steady(self, x: float, y: float) -> float:
        """q(x, y) = 𝒢′(1−x)ℬ₁′(1−y) + B_{∘,0}(x)，要求 0 ≤ x ≤ y ≤ 1"""
        if not 0.0 <= x <= y <= 1.0:
            raise DomainError(f"需要 0 ≤ x ≤ y ≤ 1: x={x}, y={y}")
        return self.ctx.scriptG(1.0 - x, 1) * self.sol.eval(1.0 - y, 1) + self.b_circ_0(x)

    def _q_bulk(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        # 𝒢′(1−x) = G(x)
        return self.ctx.G(lo) * self.sol.eval(1.0 - hi, 1) + self.b_circ_0_table(lo)

    def joint_density(self, f: ArrayLike) -> ArrayLike:
        """五维联合密度

        Args:
            f: 形状 (5,) 或 (n, 5) 的适应度向量

        Returns:
            标量或长度为 n 的数组
        """
        f_arr = np.asarray(f, dtype=float)
        single = f_arr.ndim == 1
        f_arr = np.atleast_2d(f_arr)
        if f_arr.shape[-1] != 5:
            raise DomainError(f"联合密度需要 5 个分量: {f_arr.shape}")
        if np.any((f_arr < 0) | (f_arr > 1)):
            raise DomainError("适应度必须在 [0, 1] 内")
        nxt = np.roll(f_arr, -1, axis=1)
        lo = np.minimum(f_arr, nxt).ravel()
        hi = np.maximum(f_arr, nxt).ravel()
        out = self._q_bulk(lo, hi).reshape(f_arr.shape).sum(axis=1)
        return float(out[0]) if single else out

    # ---- 边缘分布 ----------------------------------------------------------

    def marginal_pdf_flagged(self, x: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
        """边缘密度及外推标记"""
        x_arr = np.asarray(x, dtype=float)
        if np.any((x_arr < 0) | (x_arr > 1)):
            raise DomainError(f"x 必须在 [0, 1] 内: {x}")
        value, flag = self.sol.eval_flagged(1.0 - x_arr, 1)
        return 0.6 + self.marginal_factor * value, flag

    def marginal_pdf(self, x: ArrayLike) -> ArrayLike:
        return self.marginal_pdf_flagged(x)[0]

    def marginal_cdf_flagged(self, x: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
        """边缘分布函数 3x/5 + c[ℬ₁(1) − ℬ₁(1−x)] 及外推标记"""
        x_arr = np.asarray(x, dtype=float)
        if np.any((x_arr < 0) | (x_arr > 1)):
            raise DomainError(f"x 必须在 [0, 1] 内: {x}")
        b1_top = float(self.sol.boundary[0])
        value, flag = self.sol.eval_flagged(1.0 - x_arr, 0)
        return 0.6 * x_arr + self.marginal_factor * (b1_top - value), flag

    def marginal_cdf(self, x: ArrayLike) -> ArrayLike:
        return self.marginal_cdf_flagged(x)[0]

    def marginal_moment(self, r: int = 1) -> float:
        """∫₀¹ x^r g_marg(x) dx"""
        if r < 0:
            raise DomainError(f"矩的阶数不能为负: {r}")
        value, _err = quad(lambda x: x ** r * self.marginal_pdf(x), 0.0, 1.0,
                           epsabs=self.quad_cfg.abs_tol, epsrel=self.quad_cfg.rel_tol,
                           limit=self.quad_cfg.limit)
        return value

    # ---- 耦合方程残差 ------------------------------------------------------

    def b0(self, y: float) -> float:
        """ℬ₀(y) = ∫_0^{1−y} B_{∘,0} = ∫_y^1 h(s)(s − y) ds，h 为 integrand"""
        if not self.sol.y_min <= y <= 1.0:
            raise DomainError(f"y 必须在 [y_min, 1] 内: {y}")
        value, _err = quad(lambda s: self.integrand(s) * (s - y), y, 1.0,
                           epsabs=self.quad_cfg.abs_tol, epsrel=self.quad_cfg.rel_tol,
                           limit=self.quad_cfg.limit)
        return value

    def first_coupled_residual(self, y: float, h: float = 1e-4) -> Dict[str, float]:
        """yℬ₀″(y) − [𝒢″ℬ₁ − 𝒢ℬ₁″](y)

        ℬ₀″(y) = B_{∘,0}′(1−y) 由中心差分得到；同时给出相反整体符号下的残差。
        """
        x = 1.0 - y
        d_b = (self.b_circ_0(x + h) - self.b_circ_0(x - h)) / (2 * h)
        g = self.ctx.scriptG_all(y)
        rhs = g[2] * self.sol.eval(y, 0) - g[0] * self.sol.eval(y, 2)
        lhs = y * d_b
        return {
            "residual": lhs - rhs,
            "printed_sign_residual": lhs + rhs,
            "scale": abs(lhs) + abs(rhs),
        }

    def second_coupled_residual(self, y: float) -> Dict[str, float]:
        """4yℬ₀ + y²ℬ₀′ + (2+y³)ℬ₀″/3 − [3y𝒢ℬ₁′ − (2+y³)𝒢′ℬ₁″/3]"""
        g = self.ctx.scriptG_all(y)
        b0 = self.b0(y)
        b0p = -self.b_circ_0(1.0 - y)
        b0pp = self.integrand(y)
        w = (2.0 + y ** 3) / 3.0
        lhs = 4 * y * b0 + y ** 2 * b0p + w * b0pp
        rhs = 3 * y * g[0] * self.sol.eval(y, 1) - w * g[1] * self.sol.eval(y, 2)
        return {"residual": lhs - rhs, "scale": abs(4 * y * b0) + abs(y ** 2 * b0p)
                + abs(w * b0pp) + abs(rhs)}

    def integro_differential_residual(self, x: float, h: float = 1e-4) -> Dict[str, float]:
        """(1−x)B_{∘,0}′(x) + G′(x)∫ₓ¹B_{1,∘} − B_{1,∘}′(x)(1 − ∫₀ˣG)

        代入 ∫ₓ¹B_{1,∘} = ℬ₁(1−x)、B_{1,∘}′(x) = −ℬ₁″(1−x)、1 − ∫₀ˣG = 𝒢(1−x)。
        """
        y = 1.0 - x
        d_b = (self.b_circ_0(x + h) - self.b_circ_0(x - h)) / (2 * h)
        terms = np.array([
            (1.0 - x) * d_b,
            self.ctx.G(x, 1) * self.sol.eval(y, 0),
            self.sol.eval(y, 2) * self.ctx.scriptG(y, 0),
        ])
        return {"residual": float(terms.sum()), "scale": float(np.abs(terms).sum())}

    def summary(self) -> Dict[str, Any]:
        """全局一致性数据：ℬ₁(0)、两种约定下的 CDF(1)、g_marg(0)"""
        b1_0 = float(self.sol.eval(0.0, 0))
        b1_top = float(self.sol.boundary[0])
        return {
            "B1_at_0": b1_0,
            "cdf_at_1_derived": 0.6 + 2.0 * (b1_top - b1_0),
            "cdf_at_1_printed": 0.6 + (b1_top - b1_0),
            "marginal_pdf_at_0": float(self.marginal_pdf(0.0)),
            "convention": self.marginal_convention,
        }
