"""超几何函数模块

F_{n,m}(x) = ₂F₁((n+i√2)/3, (n−i√2)/3; m/3; x) 以及由它组合出的 G、G₂、𝒢。

参数是一对共轭复数，因此级数每一项都是实数：
    t_{s+1} = t_s · ((n/3+s)² + 2/9) / ((m/3+s)(1+s)) · x
所有自变量都满足 |x| ≤ 1/2，直接求和即可达到机器精度。

两种约定：
- consistent（默认）：常数与自变量取 −1/2、(x−1)³/2、−x³/2、(1−x)³z/(z−3)，
  满足 𝒢′(x) = G(1−x)、G′(0) = 1、𝒢(1) = 1 与 G₂(x,1) = G(x)。
- printed：按正号自变量、G₂ 中 F_{1,2}{z/(3−z)}、通解中 F_{2,3} 书写的版本，
  仅用于对照，consistency_report() 给出两者的偏差。
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property, lru_cache
from math import comb
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from logger import setup_logger, _ as _t
from models.config import SeriesConfig
from utils.exceptions import ParameterError, SeriesConvergenceError, SingularPointError

logger = setup_logger(__name__)

ArrayLike = Union[float, np.ndarray]

_TINY = np.finfo(float).tiny


class Convention(Enum):
    """超几何组合的书写约定"""
    CONSISTENT = "consistent"
    PRINTED = "printed"


@dataclass(frozen=True)
class FnmSpec:
    """F_{n,m} 的参数

    c = m/3 不能是非正整数。
    """
    n: int
    m: int

    def __post_init__(self):
        if self.m <= 0 and self.m % 3 == 0:
            raise ParameterError(f"m/3 不能是非正整数: m={self.m}")

    @property
    def ab(self) -> float:
        """a·b = (n² + 2)/9"""
        return (self.n ** 2 + 2) / 9.0

    @property
    def c(self) -> float:
        return self.m / 3.0


def _series(spec: FnmSpec, x: ArrayLike, order: int, cfg: SeriesConfig) -> ArrayLike:
    """逐项求和 F_{n,m} 的 order 阶导数

    第 s 项为 C_s·s!/(s−r)!·x^{s−r}，相邻项之比
    ((n/3+s)² + 2/9) / ((m/3+s)(s+1−r)) · x。
    """
    if order < 0:
        raise ParameterError(f"导数阶数不能为负: {order}")
    x_arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x_arr)) or np.any(np.abs(x_arr) >= 1.0):
        raise ParameterError(f"F_{{{spec.n},{spec.m}}} 的自变量必须满足 |x| < 1: {x}")

    a = spec.n / 3.0
    c = spec.c
    # t_r = C_r · r!
    lead = 1.0
    for s in range(order):
        lead *= ((a + s) ** 2 + 2.0 / 9.0) / ((c + s) * (s + 1)) * (s + 1)
    term = np.full_like(x_arr, lead)
    total = term.copy()

    for s in range(order, order + cfg.max_terms):
        term = term * (((a + s) ** 2 + 2.0 / 9.0) / ((c + s) * (s + 1 - order))) * x_arr
        total = total + term
        if np.all(np.abs(term) <= cfg.rel_tol * np.maximum(np.abs(total), _TINY)):
            break
    else:
        raise SeriesConvergenceError(
            f"F_{{{spec.n},{spec.m}}} 在 {cfg.max_terms} 项内未收敛 (x={x})")

    if np.ndim(x) == 0:
        return float(total)
    return total


def F(spec: FnmSpec, x: ArrayLike, cfg: Optional[SeriesConfig] = None) -> ArrayLike:
    """F_{n,m}(x)

    Args:
        spec: 参数 (n, m)
        x: 自变量，|x| < 1，支持 numpy 数组
        cfg: 级数参数

    Raises:
        ParameterError: |x| ≥ 1
        SeriesConvergenceError: 达到最大项数
    """
    return _series(spec, x, 0, cfg or SeriesConfig())


def F_deriv(spec: FnmSpec, x: ArrayLike, order: int = 1,
            cfg: Optional[SeriesConfig] = None) -> ArrayLike:
    """F_{n,m} 的 order 阶导数（逐项求导）"""
    if order < 1:
        raise ParameterError(f"导数阶数必须 ≥ 1: {order}")
    return _series(spec, x, order, cfg or SeriesConfig())


F12 = FnmSpec(1, 2)
F21 = FnmSpec(2, 1)
F23 = FnmSpec(2, 3)
F24 = FnmSpec(2, 4)
F45 = FnmSpec(4, 5)


class Hypergeometric:
    """给定约定与级数参数下的 G、G₂、𝒢 求值器

    𝒢 的 0..5 阶导数按 y 缓存，供常微分方程系数反复使用。实例创建后不可修改，
    可以在多个线程中同时使用。
    """

    def __init__(self, cfg: Optional[SeriesConfig] = None,
                 convention: Union[Convention, str] = Convention.CONSISTENT,
                 cache_size: int = 1 << 16):
        self.cfg: SeriesConfig = cfg or SeriesConfig()
        self.convention: Convention = Convention(convention)
        self.kappa: float = -0.5 if self.convention is Convention.CONSISTENT else 0.5
        self._script_all = lru_cache(maxsize=cache_size)(self._script_all_uncached)

    def __repr__(self) -> str:
        return f"Hypergeometric(convention={self.convention.value})"

    def f(self, spec: FnmSpec, x: ArrayLike, order: int = 0) -> ArrayLike:
        return _series(spec, x, order, self.cfg)

    @cached_property
    def c21(self) -> float:
        """F_{2,1}{κ}"""
        return self.f(F21, self.kappa)

    @cached_property
    def c45(self) -> float:
        """F_{4,5}{κ}"""
        return self.f(F45, self.kappa)

    # ---- G ----------------------------------------------------------------

    def _composite(self, spec: FnmSpec, u: ArrayLike, du: List[ArrayLike], order: int) -> ArrayLike:
        """d^order/dx^order F(u(x))，du 为 (u′, u″, u‴)"""
        f = [self.f(spec, u, r) for r in range(order + 1)]
        if order == 0:
            return f[0]
        if order == 1:
            return f[1] * du[0]
        if order == 2:
            return f[2] * du[0] ** 2 + f[1] * du[1]
        return f[3] * du[0] ** 3 + 3 * f[2] * du[0] * du[1] + f[1] * du[2]

    def G(self, x: ArrayLike, order: int = 0) -> ArrayLike:
        """G(x) 及其 1..3 阶导数，x ∈ [0, 1]

        G = (9/8)[F_{4,5}{κ}·F_{2,1}(u) − (1−x)²·F_{2,1}{κ}·F_{4,5}(u)]，u = κ(1−x)³。
        """
        if order not in range(4):
            raise ParameterError(f"G 只支持 0..3 阶导数: {order}")
        x_arr = np.asarray(x, dtype=float)
        k = self.kappa
        w = 1.0 - x_arr
        u = k * w ** 3
        du = [-3 * k * w ** 2, 6 * k * w, np.full_like(w, -6 * k)]
        w2 = [w ** 2, -2 * w, np.full_like(w, 2.0), np.zeros_like(w)]
        first = self._composite(F21, u, du, order)
        second = sum(comb(order, r) * w2[r] * self._composite(F45, u, du, order - r)
                     for r in range(order + 1))
        out = 9.0 / 8.0 * (self.c45 * first - self.c21 * second)
        return float(out) if np.ndim(x) == 0 else out

    def G2(self, x: ArrayLike, z: ArrayLike) -> ArrayLike:
        """k 方向生成函数的因子 G₂(x, z)，x, z ∈ [0, 1]"""
        x_arr = np.asarray(x, dtype=float)
        z_arr = np.asarray(z, dtype=float)
        w = 1.0 - x_arr
        outer = z_arr / (z_arr - 3.0)
        if self.convention is Convention.CONSISTENT:
            inner = w ** 3 * z_arr / (z_arr - 3.0)
            second = self.f(F21, outer)
        else:
            inner = w ** 3 * z_arr / (3.0 - z_arr)
            second = self.f(F12, z_arr / (3.0 - z_arr))
        out = 9.0 / (2.0 * (3.0 - z_arr) ** 2) * (
            self.f(F45, outer) * self.f(F21, inner) - w ** 2 * second * self.f(F45, inner))
        return float(out) if np.ndim(out) == 0 else out

    # ---- 𝒢 ----------------------------------------------------------------

    def scriptG_series(self, x: ArrayLike, order: int = 0) -> ArrayLike:
        """𝒢 的 0..2 阶导数，直接由级数逐项求导得到"""
        if order not in (0, 1, 2):
            raise ParameterError(f"级数形式的 𝒢 只支持 0..2 阶导数: {order}")
        x_arr = np.asarray(x, dtype=float)
        k = self.kappa
        u = k * x_arr ** 3
        a, b = self.c21, self.c45
        if order == 0:
            out = 1.5 * a * self.f(F12, u) + 9.0 / 8.0 * x_arr * b * self.f(F24, u)
        elif order == 1:
            out = (1.5 * a * 3 * k * x_arr ** 2 * self.f(F12, u, 1)
                   + 9.0 / 8.0 * b * (self.f(F24, u) + 3 * k * x_arr ** 3 * self.f(F24, u, 1)))
        else:
            out = (1.5 * a * (9 * k ** 2 * x_arr ** 4 * self.f(F12, u, 2)
                              + 6 * k * x_arr * self.f(F12, u, 1))
                   + 9.0 / 8.0 * b * (12 * k * x_arr ** 2 * self.f(F24, u, 1)
                                      + 9 * k ** 2 * x_arr ** 5 * self.f(F24, u, 2)))
        return float(out) if np.ndim(x) == 0 else out

    def _script_all_uncached(self, y: float) -> Tuple[float, ...]:
        g0 = self.scriptG_series(y, 0)
        g1 = self.scriptG_series(y, 1)
        y3 = y ** 3
        g2 = -(3 * y * g0 + 3 * y ** 2 * g1) / (y3 + 2)
        if y == 0.0:
            return (g0, g1, g2)
        g3 = -(6 * y ** 2 * g1 + (5 * y3 - 2) * g2) / (y * (y3 + 2))
        g4 = -((11 * y3 + 4) * g2 + y * (7 * y3 - 4) * g3) / (y ** 2 * (y3 + 2))
        g5 = -(18 * y * (11 * y3 + 16) * g3 + 9 * y ** 2 * (11 * y3 - 2) * g4) / (
            11 * y ** 6 + 26 * y3 + 8)
        return (g0, g1, g2, g3, g4, g5)

    def scriptG_all(self, y: float) -> Tuple[float, ...]:
        """(𝒢, 𝒢′, …, 𝒢⁽⁵⁾)(y)，y ∈ (0, 1]

        Raises:
            SingularPointError: y = 0
            ParameterError: y ∉ [0, 1]
        """
        y = float(y)
        if not 0.0 <= y <= 1.0:
            raise ParameterError(f"𝒢 的自变量必须在 [0, 1] 内: {y}")
        if y == 0.0:
            raise SingularPointError("𝒢 的高阶导数链在 y = 0 处奇异")
        return self._script_all(y)

    def scriptG(self, x: float, order: int = 0) -> float:
        """𝒢⁽ᵒʳᵈᵉʳ⁾(x)

        0、1 阶来自级数，2 阶由 3y𝒢 + 3y²𝒢′ + (y³+2)𝒢″ = 0 给出，3..5 阶依次由
        其余三个微分关系解出最高阶导数。

        Raises:
            SingularPointError: x = 0 且 order ≥ 3
        """
        if order not in range(6):
            raise ParameterError(f"𝒢 只支持 0..5 阶导数: {order}")
        x = float(x)
        if not 0.0 <= x <= 1.0:
            raise ParameterError(f"𝒢 的自变量必须在 [0, 1] 内: {x}")
        if x == 0.0:
            if order >= 3:
                raise SingularPointError(f"𝒢 的 {order} 阶导数在 y = 0 处奇异")
            return self._script_all_uncached(0.0)[order]
        return self._script_all(x)[order]

    # ---- 通解常数 ----------------------------------------------------------

    def basis(self, x: float, order: int = 0) -> Tuple[float, float]:
        """B_{∘,j} 方程的两个基函数 P = (1−x)²F_{4,5}(u)、Q = F_{2,1}(u)（printed 为 F_{2,3}）"""
        k = self.kappa
        w = 1.0 - x
        u = k * w ** 3
        du = -3 * k * w ** 2
        second = F21 if self.convention is Convention.CONSISTENT else F23
        if order == 0:
            return w ** 2 * self.f(F45, u), self.f(second, u)
        if order == 1:
            p = -2 * w * self.f(F45, u) + w ** 2 * self.f(F45, u, 1) * du
            return p, self.f(second, u, 1) * du
        raise ParameterError(f"基函数只支持 0..1 阶导数: {order}")

    def basis_constants(self) -> Tuple[float, float]:
        """由 B(0)=0、B′(0)=1 解出 (d₁, d₂)"""
        p0, q0 = self.basis(0.0, 0)
        p1, q1 = self.basis(0.0, 1)
        d1, d2 = np.linalg.solve(np.array([[p0, q0], [p1, q1]]), np.array([0.0, 1.0]))
        return float(d1), float(d2)

    def wronskian_normalization(self) -> float:
        """2F_{2,1}F_{4,5} + (3/2)(F_{4,5}F′_{2,1} − F_{2,1}F′_{4,5}) 在 κ 处的值，应为 8/9"""
        k = self.kappa
        a, b = self.c21, self.c45
        return 2 * a * b + 1.5 * (b * self.f(F21, k, 1) - a * self.f(F45, k, 1))


_default_context: Optional[Hypergeometric] = None


def default_context() -> Hypergeometric:
    """默认（consistent）求值器"""
    global _default_context
    if _default_context is None:
        _default_context = Hypergeometric()
    return _default_context


def G(x: ArrayLike, order: int = 0) -> ArrayLike:
    return default_context().G(x, order)


def G2(x: ArrayLike, z: ArrayLike) -> ArrayLike:
    return default_context().G2(x, z)


def scriptG(x: float, order: int = 0) -> float:
    return default_context().scriptG(x, order)


def g_taylor_coefficients(n: int) -> List[Fraction]:
    """G(x) = Σ γ_i x^i 的精确系数 γ_0..γ_n

    γ₀ = 0, γ₁ = 1, γ₂ = 1/2，其后
    γ_i = γ_{i−1} − [1 + 1/(i(i−1))]γ_{i−2} + [1/3 + 1/(i(i−2))]γ_{i−3}。
    """
    gamma = [Fraction(0), Fraction(1), Fraction(1, 2)]
    for i in range(3, n + 1):
        gamma.append(gamma[i - 1]
                     - (1 + Fraction(1, i * (i - 1))) * gamma[i - 2]
                     + (Fraction(1, 3) + Fraction(1, i * (i - 2))) * gamma[i - 3])
    return gamma[:n + 1]


def _fd(fn, x: float, h: float, order: int) -> float:
    if order == 1:
        return (fn(x + h) - fn(x - h)) / (2 * h)
    return (fn(x + h) - 2 * fn(x) + fn(x - h)) / h ** 2


def consistency_report(cfg: Optional[SeriesConfig] = None,
                       grid_points: int = 101) -> Dict[str, Dict[str, Any]]:
    """对两种约定分别计算关键恒等式的偏差

    Returns:
        dict: 约定名 -> {dscriptG_vs_G, G_prime_0, scriptG_1, G2_at_1, d1, d2, d1_plus_d2, wronskian}
    """
    grid = np.linspace(0.01, 0.99, grid_points)
    report: Dict[str, Dict[str, Any]] = {}
    for convention in Convention:
        ctx = Hypergeometric(cfg, convention)
        d1, d2 = ctx.basis_constants()
        report[convention.value] = {
            "dscriptG_vs_G": float(np.max(np.abs(
                np.array([ctx.scriptG(x, 1) for x in grid]) - ctx.G(1.0 - grid)))),
            "G_prime_0": ctx.G(0.0, 1),
            "G_second_0": ctx.G(0.0, 2),
            "scriptG_1": ctx.scriptG(1.0),
            "G2_at_1": float(np.max(np.abs(ctx.G2(grid, 1.0) - ctx.G(grid)))),
            "d1": d1,
            "d2": d2,
            "d1_plus_d2": d1 + d2,
            "wronskian": ctx.wronskian_normalization(),
        }
    dev = report[Convention.PRINTED.value]["dscriptG_vs_G"]
    if dev > 1e-6:
        logger.warning(_t("printed 约定不满足 𝒢′(x)=G(1−x)") + f": max|Δ|={dev:.3e}")
    return report
