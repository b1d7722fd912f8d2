"""五阶常微分方程模块

ℬ₁ 满足 Σ_{j=0}^{5} c_j(y) ℬ₁⁽ʲ⁾(y) = 0，边界条件全部给在 y = 1：
    ℬ₁(1) = 1/5, ℬ₁′(1) = 0, ℬ₁″(1) = −1/5, ℬ₁⁽³⁾(1) = 1, ℬ₁⁽⁴⁾(1) = −18/5

方程在 y = 0 处奇异（c₅ ~ −2y³𝒢(0)），因此从 y = 1 向下积分到 y_min 为止，
(0, y_min) 上的值由 y_min 处的 Taylor 展开外推并带有外推标记。
"""

import threading
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from logger import setup_logger, _ as _t
from models.config import SolverConfig
from sneppen.hypergeom import Hypergeometric, default_context
from utils.exceptions import DomainError, SingularityError, SolverError, StepSizeUnderflowError

logger = setup_logger(__name__)

ArrayLike = Union[float, np.ndarray]

DEFAULT_BOUNDARY: Tuple[Fraction, ...] = (
    Fraction(1, 5), Fraction(0), Fraction(-1, 5), Fraction(1), Fraction(-18, 5),
)


def coefficients(y: float, ctx: Optional[Hypergeometric] = None) -> np.ndarray:
    """化简形式的系数 (c₀, …, c₅)(y)，只用到 𝒢 与 𝒢′

    Args:
        y: 自变量，y ∈ (0, 1]
        ctx: 超几何求值器，默认 consistent 约定

    Returns:
        np.ndarray: 长度为 6 的数组
    """
    ctx = ctx or default_context()
    g = ctx.scriptG_all(y)
    g0, g1 = g[0], g[1]
    y3 = y ** 3
    c0 = 18 * y ** 4 / (y3 + 2) ** 2 * (y * (y3 - 22) * g1 + (5 * y3 - 14) * g0)
    c1 = -y * c0
    c2 = 6 / (y3 + 2) * (y * (3 * y ** 6 - 38 * y3 - 4) * g1 + (15 * y ** 6 - 10 * y3 + 4) * g0)
    c3 = -12 * y * (y * (4 * y3 - 1) * g1 + (5 * y3 + 1) * g0)
    c4 = -3 * y ** 2 * (y * (y3 + 2) * g1 + (9 * y3 - 2) * g0)
    c5 = y3 * (y3 + 2) * (y * g1 - g0)
    return np.array([c0, c1, c2, c3, c4, c5])


def raw_coefficients(y: float, ctx: Optional[Hypergeometric] = None) -> np.ndarray:
    """未化简形式的系数，用到 𝒢 的 0..5 阶导数，用于与 coefficients() 互相校验"""
    ctx = ctx or default_context()
    g0, g1, g2, g3, g4, g5 = ctx.scriptG_all(y)
    y2, y3 = y ** 2, y ** 3
    c0 = (6 * (5 * y3 - 2) * g2 + 6 * y * (5 * y3 + 2) * g3
          + y2 * (9 * y3 - 6) * g4 + y3 * (y3 + 2) * g5)
    c1 = 3 * y * ((y3 + 4) * g2 + y * (3 * y3 - 4) * g3 + y2 * (y3 + 2) * g4)
    c2 = (6 * (2 - 5 * y3) * g0 - 6 * y * (13 * y3 + 2) * g1 - 9 * y ** 5 * g2
          + y3 * ((11 * y3 + 4) * g3 + (y3 + 2) * y * g4))
    c3 = y * (-3 * (19 * y3 + 4) * g0 + 3 * y * (4 - 9 * y3) * g1
              + 4 * y2 * (4 * y3 - 1) * g2 + 3 * y3 * (y3 + 2) * g3)
    c4 = 3 * y2 * ((2 - 6 * y3) * g0 + 2 * y * (y3 - 1) * g1 + y2 * (y3 + 2) * g2)
    c5 = y3 * (y3 + 2) * (-g0 + y * g1)
    return np.array([c0, c1, c2, c3, c4, c5])


@dataclass
class SolverDiagnostics:
    """求解诊断信息"""
    method: str
    steps: int = 0
    nfev: int = 0
    min_abs_c5: float = np.inf
    c5_sign: int = 0
    y_min: float = 0.0
    y_start: float = 1.0
    message: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "method": self.method,
            "steps": self.steps,
            "nfev": self.nfev,
            "min_abs_c5": self.min_abs_c5,
            "c5_sign": self.c5_sign,
            "y_min": self.y_min,
            "y_start": self.y_start,
            "message": self.message,
        }


class _Rhs:
    """u′ = A(y)u，u₅′ 由方程解出；同时记录 |c₅| 的最小值与符号"""

    def __init__(self, ctx: Hypergeometric, c5_floor: float):
        self.ctx = ctx
        self.c5_floor = c5_floor
        self.min_abs_c5 = np.inf
        self.signs = set()

    def fifth(self, y: float, u: np.ndarray) -> float:
        c = coefficients(y, self.ctx)
        scale = float(np.max(np.abs(c[:5]))) or 1.0
        if abs(c[5]) < self.c5_floor * scale:
            raise SingularityError(f"c₅ 在 y={y:.6g} 处接近零", y=y, value=float(c[5]))
        self.min_abs_c5 = min(self.min_abs_c5, abs(c[5]))
        self.signs.add(int(np.sign(c[5])))
        return -float(np.dot(c[:5], u)) / c[5]

    def __call__(self, y: float, u: np.ndarray) -> np.ndarray:
        du = np.empty(5)
        du[:4] = u[1:]
        du[4] = self.fifth(y, u)
        return du


class DenseSolution:
    """ℬ₁ 的稠密解

    interpolant(y) 返回形状为 (5, …) 的状态 (ℬ₁, …, ℬ₁⁽⁴⁾)。对象创建后不再修改，
    可在多个线程中同时求值；外推告警只输出一次。
    """

    def __init__(self, interpolant, nodes: np.ndarray, boundary: Sequence[Any],
                 y_start: float, y_min: float, rhs: _Rhs, diagnostics: SolverDiagnostics):
        self._interp = interpolant
        self.nodes = np.sort(np.asarray(nodes, dtype=float))
        self.boundary = tuple(boundary)
        self.y_start = float(y_start)
        self.y_min = float(y_min)
        self._rhs = rhs
        self.diagnostics = diagnostics
        self._floor_state = np.asarray(self._interp(self.y_min), dtype=float).reshape(5)
        self._warned = False
        self._lock = threading.Lock()

    def __repr__(self) -> str:
        return (f"DenseSolution(y∈[{self.y_min:g}, {self.y_start:g}], "
                f"steps={self.diagnostics.steps})")

    def _warn_once(self) -> None:
        with self._lock:
            if self._warned:
                return
            self._warned = True
        logger.warning(_t("在 y_min 以下使用 Taylor 外推") + f": y_min={self.y_min:g}")

    def _extrapolate(self, y: np.ndarray, order: int) -> np.ndarray:
        dy = y - self.y_min
        out = np.zeros_like(y)
        for m in range(5 - order):
            out = out + self._floor_state[order + m] * dy ** m / factorial(m)
        return out

    def eval_flagged(self, y: ArrayLike, order: int = 0,
                     allow_extrapolation: bool = True) -> Tuple[ArrayLike, ArrayLike]:
        """求值并返回外推标记

        Args:
            y: 自变量，标量或数组
            order: 导数阶数 0..4
            allow_extrapolation: 是否允许 y < y_min 的 Taylor 外推

        Returns:
            (值, 是否外推)

        Raises:
            DomainError: y 不在 [0, y_start] 内，或不允许外推时 y < y_min
        """
        if order not in range(5):
            raise DomainError(f"导数阶数必须在 0..4 内: {order}")
        y_arr = np.atleast_1d(np.asarray(y, dtype=float))
        if np.any(~np.isfinite(y_arr)) or np.any(y_arr < 0) or np.any(y_arr > self.y_start):
            raise DomainError(f"y 超出求解区间 [0, {self.y_start:g}]: {y}")
        below = y_arr < self.y_min
        if np.any(below) and not allow_extrapolation:
            raise DomainError(f"y 低于 y_min={self.y_min:g}: {y}")

        out = np.empty_like(y_arr)
        inside = ~below
        if np.any(inside):
            out[inside] = np.asarray(self._interp(y_arr[inside]))[order]
        if np.any(below):
            self._warn_once()
            out[below] = self._extrapolate(y_arr[below], order)
        at_start = y_arr == self.y_start
        if np.any(at_start):
            out[at_start] = float(self.boundary[order])

        if np.ndim(y) == 0:
            return float(out[0]), bool(below[0])
        return out, below

    def eval(self, y: ArrayLike, order: int = 0) -> ArrayLike:
        """ℬ₁⁽ᵒʳᵈᵉʳ⁾(y)"""
        return self.eval_flagged(y, order)[0]

    def __call__(self, y: ArrayLike, order: int = 0) -> ArrayLike:
        return self.eval(y, order)

    def state(self, y: float) -> np.ndarray:
        """(ℬ₁, …, ℬ₁⁽⁴⁾)(y)"""
        return np.array([self.eval(y, order) for order in range(5)])

    def fifth_derivative(self, y: float) -> float:
        """由方程本身给出的 ℬ₁⁽⁵⁾(y)"""
        return self._rhs.fifth(float(y), self.state(y))

    def fourth_slope(self, y: float, h: float = 1e-5) -> float:
        """ℬ₁⁽⁴⁾ 稠密插值的二阶差分斜率

        靠近 y_start 或 y_min 时改用单侧三点公式，不会进入外推区。

        Raises:
            DomainError: y 不在 [y_min, y_start] 内
        """
        y = float(y)
        if not self.y_min <= y <= self.y_start:
            raise DomainError(f"残差只在 [{self.y_min:g}, {self.y_start:g}] 内有定义: {y}")
        h = min(h, (self.y_start - self.y_min) / 4)
        if y + h > self.y_start:
            f0, f1, f2 = (self.eval(y - r * h, 4) for r in range(3))
            return (3 * f0 - 4 * f1 + f2) / (2 * h)
        if y - h < self.y_min:
            f0, f1, f2 = (self.eval(y + r * h, 4) for r in range(3))
            return (-3 * f0 + 4 * f1 - f2) / (2 * h)
        return (self.eval(y + h, 4) - self.eval(y - h, 4)) / (2 * h)

    def residual(self, y: float, h: float = 1e-5) -> Tuple[float, float]:
        """方程残差 Σ c_jℬ₁⁽ʲ⁾ 与量级 Σ|c_jℬ₁⁽ʲ⁾|

        ℬ₁⁽⁵⁾ 取 ℬ₁⁽⁴⁾ 稠密插值的差分，不经过右端项，
        因此插值与方程不一致时残差不为零。
        """
        y = float(y)
        u5 = self.fourth_slope(y, h)
        terms = coefficients(y, self._rhs.ctx) * np.append(self.state(y), u5)
        return float(np.sum(terms)), float(np.sum(np.abs(terms)))

    def rhs_residual(self, y: float) -> Tuple[float, float]:
        """以求解器右端项作为 ℬ₁⁽⁵⁾ 的残差，只反映系数求值的舍入误差"""
        y = float(y)
        u = self.state(y)
        terms = coefficients(y, self._rhs.ctx) * np.append(u, self._rhs.fifth(y, u))
        return float(np.sum(terms)), float(np.sum(np.abs(terms)))


def _rk4(rhs: _Rhs, y_start: float, y_min: float, u0: np.ndarray, step: float):
    """定步长经典 RK4，向下积分，返回节点、状态与导数"""
    n_steps = int(np.ceil((y_start - y_min) / step - 1e-12))
    ys = np.linspace(y_start, y_min, n_steps + 1)
    us = np.empty((n_steps + 1, 5))
    fs = np.empty((n_steps + 1, 5))
    us[0] = u0
    fs[0] = rhs(ys[0], u0)
    for s in range(n_steps):
        h = ys[s + 1] - ys[s]
        y, u = ys[s], us[s]
        k1 = fs[s]
        k2 = rhs(y + h / 2, u + h / 2 * k1)
        k3 = rhs(y + h / 2, u + h / 2 * k2)
        k4 = rhs(y + h, u + h * k3)
        us[s + 1] = u + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        fs[s + 1] = rhs(ys[s + 1], us[s + 1])
    return ys, us, fs


def solve(cfg: Optional[SolverConfig] = None,
          bc: Sequence[Any] = DEFAULT_BOUNDARY,
          y_start: float = 1.0,
          ctx: Optional[Hypergeometric] = None) -> DenseSolution:
    """从 y_start 向下积分到 y_min

    Args:
        cfg: 求解参数；fixed_step 非空时使用定步长 RK4
        bc: y_start 处的 (ℬ₁, …, ℬ₁⁽⁴⁾)
        y_start: 起点，默认 1
        ctx: 超几何求值器

    Returns:
        DenseSolution: 稠密解

    Raises:
        SingularityError: |c₅| 低于下限
        StepSizeUnderflowError: 自适应步长过小
        SolverError: 其他积分失败
    """
    cfg = cfg or SolverConfig()
    ctx = ctx or default_context()
    if len(bc) != 5:
        raise SolverError(f"需要 5 个边界值: {len(bc)}")
    if not cfg.y_min < y_start <= 1.0:
        raise DomainError(f"起点必须在 (y_min, 1] 内: {y_start}")

    u0 = np.array([float(v) for v in bc])
    rhs = _Rhs(ctx, cfg.c5_floor)
    method = "RK4" if cfg.fixed_step is not None else cfg.method
    diagnostics = SolverDiagnostics(method=method, y_min=cfg.y_min, y_start=y_start)

    if cfg.fixed_step is not None:
        ys, us, fs = _rk4(rhs, y_start, cfg.y_min, u0, cfg.fixed_step)
        interpolant = CubicHermiteSpline(ys[::-1], us[::-1], fs[::-1], axis=0)

        def evaluate(y):
            return np.moveaxis(interpolant(y), -1, 0)

        nodes = ys
        diagnostics.steps = len(ys) - 1
        diagnostics.nfev = 4 * diagnostics.steps + 1
        diagnostics.message = "fixed step"
    else:
        result = solve_ivp(rhs, (y_start, cfg.y_min), u0, method=cfg.method,
                           rtol=cfg.rel_tol, atol=cfg.abs_tol,
                           first_step=cfg.initial_step, dense_output=True)
        if result.status != 0:
            if "step size" in result.message.lower():
                raise StepSizeUnderflowError(f"步长过小: {result.message}")
            raise SolverError(f"积分失败: {result.message}")
        evaluate = result.sol
        nodes = result.t
        diagnostics.steps = len(result.t) - 1
        diagnostics.nfev = int(result.nfev)
        diagnostics.message = result.message

    diagnostics.min_abs_c5 = float(rhs.min_abs_c5)
    diagnostics.c5_sign = rhs.signs.pop() if len(rhs.signs) == 1 else 0
    if diagnostics.c5_sign == 0:
        logger.warning(_t("c₅ 在积分区间内变号"))
    logger.info(_t("五阶方程求解完成") + f": method={method}, steps={diagnostics.steps}, "
                f"min|c5|={diagnostics.min_abs_c5:.3e}")
    return DenseSolution(evaluate, nodes, bc, y_start, cfg.y_min, rhs, diagnostics)
