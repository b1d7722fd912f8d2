"""曲线数据模块

只生成数据，不绘图：
- margdens: k = 0..6 的多项式边缘密度与极限边缘密度
- cdfcompare: 五物种边缘分布函数与 N → ∞ 的猜想极限
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np

from logger import setup_logger, _ as _t
from sneppen import exact_coeffs
from sneppen.steady_density import SteadyModel, conjectured_cdf

logger = setup_logger(__name__)

FIGURES = ("margdens", "cdfcompare")
MARGDENS_K = 6

Table = Tuple[List[str], List[List[float]]]


def margdens(model: SteadyModel, grid: Sequence[float]) -> Table:
    """列：x, g_0 .. g_6, limit, extrapolated（k = 0 为常数 1）"""
    xs = np.asarray(grid, dtype=float)
    polys = [exact_coeffs.marginal_poly_k(t) for t in exact_coeffs.tables_up_to(MARGDENS_K)]
    columns = [np.ones_like(xs)] + [p(xs) for p in polys]
    limit, flags = model.marginal_pdf_flagged(xs)
    header = ["x"] + [f"g{k}" for k in range(MARGDENS_K + 1)] + ["limit", "extrapolated"]
    rows = [[float(x)] + [float(c[n]) for c in columns] + [float(limit[n]), bool(flags[n])]
            for n, x in enumerate(xs)]
    return header, rows


def cdfcompare(model: SteadyModel, grid: Sequence[float]) -> Table:
    """列：x, cdf5, conjectured, extrapolated"""
    xs = np.asarray(grid, dtype=float)
    cdf, flags = model.marginal_cdf_flagged(xs)
    conj = conjectured_cdf(xs)
    header = ["x", "cdf5", "conjectured", "extrapolated"]
    rows = [[float(x), float(cdf[n]), float(conj[n]), bool(flags[n])] for n, x in enumerate(xs)]
    return header, rows


def figure_data(which: str, model: SteadyModel, points: int = 201,
                grid: Optional[Sequence[float]] = None) -> Table:
    """生成指定曲线的数据表

    Raises:
        ValueError: 未知的曲线名称
    """
    if which not in FIGURES:
        raise ValueError(f"未知的曲线: {which}，可选 {', '.join(FIGURES)}")
    xs = np.linspace(0.0, 1.0, points) if grid is None else np.asarray(grid, dtype=float)
    if which == "cdfcompare":
        # 2/3 处是猜想分布的拐点
        xs = np.unique(np.append(xs, 2.0 / 3.0))
    logger.info(_t("生成曲线数据") + f": {which}, {len(xs)} " + _t("个点"))
    return (margdens if which == "margdens" else cdfcompare)(model, xs)
