"""曲线数据模块单元测试"""

import numpy as np
import pytest
from scipy.integrate import trapezoid

from models.config import QuadratureConfig
from sneppen import exact_coeffs, figures, ode5
from sneppen.steady_density import SteadyModel


@pytest.fixture(scope="module")
def model():
    return SteadyModel(ode5.solve(), QuadratureConfig(table_points=201))


def column(table, name):
    header, rows = table
    index = header.index(name)
    return [row[index] for row in rows]


class TestMargdens:
    """测试 margdens 数据"""

    def test_header(self, model):
        """测试列名"""
        header, _ = figures.margdens(model, [0.0, 1.0])
        assert header == ["x", "g0", "g1", "g2", "g3", "g4", "g5", "g6", "limit",
                          "extrapolated"]

    def test_values_at_zero(self, model):
        """测试 x=0 处 g₀ = 1，其余密度都等于 3/5"""
        header, rows = figures.margdens(model, [0.0])
        row = dict(zip(header, rows[0]))
        assert row["g0"] == 1.0
        for k in range(1, figures.MARGDENS_K + 1):
            assert row[f"g{k}"] == pytest.approx(0.6, abs=1e-14)
        assert row["limit"] == pytest.approx(0.6, abs=1e-12)
        assert row["extrapolated"] is False

    def test_columns_match_exact_polynomials(self, model):
        """测试 g_k 列等于精确多项式的取值"""
        grid = np.linspace(0.0, 1.0, 11)
        table = figures.margdens(model, grid)
        poly = exact_coeffs.marginal_poly_k(exact_coeffs.table_at(4))
        assert column(table, "g4") == pytest.approx(list(poly(grid)), rel=1e-12, abs=1e-12)

    def test_exact_densities_normalized(self, model):
        """测试每个 g_k 列的梯形积分接近 1"""
        grid = np.linspace(0.0, 1.0, 2001)
        table = figures.margdens(model, grid)
        for k in range(figures.MARGDENS_K + 1):
            assert trapezoid(column(table, f"g{k}"), x=grid) == pytest.approx(1.0, abs=1e-5)

    def test_last_point_extrapolated(self, model):
        """测试 x=1 带外推标记"""
        table = figures.margdens(model, [0.5, 1.0])
        assert column(table, "extrapolated") == [False, True]


class TestCdfCompare:
    """测试 cdfcompare 数据"""

    def test_conjectured_zero_at_two_thirds(self, model):
        """测试猜想分布在 2/3 处为 0"""
        header, rows = figures.figure_data("cdfcompare", model, points=11)
        xs = column((header, rows), "x")
        assert 2.0 / 3.0 in xs
        row = dict(zip(header, rows[xs.index(2.0 / 3.0)]))
        assert row["conjectured"] == 0.0
        assert 0.0 < row["cdf5"] < 1.0

    def test_both_columns_one_at_right_end(self, model):
        """测试 x=1 处两列都等于 1"""
        header, rows = figures.figure_data("cdfcompare", model, points=11)
        row = dict(zip(header, rows[-1]))
        assert row["x"] == 1.0
        assert row["conjectured"] == pytest.approx(1.0, abs=1e-15)
        assert row["cdf5"] == pytest.approx(1.0, abs=1e-2)

    def test_cdf_monotone(self, model):
        """测试五物种分布函数单调不减"""
        table = figures.figure_data("cdfcompare", model, points=101)
        assert np.all(np.diff(column(table, "cdf5")) >= -1e-12)

    def test_grid_sorted_without_duplicates(self, model):
        """测试网格已含 2/3 时不重复"""
        table = figures.figure_data("cdfcompare", model, grid=[0.0, 2.0 / 3.0, 1.0])
        assert column(table, "x") == [0.0, 2.0 / 3.0, 1.0]


class TestFigureData:
    """测试入口函数"""

    def test_default_points(self, model):
        """测试 margdens 默认网格点数"""
        _, rows = figures.figure_data("margdens", model, points=21)
        assert len(rows) == 21

    def test_unknown_figure(self, model):
        """测试未知的曲线名称"""
        with pytest.raises(ValueError):
            figures.figure_data("histogram", model)
