"""超几何函数模块单元测试"""

from fractions import Fraction

import numpy as np
import pytest

from models.config import SeriesConfig
from sneppen import hypergeom
from sneppen.hypergeom import (
    F12,
    F21,
    F45,
    Convention,
    FnmSpec,
    Hypergeometric,
)
from utils.exceptions import ParameterError, SeriesConvergenceError, SingularPointError


@pytest.fixture(scope="module")
def ctx():
    return Hypergeometric()


@pytest.fixture(scope="module")
def printed():
    return Hypergeometric(convention=Convention.PRINTED)


class TestFnm:
    """测试 F_{n,m} 级数"""

    def test_value_at_zero(self):
        """测试 F(0) = 1"""
        assert hypergeom.F(F12, 0.0) == 1.0

    def test_derivative_at_zero(self):
        """测试 F′(0) = ab/c"""
        assert hypergeom.F_deriv(F12, 0.0, 1) == pytest.approx(0.5, rel=1e-14)
        assert hypergeom.F_deriv(F45, 0.0, 1) == pytest.approx((16 + 2) / 9 / (5 / 3), rel=1e-14)

    @pytest.mark.parametrize("n,m", [(1, 2), (2, 1), (2, 3), (2, 4), (4, 5)])
    @pytest.mark.parametrize("x", [-0.5, -0.3, 0.1, 0.45])
    def test_against_mpmath(self, n, m, x):
        """测试与任意精度 ₂F₁ 一致"""
        mpmath = pytest.importorskip("mpmath")
        mpmath.mp.dps = 30
        a = (n + 1j * mpmath.sqrt(2)) / 3
        b = (n - 1j * mpmath.sqrt(2)) / 3
        expected = mpmath.hyp2f1(a, b, mpmath.mpf(m) / 3, x)
        assert abs(mpmath.im(expected)) < 1e-20
        assert hypergeom.F(FnmSpec(n, m), x) == pytest.approx(float(mpmath.re(expected)),
                                                             rel=1e-13)

    def test_derivative_against_mpmath(self):
        """测试二阶导数与任意精度结果一致"""
        mpmath = pytest.importorskip("mpmath")
        mpmath.mp.dps = 30
        a = (4 + 1j * mpmath.sqrt(2)) / 3
        b = (4 - 1j * mpmath.sqrt(2)) / 3
        expected = mpmath.diff(lambda t: mpmath.hyp2f1(a, b, mpmath.mpf(5) / 3, t), -0.4, 2)
        assert hypergeom.F_deriv(F45, -0.4, 2) == pytest.approx(float(mpmath.re(expected)),
                                                               rel=1e-11)

    def test_vectorized(self):
        """测试数组输入逐点求值"""
        xs = np.array([-0.5, 0.0, 0.25])
        values = hypergeom.F(F21, xs)
        assert values.shape == (3,)
        assert values[1] == 1.0
        assert values[2] == pytest.approx(hypergeom.F(F21, 0.25))

    def test_argument_out_of_range(self):
        """测试 |x| ≥ 1 被拒绝"""
        with pytest.raises(ParameterError):
            hypergeom.F(F12, 1.0)
        with pytest.raises(ParameterError):
            hypergeom.F(F12, float("nan"))

    def test_non_positive_integer_c(self):
        """测试 c = m/3 为非正整数"""
        with pytest.raises(ParameterError):
            FnmSpec(1, 0)
        with pytest.raises(ParameterError):
            FnmSpec(1, -3)
        assert FnmSpec(1, -2).c == pytest.approx(-2 / 3)

    def test_derivative_order_invalid(self):
        """测试导数阶数"""
        with pytest.raises(ParameterError):
            hypergeom.F_deriv(F12, 0.1, 0)

    def test_series_not_converged(self):
        """测试项数不足时报告不收敛"""
        cfg = SeriesConfig(max_terms=3)
        with pytest.raises(SeriesConvergenceError):
            hypergeom.F(F45, 0.9, cfg)


class TestG:
    """测试 G 函数"""

    def test_initial_values(self, ctx):
        """测试 G(0)=0, G′(0)=1, G″(0)=1"""
        assert ctx.G(0.0) == pytest.approx(0.0, abs=1e-14)
        assert ctx.G(0.0, 1) == pytest.approx(1.0, abs=1e-13)
        assert ctx.G(0.0, 2) == pytest.approx(1.0, abs=1e-12)

    def test_value_at_one(self, ctx):
        """测试 G(1) = (9/8)·F_{4,5}{κ}"""
        assert ctx.G(1.0) == pytest.approx(9.0 / 8.0 * ctx.c45, rel=1e-14)

    def test_taylor_coefficients(self):
        """测试 G 的精确泰勒系数"""
        gamma = hypergeom.g_taylor_coefficients(4)
        assert gamma[:4] == [Fraction(0), Fraction(1), Fraction(1, 2), Fraction(-2, 3)]

    def test_taylor_matches_series(self, ctx):
        """测试泰勒展开与级数组合一致"""
        x = 0.05
        gamma = hypergeom.g_taylor_coefficients(30)
        approx = sum(float(g) * x ** i for i, g in enumerate(gamma))
        assert ctx.G(x) == pytest.approx(approx, rel=1e-10)

    @pytest.mark.parametrize("x", [0.1, 0.3, 0.5, 0.7, 0.9])
    def test_third_order_equation(self, ctx, x):
        """测试 G 满足三阶方程 4B − 7(1−x)B′ + 3(1−x)²B″ − (2+(1−x)³)/3·B‴ = 0"""
        w = 1.0 - x
        b0, b1, b2, b3 = (ctx.G(x, r) for r in range(4))
        residual = 4 * b0 - 7 * w * b1 + 3 * w ** 2 * b2 - (2 + w ** 3) / 3 * b3
        scale = abs(4 * b0) + abs(7 * w * b1) + abs(3 * w ** 2 * b2) + abs((2 + w ** 3) / 3 * b3)
        assert abs(residual) < 1e-12 * scale

    @pytest.mark.parametrize("order", [1, 2, 3])
    def test_derivatives_match_finite_differences(self, ctx, order):
        """测试解析导数与中心差分一致"""
        h = 1e-5
        x = 0.4
        fd = (ctx.G(x + h, order - 1) - ctx.G(x - h, order - 1)) / (2 * h)
        assert ctx.G(x, order) == pytest.approx(fd, rel=1e-7)

    def test_order_out_of_range(self, ctx):
        """测试不支持的导数阶数"""
        with pytest.raises(ParameterError):
            ctx.G(0.5, 4)

    def test_vectorized(self, ctx):
        """测试数组输入"""
        xs = np.linspace(0.0, 1.0, 5)
        values = ctx.G(xs)
        assert values.shape == (5,)
        assert values[2] == pytest.approx(ctx.G(0.5))

    def test_module_level_helpers(self):
        """测试模块级便捷函数使用 consistent 约定"""
        assert hypergeom.default_context().convention is Convention.CONSISTENT
        assert hypergeom.G(0.3) == pytest.approx(Hypergeometric().G(0.3))


class TestG2:
    """测试 G₂(x, z)"""

    @pytest.mark.parametrize("x", [0.0, 0.25, 0.6, 1.0])
    def test_reduces_to_G_at_z_one(self, ctx, x):
        """测试 G₂(x, 1) = G(x)"""
        assert ctx.G2(x, 1.0) == pytest.approx(ctx.G(x), abs=1e-13)

    @pytest.mark.parametrize("convention", list(Convention))
    def test_value_at_z_zero(self, convention):
        """测试 z=0 时所有超几何因子为 1：G₂(0.4, 0) = (1 − 0.36)/2"""
        assert Hypergeometric(convention=convention).G2(0.4, 0.0) == pytest.approx(0.32, abs=1e-15)

    @pytest.mark.parametrize("z", [0.0, 0.3, 1.0])
    def test_vanishes_at_x_zero(self, ctx, z):
        """测试 G₂(0, z) = 0"""
        assert ctx.G2(0.0, z) == pytest.approx(0.0, abs=1e-14)

    def test_vectorized(self, ctx):
        """测试数组输入"""
        xs = np.array([0.2, 0.4])
        values = ctx.G2(xs, 0.5)
        assert values.shape == (2,)
        assert values[0] == pytest.approx(ctx.G2(0.2, 0.5))


class TestScriptG:
    """测试 𝒢 函数"""

    def test_value_at_one(self, ctx):
        """测试 𝒢(1) = 1"""
        assert ctx.scriptG(1.0) == pytest.approx(1.0, abs=1e-13)

    @pytest.mark.parametrize("x", [0.05, 0.3, 0.5, 0.8, 1.0])
    def test_derivative_is_reflected_G(self, ctx, x):
        """测试 𝒢′(x) = G(1−x)"""
        assert ctx.scriptG(x, 1) == pytest.approx(ctx.G(1.0 - x), abs=1e-13)

    @pytest.mark.parametrize("x", [0.2, 0.6, 0.95])
    def test_second_derivative_relation_matches_series(self, ctx, x):
        """测试由微分关系得到的 𝒢″ 与逐项求导一致"""
        assert ctx.scriptG(x, 2) == pytest.approx(ctx.scriptG_series(x, 2), rel=1e-11)

    @pytest.mark.parametrize("order", [3, 4, 5])
    def test_higher_derivatives_finite_differences(self, ctx, order):
        """测试 3..5 阶导数与低一阶导数的中心差分一致"""
        h = 1e-5
        x = 0.5
        fd = (ctx.scriptG(x + h, order - 1) - ctx.scriptG(x - h, order - 1)) / (2 * h)
        assert ctx.scriptG(x, order) == pytest.approx(fd, rel=1e-6)

    def test_all_derivatives_tuple(self, ctx):
        """测试导数链与逐阶求值一致"""
        chain = ctx.scriptG_all(0.7)
        assert len(chain) == 6
        assert chain[4] == ctx.scriptG(0.7, 4)

    def test_singular_point(self, ctx):
        """测试 y=0 处高阶导数奇异"""
        with pytest.raises(SingularPointError):
            ctx.scriptG(0.0, 3)
        with pytest.raises(SingularPointError):
            ctx.scriptG_all(0.0)

    def test_low_orders_at_zero(self, ctx):
        """测试 y=0 处 0..2 阶可以求值"""
        assert ctx.scriptG(0.0, 1) == pytest.approx(ctx.G(1.0), abs=1e-13)
        assert ctx.scriptG(0.0, 2) == pytest.approx(0.0, abs=1e-14)

    def test_argument_out_of_range(self, ctx):
        """测试自变量超出 [0, 1]"""
        with pytest.raises(ParameterError):
            ctx.scriptG(1.2)
        with pytest.raises(ParameterError):
            ctx.scriptG(0.5, 6)


class TestGeneralSolution:
    """测试三阶方程通解常数"""

    def test_wronskian(self, ctx):
        """测试朗斯基行列式归一化为 8/9"""
        assert ctx.wronskian_normalization() == pytest.approx(8.0 / 9.0, rel=1e-13)

    def test_constants_reproduce_G(self, ctx):
        """测试 d₁ = −(9/8)F_{2,1}{κ}, d₂ = (9/8)F_{4,5}{κ}"""
        d1, d2 = ctx.basis_constants()
        assert d1 == pytest.approx(-9.0 / 8.0 * ctx.c21, rel=1e-12)
        assert d2 == pytest.approx(9.0 / 8.0 * ctx.c45, rel=1e-12)

    def test_constants_satisfy_initial_values(self, printed):
        """测试两种约定下解出的常数都满足 B(0)=0, B′(0)=1"""
        d1, d2 = printed.basis_constants()
        p0, q0 = printed.basis(0.0, 0)
        p1, q1 = printed.basis(0.0, 1)
        assert d1 * p0 + d2 * q0 == pytest.approx(0.0, abs=1e-13)
        assert d1 * p1 + d2 * q1 == pytest.approx(1.0, abs=1e-13)

    def test_basis_order_invalid(self, ctx):
        """测试基函数导数阶数"""
        with pytest.raises(ParameterError):
            ctx.basis(0.5, 2)


class TestConsistencyReport:
    """测试约定对照报告"""

    def test_consistent_convention_identities(self):
        """测试 consistent 约定满足全部恒等式"""
        report = hypergeom.consistency_report(grid_points=21)
        row = report["consistent"]
        assert row["dscriptG_vs_G"] < 1e-12
        assert row["G_prime_0"] == pytest.approx(1.0, abs=1e-12)
        assert row["scriptG_1"] == pytest.approx(1.0, abs=1e-12)
        assert row["G2_at_1"] < 1e-12
        assert row["wronskian"] == pytest.approx(8.0 / 9.0, rel=1e-12)

    def test_printed_convention_reported(self):
        """测试 printed 约定的偏差也被给出"""
        report = hypergeom.consistency_report(grid_points=11)
        assert set(report) == {"consistent", "printed"}
        assert set(report["printed"]) == set(report["consistent"])
        assert report["printed"]["d1_plus_d2"] == pytest.approx(
            report["printed"]["d1"] + report["printed"]["d2"])
