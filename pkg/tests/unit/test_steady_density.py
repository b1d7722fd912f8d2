"""稳态密度模块单元测试"""

from unittest.mock import patch

import numpy as np
import pytest

from models.config import QuadratureConfig
from sneppen import exact_coeffs, ode5
from sneppen.steady_density import SteadyModel, conjectured_cdf
from utils.exceptions import DomainError, QuadratureError, ValidationError


@pytest.fixture(scope="module")
def sol():
    return ode5.solve()


@pytest.fixture(scope="module")
def model(sol):
    return SteadyModel(sol, QuadratureConfig(table_points=201))


class TestConjecturedCdf:
    """测试 N → ∞ 的猜想分布"""

    @pytest.mark.parametrize("x,expected", [(0.0, 0.0), (0.5, 0.0), (2 / 3, 0.0),
                                            (5 / 6, 0.5), (1.0, 1.0)])
    def test_values(self, x, expected):
        """测试 [2/3, 1] 上均匀分布的取值"""
        assert conjectured_cdf(x) == pytest.approx(expected, abs=1e-15)

    def test_vectorized(self):
        """测试数组输入"""
        assert list(conjectured_cdf(np.array([0.0, 1.0]))) == [0.0, 1.0]


class TestBCircZero:
    """测试 B_{∘,0}"""

    def test_zero_at_origin(self, model):
        """测试 B_{∘,0}(0) = 0"""
        assert model.b_circ_0(0.0) == 0.0

    def test_derivative_is_integrand(self, model):
        """测试 d/dx B_{∘,0}(x) = 被积函数在 1−x 处的值"""
        h = 1e-4
        x = 0.4
        fd = (model.b_circ_0(x + h) - model.b_circ_0(x - h)) / (2 * h)
        assert fd == pytest.approx(model.integrand(1.0 - x), rel=1e-6, abs=1e-10)

    @pytest.mark.parametrize("x", [0.1, 0.45, 0.9])
    def test_table_matches_direct(self, model, x):
        """测试插值表与直接积分一致"""
        assert model.b_circ_0_table(x) == pytest.approx(model.b_circ_0(x), rel=1e-7, abs=1e-10)

    def test_simpson_agrees_with_adaptive(self, model):
        """测试与 Simpson 积分一致"""
        from scipy.integrate import simpson

        x = 0.6
        xi = np.linspace(1.0 - x, 1.0, 2001)
        values = np.array([model.integrand(s) for s in xi])
        assert simpson(values, x=xi) == pytest.approx(model.b_circ_0(x), rel=1e-8, abs=1e-10)

    def test_clipped_near_one(self, model):
        """测试 x > 1 − y_min 时截断"""
        assert model.b_circ_0(1.0) == model.b_circ_0(model.x_max)

    def test_out_of_range(self, model):
        """测试 x 超出 [0, 1]"""
        with pytest.raises(DomainError):
            model.b_circ_0(1.5)
        with pytest.raises(DomainError):
            model.b_circ_0_table(np.array([0.2, -0.1]))

    def test_quadrature_failure(self, sol):
        """测试积分误差估计过大时抛出 QuadratureError"""
        fresh = SteadyModel(sol)
        with patch("sneppen.steady_density.quad", return_value=(1.0, 1.0, {})):
            with pytest.raises(QuadratureError):
                fresh.b_circ_0(0.5)

    def test_quadrature_warning(self, sol):
        """测试误差估计略超容差时只记录警告"""
        fresh = SteadyModel(sol)
        with patch("sneppen.steady_density.quad", return_value=(1.0, 5e-10, {})), \
                patch("sneppen.steady_density.logger") as mock_logger:
            assert fresh.b_circ_0(0.5) == 1.0
        mock_logger.warning.assert_called_once()


class TestJointDensity:
    """测试 q 与五维联合密度"""

    def test_q_vanishes_at_zero(self, model):
        """测试 q(0, y) = 0"""
        for y in (0.2, 0.7):
            assert model.q_steady(0.0, y) == pytest.approx(0.0, abs=1e-12)

    def test_q_requires_ordered_arguments(self, model):
        """测试 x > y 被拒绝"""
        with pytest.raises(DomainError):
            model.q_steady(0.6, 0.4)

    def test_cyclic_and_reversal_symmetry(self, model):
        """测试联合密度在循环移位与反向下不变"""
        f = np.array([0.9, 0.1, 0.8, 0.7, 0.6])
        base = model.joint_density(f)
        assert model.joint_density(np.roll(f, 2)) == pytest.approx(base, rel=1e-12)
        assert model.joint_density(f[::-1]) == pytest.approx(base, rel=1e-12)

    def test_bulk_matches_pointwise(self, model):
        """测试批量求值与逐项 q_steady 求和一致"""
        f = np.array([0.35, 0.8, 0.15, 0.5, 0.65])
        expected = sum(model.q_steady(min(a, b), max(a, b)) for a, b in zip(f, np.roll(f, -1)))
        assert model.joint_density(f) == pytest.approx(expected, rel=1e-7, abs=1e-9)

    def test_batch_shape(self, model):
        """测试 (n, 5) 输入"""
        rng = np.random.default_rng(3)
        f = rng.random((4, 5))
        out = model.joint_density(f)
        assert out.shape == (4,)
        assert out[1] == pytest.approx(model.joint_density(f[1]))

    def test_wrong_width(self, model):
        """测试分量个数错误"""
        with pytest.raises(DomainError):
            model.joint_density(np.ones(4) * 0.5)

    def test_monte_carlo_normalization(self, model):
        """测试联合密度在 [0,1]⁵ 上的积分为 1（蒙特卡洛）"""
        rng = np.random.default_rng(2024)
        values = model.joint_density(rng.random((400000, 5)))
        assert values.mean() == pytest.approx(1.0, abs=1e-2)

    @pytest.mark.parametrize("x,y", [(0.2, 0.5), (0.4, 0.9), (0.6, 0.7), (0.3, 0.3)])
    def test_q_close_to_late_exact_step(self, model, x, y):
        """测试 q 与第 12 步的精确 q_k 接近"""
        q12 = exact_coeffs.eval_qk(exact_coeffs.table_at(12), x, y)
        assert model.q_steady(x, y) == pytest.approx(q12, abs=2e-2)


class TestMarginal:
    """测试边缘分布"""

    def test_pdf_at_zero(self, model):
        """测试 g(0) = 3/5"""
        assert model.marginal_pdf(0.0) == pytest.approx(0.6, abs=1e-15)

    def test_cdf_at_zero(self, model):
        """测试 CDF(0) = 0"""
        assert model.marginal_cdf(0.0) == pytest.approx(0.0, abs=1e-15)

    def test_cdf_derivative_is_pdf(self, model):
        """测试 CDF′ = g"""
        h = 1e-5
        x = 0.3
        fd = (model.marginal_cdf(x + h) - model.marginal_cdf(x - h)) / (2 * h)
        assert fd == pytest.approx(model.marginal_pdf(x), rel=1e-6)

    def test_extrapolation_flags(self, model):
        """测试接近 1 的点带外推标记"""
        xs = np.array([0.5, 1.0])
        _, flags = model.marginal_cdf_flagged(xs)
        assert list(flags) == [False, True]

    def test_printed_convention_factor(self, sol):
        """测试 printed 约定的系数为 1"""
        printed = SteadyModel(sol, marginal_convention="printed")
        derived = SteadyModel(sol)
        assert printed.marginal_factor == 1.0
        x = 0.4
        assert derived.marginal_pdf(x) - 0.6 == pytest.approx(2 * (printed.marginal_pdf(x) - 0.6))

    def test_invalid_convention(self, sol):
        """测试未知约定"""
        with pytest.raises(ValidationError):
            SteadyModel(sol, marginal_convention="other")

    def test_moment_zero_matches_cdf(self, model):
        """测试零阶矩等于 CDF(1)"""
        assert model.marginal_moment(0) == pytest.approx(model.marginal_cdf(1.0), rel=1e-7)

    def test_out_of_range(self, model):
        """测试 x 超出 [0, 1]"""
        with pytest.raises(DomainError):
            model.marginal_pdf(1.2)
        with pytest.raises(DomainError):
            model.marginal_moment(-1)

    def test_pdf_nonnegative(self, model):
        """测试边缘密度在 1000 个点上非负"""
        assert np.min(model.marginal_pdf(np.linspace(0.0, 1.0, 1000))) >= 0.0

    def test_mean_close_to_late_exact_step(self, model):
        """测试均值与第 12 步的精确均值接近"""
        exact = float(exact_coeffs.marginal_moment_k(exact_coeffs.table_at(12), 1))
        assert model.marginal_moment(1) == pytest.approx(exact, abs=2e-2)

    def test_summary(self, model):
        """测试全局一致性数据"""
        summary = model.summary()
        assert summary["convention"] == "derived"
        assert summary["marginal_pdf_at_0"] == pytest.approx(0.6)
        assert summary["cdf_at_1_derived"] - 0.6 == pytest.approx(
            2 * (summary["cdf_at_1_printed"] - 0.6))


class TestCoupledResiduals:
    """测试耦合方程残差"""

    @pytest.mark.parametrize("y", [0.3, 0.6])
    def test_first_coupled(self, model, y):
        """测试 yℬ₀″ = 𝒢″ℬ₁ − 𝒢ℬ₁″"""
        res = model.first_coupled_residual(y)
        assert abs(res["residual"]) <= 1e-5 * max(res["scale"], 1e-12)

    @pytest.mark.parametrize("x", [0.2, 0.5, 0.8])
    def test_integro_differential(self, model, x):
        """测试积分微分方程残差"""
        res = model.integro_differential_residual(x)
        assert abs(res["residual"]) <= 1e-5 * max(res["scale"], 1e-12)

    @pytest.mark.parametrize("y", [0.4, 0.7])
    def test_second_coupled(self, model, y):
        """测试第二个耦合方程残差"""
        res = model.second_coupled_residual(y)
        assert abs(res["residual"]) <= 1e-5 * max(res["scale"], 1e-12)

    def test_b0_domain(self, model):
        """测试 ℬ₀ 的定义域"""
        assert model.b0(1.0) == 0.0
        with pytest.raises(DomainError):
            model.b0(0.0)
