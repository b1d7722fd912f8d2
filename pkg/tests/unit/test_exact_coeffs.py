"""精确系数表模块单元测试"""

from fractions import Fraction as Fr

import pytest

from sneppen import exact_coeffs, hypergeom
from sneppen.exact_coeffs import CoeffTable, ExactPolynomial, LimitTable
from sneppen.reference_tables import PUBLISHED_K, published_table
from utils.exceptions import (
    InvariantViolationError,
    MissingLimitError,
    SerializationError,
)

# k = 1, 2 的完整系数表
TABLE_K1 = {(1, 0): Fr(1), (2, 0): Fr(-1), (3, 0): Fr(1, 3)}

TABLE_K2 = {
    (1, 1): Fr(1), (1, 2): Fr(-3, 2), (1, 3): Fr(1), (1, 4): Fr(-1, 4),
    (2, 0): Fr(3), (2, 1): Fr(-1, 2), (2, 2): Fr(3, 4), (2, 3): Fr(-1, 2), (2, 4): Fr(1, 8),
    (3, 0): Fr(-19, 3), (4, 0): Fr(11, 2), (5, 0): Fr(-9, 4), (6, 0): Fr(3, 8),
}


class TestTableRecursion:
    """测试系数表递推"""

    def test_seed_table(self):
        """测试 k=1 种子表"""
        assert dict(exact_coeffs.seed_table_k1().entries) == TABLE_K1

    def test_table_k2(self):
        """测试 k=2 系数表逐项相等"""
        assert dict(exact_coeffs.table_at(2).entries) == TABLE_K2

    def test_table_k3_selected_entries(self):
        """测试 k=3 表的若干条目"""
        t3 = exact_coeffs.table_at(3)
        assert t3[(1, 1)] == Fr(1, 5)
        assert t3[(1, 7)] == Fr(-32, 105)
        assert t3[(5, 0)] == Fr(75, 2)
        assert t3[(9, 0)] == Fr(487, 1260)
        assert t3[(2, 0)] == Fr(2, 5)

    @pytest.mark.parametrize("k", PUBLISHED_K)
    def test_matches_published_tables(self, k):
        """测试与已发表的 k=1..5 表完全一致"""
        assert dict(exact_coeffs.table_at(k).entries) == published_table(k)

    def test_tables_up_to_indexing(self):
        """测试 tables[k-1] 为第 k 张表"""
        tables = exact_coeffs.tables_up_to(4)
        assert [t.k for t in tables] == [1, 2, 3, 4]
        assert tables[1] == exact_coeffs.table_at(2)

    def test_tables_up_to_invalid(self):
        """测试 k < 1 被拒绝"""
        with pytest.raises(InvariantViolationError):
            exact_coeffs.tables_up_to(0)

    @pytest.mark.parametrize("k", range(1, 9))
    def test_invariants_hold(self, k):
        """测试递推结果满足结构不变量"""
        table = exact_coeffs.table_at(k)
        table.check_invariants()
        assert table.max_i <= 3 * k
        assert table.max_j <= 3 * k - 1

    def test_degree_bound_reached(self):
        """测试 α_{3k,0,k} 非零"""
        for k in range(1, 6):
            assert exact_coeffs.table_at(k)[(3 * k, 0)] != 0


class TestCoeffTable:
    """测试 CoeffTable 数据类型"""

    def test_zero_entries_dropped(self):
        """测试零值不被保存"""
        table = CoeffTable(1, {(1, 0): 0, (2, 0): Fr(1, 2)})
        assert len(table) == 1
        assert table.get(1, 0) == 0

    def test_negative_index_rejected(self):
        """测试负下标"""
        with pytest.raises(InvariantViolationError):
            CoeffTable(1, {(-1, 0): 1})

    def test_with_entry_returns_new_table(self):
        """测试 with_entry 不修改原表"""
        t2 = exact_coeffs.table_at(2)
        changed = t2.with_entry(2, 2, Fr(1, 7))
        assert changed[(2, 2)] == Fr(1, 7)
        assert t2[(2, 2)] == Fr(3, 4)
        assert changed != t2

    def test_invariant_alpha_zero_row(self):
        """测试 α_{0,j} ≠ 0 被检测"""
        table = exact_coeffs.table_at(2).with_entry(0, 3, 1)
        with pytest.raises(InvariantViolationError) as exc:
            table.check_invariants()
        assert exc.value.entry == (0, 3)

    def test_invariant_alpha_one_zero(self):
        """测试 k ≥ 2 时 α_{1,0} ≠ 0 被检测"""
        with pytest.raises(InvariantViolationError):
            exact_coeffs.table_at(2).with_entry(1, 0, 1).check_invariants()

    def test_invariant_support(self):
        """测试超出支撑范围的条目被检测"""
        with pytest.raises(InvariantViolationError):
            exact_coeffs.table_at(2).with_entry(7, 0, 1).check_invariants()

    def test_rows_and_dict(self):
        """测试行与字典表示"""
        t1 = exact_coeffs.table_at(1)
        assert t1.to_rows() == [(1, 0, "1"), (2, 0, "-1"), (3, 0, "1/3")]
        assert CoeffTable.from_dict(t1.to_dict()) == t1

    def test_from_rows_duplicate(self):
        """测试重复条目"""
        with pytest.raises(SerializationError):
            CoeffTable.from_rows(1, [(1, 0, "1"), (1, 0, "2")])

    def test_from_dict_malformed(self):
        """测试格式错误的字典"""
        with pytest.raises(SerializationError):
            CoeffTable.from_dict({"entries": []})

    def test_dense_matrix(self):
        """测试浮点稠密矩阵"""
        dense = exact_coeffs.table_at(1).dense
        assert dense.shape == (4, 1)
        assert dense[3, 0] == pytest.approx(1.0 / 3.0)


class TestLimits:
    """测试极限系数与稳定性"""

    def test_stabilization_report_clean(self):
        """测试 k=1..8 没有违反稳定性的条目"""
        report = exact_coeffs.stabilization_report(8)
        assert [row["k"] for row in report] == list(range(1, 9))
        assert all(row["violations"] == [] for row in report)
        assert report[3]["claimed"] == 10

    def test_limits_values(self):
        """测试 β_{1,j} 的取值"""
        lt = exact_coeffs.limits(6)
        assert lt.k_used == 6
        assert lt.beta(1, 0) == 0
        assert lt.beta(1, 1) == Fr(1, 5)
        assert lt.beta(1, 2) == Fr(1, 2)
        assert lt.beta(1, 3) == Fr(3, 5)
        assert lt.beta(2, 0) == Fr(2, 5)

    def test_limit_equals_later_tables(self):
        """测试稳定的条目在更大的 k 处不变"""
        lt = exact_coeffs.limits(5)
        t9 = exact_coeffs.table_at(9)
        for (i, j), value in lt.entries.items():
            assert t9[(i, j)] == value

    def test_missing_limit(self):
        """测试未稳定的条目不可读取"""
        lt = exact_coeffs.limits(3)
        with pytest.raises(MissingLimitError):
            lt.beta(1, 3)

    def test_limit_table_rejects_unstable_entry(self):
        """测试 i + j + 1 > k_used 的条目被拒绝"""
        with pytest.raises(InvariantViolationError):
            LimitTable({(2, 2): 1}, k_used=3)

    def test_limits_requires_two_steps(self):
        """测试 k_max < 2"""
        with pytest.raises(InvariantViolationError):
            exact_coeffs.limits(1)

    def test_boundary_conditions(self):
        """测试 ℬ₁ 在 y=1 处的边界值"""
        bc = exact_coeffs.boundary_conditions_from_limits(exact_coeffs.limits(10))
        assert bc == (Fr(1, 5), Fr(0), Fr(-1, 5), Fr(1), Fr(-18, 5))

    def test_boundary_conditions_need_k5(self):
        """测试 k_used < 5 时无法得到全部边界值"""
        with pytest.raises(MissingLimitError):
            exact_coeffs.boundary_conditions_from_limits(exact_coeffs.limits(4))


class TestMarginals:
    """测试多项式边缘密度"""

    def test_marginal_k1(self):
        """测试 k=1 的边缘密度 3/5 + 2x − 3x² + 2x³ − x⁴/2"""
        poly = exact_coeffs.marginal_poly_k(exact_coeffs.table_at(1))
        assert poly == ExactPolynomial([Fr(3, 5), 2, -3, 2, Fr(-1, 2)])

    @pytest.mark.parametrize("k", range(1, 8))
    def test_normalization(self, k):
        """测试联合密度与边缘密度的精确归一化"""
        table = exact_coeffs.table_at(k)
        assert exact_coeffs.integral_gk(table) == 1
        assert exact_coeffs.marginal_poly_k(table).integral(0, 1) == 1

    @pytest.mark.parametrize("k", range(1, 7))
    def test_marginal_from_next_row(self, k):
        """测试由下一步 i=1 行得到的边缘密度相同"""
        direct = exact_coeffs.marginal_poly_k(exact_coeffs.table_at(k))
        via_row = exact_coeffs.marginal_from_next_row(exact_coeffs.table_at(k + 1))
        assert direct == via_row

    def test_marginal_value_at_zero(self):
        """测试各步边缘密度在 0 处为 3/5"""
        for k in range(1, 6):
            poly = exact_coeffs.marginal_poly_k(exact_coeffs.table_at(k))
            assert poly.exact(0) == Fr(3, 5)

    def test_cdf_poly(self):
        """测试边缘分布函数端点"""
        cdf = exact_coeffs.marginal_cdf_poly_k(exact_coeffs.table_at(3))
        assert cdf.exact(0) == 0
        assert cdf.exact(1) == 1

    def test_marginal_mean_increases(self):
        """测试边缘分布均值随 k 增大"""
        means = [exact_coeffs.marginal_moment_k(exact_coeffs.table_at(k)) for k in range(1, 6)]
        assert all(b > a for a, b in zip(means, means[1:]))
        assert means[0] > Fr(1, 2)

    def test_float_evaluation_matches_exact(self):
        """测试浮点求值与精确求值一致"""
        poly = exact_coeffs.marginal_poly_k(exact_coeffs.table_at(4))
        for x in (0, Fr(1, 3), Fr(1, 2), 1):
            assert poly(float(x)) == pytest.approx(float(poly.exact(x)), rel=1e-12)

    def test_eval_qk(self):
        """测试 q_k 的浮点求值"""
        t1 = exact_coeffs.table_at(1)
        assert exact_coeffs.eval_qk(t1, 0.5, 0.3) == pytest.approx(0.5 - 0.25 + 0.125 / 3)


class TestExactPolynomial:
    """测试有理系数多项式"""

    def test_trailing_zeros_removed(self):
        """测试尾部零被去掉"""
        assert ExactPolynomial([1, 2, 0, 0]).degree == 1

    def test_derivative_and_antiderivative(self):
        """测试求导与积分互逆"""
        poly = ExactPolynomial([Fr(3, 5), 2, -3])
        assert poly.antiderivative().derivative() == poly

    def test_moment(self):
        """测试矩"""
        assert ExactPolynomial([0, 1]).moment(1) == Fr(1, 3)

    def test_vectorized_call(self):
        """测试数组求值"""
        import numpy as np

        values = ExactPolynomial([1, 1])(np.array([0.0, 1.0, 2.0]))
        assert list(values) == [1.0, 2.0, 3.0]


class TestGeneratingFunction:
    """测试 k 方向生成函数的截断和"""

    def test_zero_z(self):
        """测试 z=0 时和为零"""
        tables = exact_coeffs.tables_up_to(3)
        assert exact_coeffs.kgen_partial_sums(tables, 0.5, 0.0, 1) == (0.0, 0.0)

    def test_row_one_partial_sum(self):
        """测试 i=1 行的截断和"""
        tables = exact_coeffs.tables_up_to(3)
        _, row_one = exact_coeffs.kgen_partial_sums(tables, 0.5, 0.5, 1)
        assert row_one == pytest.approx(1.0 * 0.25 + 0.2 * 0.125)

    @pytest.mark.parametrize("j,x", [(1, 0.3), (1, 0.7), (2, 0.5)])
    def test_factorizes_through_g2(self, j, x):
        """测试 Σ_{i,k}α_{i,j,k}xⁱzᵏ = G₂(x,z)·Σ_kα_{1,j,k}zᵏ（z 很小，截断误差可忽略）"""
        tables = exact_coeffs.tables_up_to(16)
        full, row_one = exact_coeffs.kgen_partial_sums(tables, x, 0.05, j)
        assert full == pytest.approx(row_one * hypergeom.G2(x, 0.05), rel=1e-8)

    def test_printed_g2_does_not_factorize(self):
        """测试 printed 约定的 G₂ 不满足该分解"""
        printed = hypergeom.Hypergeometric(convention="printed")
        tables = exact_coeffs.tables_up_to(16)
        worst = 0.0
        for x in (0.3, 0.7):
            full, row_one = exact_coeffs.kgen_partial_sums(tables, x, 0.05, 1)
            worst = max(worst, abs(full - row_one * printed.G2(x, 0.05)) / abs(full))
        assert worst > 1e-3
