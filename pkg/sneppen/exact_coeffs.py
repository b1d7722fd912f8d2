"""精确系数模块

五物种 Bak–Sneppen 模型 k 步密度
    g_k(x⃗) = Σ_ν q_k(min{x_ν, x_ν+1}, max{x_ν, x_ν+1}),  q_k(x, y) = Σ α_{i,j,k} x^i y^j
的系数 α_{i,j,k} 的精确有理数递推，以及由系数表导出的精确多项式泛函：
- CoeffTable: 固定 k 的系数表
- LimitTable: 稳定后的极限系数 β_{i,j}
- ExactPolynomial: 有理系数一元多项式（边缘密度、分布函数）
"""

from fractions import Fraction
from functools import cached_property, lru_cache
from types import MappingProxyType
from typing import (Any, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple,
                    Union)

import numpy as np
from numpy.polynomial import polynomial as npoly

from logger import setup_logger, _ as _t
from utils.exceptions import (InvariantViolationError, MissingLimitError, SerializationError,
                              StabilizationError)
from utils.serialization import format_rational, parse_rational

logger = setup_logger(__name__)

Entry = Tuple[int, int]
Number = Union[int, float, Fraction]

ZERO = Fraction(0)
MARGINAL_CONSTANT = Fraction(3, 5)


class CoeffTable:
    """系数表 α_{i,j,k}

    只保存非零项；缺失项为零。构造后不可修改。
    """

    def __init__(self, k: int, entries: Mapping[Entry, Number]):
        if int(k) < 1:
            raise InvariantViolationError(f"k 必须 ≥ 1: {k}", k=k)
        self.k: int = int(k)
        cleaned: Dict[Entry, Fraction] = {}
        for (i, j), value in entries.items():
            if i < 0 or j < 0:
                raise InvariantViolationError(f"下标不能为负: ({i}, {j})", k=k, entry=(i, j))
            value = Fraction(value)
            if value != 0:
                cleaned[(int(i), int(j))] = value
        self._entries: Mapping[Entry, Fraction] = MappingProxyType(cleaned)

    def get(self, i: int, j: int) -> Fraction:
        return self._entries.get((i, j), ZERO)

    def __getitem__(self, entry: Entry) -> Fraction:
        return self._entries.get(entry, ZERO)

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[Tuple[int, int, Fraction]]:
        for (i, j) in sorted(self._entries):
            yield i, j, self._entries[(i, j)]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CoeffTable):
            return NotImplemented
        return self.k == other.k and dict(self._entries) == dict(other._entries)

    def __hash__(self) -> int:
        return hash((self.k, frozenset(self._entries.items())))

    def __repr__(self) -> str:
        return f"CoeffTable(k={self.k}, nonzero={len(self)})"

    @property
    def entries(self) -> Mapping[Entry, Fraction]:
        return self._entries

    @property
    def max_i(self) -> int:
        return max((i for i, _ in self._entries), default=0)

    @property
    def max_j(self) -> int:
        return max((j for _, j in self._entries), default=0)

    def with_entry(self, i: int, j: int, value: Number) -> "CoeffTable":
        """返回修改了单个条目的新表"""
        entries = dict(self._entries)
        entries[(i, j)] = Fraction(value)
        return CoeffTable(self.k, entries)

    def check_invariants(self) -> None:
        """检查不变量

        - α_{0,j} = 0
        - k ≥ 2 时 α_{1,0} = 0（k=1 的种子表 α_{1,0,1}=1）
        - 非零项满足 i ≤ 3k, j ≤ 3k−1

        Raises:
            InvariantViolationError: 任一不变量被破坏
        """
        for (i, j) in self._entries:
            if i == 0:
                raise InvariantViolationError(
                    f"α_{{0,{j},{self.k}}} 必须为 0", k=self.k, entry=(i, j))
            if i > 3 * self.k or j > 3 * self.k - 1:
                raise InvariantViolationError(
                    f"α_{{{i},{j},{self.k}}} 超出支撑范围 i ≤ {3 * self.k}, j ≤ {3 * self.k - 1}",
                    k=self.k, entry=(i, j))
        if self.k >= 2 and (1, 0) in self._entries:
            raise InvariantViolationError(
                f"α_{{1,0,{self.k}}} 必须为 0", k=self.k, entry=(1, 0))

    @cached_property
    def dense(self) -> np.ndarray:
        """浮点稠密矩阵 c[i, j] = float(α_{i,j})"""
        c = np.zeros((self.max_i + 1, self.max_j + 1))
        for (i, j), value in self._entries.items():
            c[i, j] = float(value)
        return c

    def to_rows(self) -> List[Tuple[int, int, str]]:
        """非零项按 (i, j) 排序的 (i, j, "p/q") 行"""
        return [(i, j, format_rational(v)) for i, j, v in self]

    @classmethod
    def from_rows(cls, k: int, rows: Iterable[Sequence[Any]]) -> "CoeffTable":
        """从 (i, j, value) 行构造

        Raises:
            SerializationError: 行格式错误
        """
        entries: Dict[Entry, Fraction] = {}
        for row in rows:
            try:
                i, j, value = row
                key = (int(i), int(j))
            except (TypeError, ValueError) as e:
                raise SerializationError(f"系数行格式错误: {row!r}: {e}")
            if key in entries:
                raise SerializationError(f"重复的系数条目: {key}")
            entries[key] = parse_rational(value)
        return cls(k, entries)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "entries": [{"i": i, "j": j, "value": v} for i, j, v in self.to_rows()],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "CoeffTable":
        try:
            k = int(data["k"])
            rows = [(e["i"], e["j"], e["value"]) for e in data["entries"]]
        except (KeyError, TypeError, ValueError) as e:
            raise SerializationError(f"系数表 JSON 格式错误: {e}")
        return cls.from_rows(k, rows)


class LimitTable:
    """极限系数 β_{i,j}

    仅当 k_used ≥ i + j + 1 时条目 (i, j) 存在（零值也保存）。
    """

    def __init__(self, entries: Mapping[Entry, Number], k_used: int):
        self.k_used: int = int(k_used)
        for (i, j) in entries:
            if i + j + 1 > self.k_used:
                raise InvariantViolationError(
                    f"β_{{{i},{j}}} 在 k_used={self.k_used} 时尚未稳定", k=k_used, entry=(i, j))
        self._entries: Mapping[Entry, Fraction] = MappingProxyType(
            {(int(i), int(j)): Fraction(v) for (i, j), v in entries.items()})

    def __contains__(self, entry: object) -> bool:
        return entry in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __repr__(self) -> str:
        return f"LimitTable(k_used={self.k_used}, entries={len(self)})"

    def beta(self, i: int, j: int) -> Fraction:
        """获取 β_{i,j}

        Raises:
            MissingLimitError: 条目不存在
        """
        try:
            return self._entries[(i, j)]
        except KeyError:
            raise MissingLimitError(
                f"β_{{{i},{j}}} 不可用：需要 k_used ≥ {i + j + 1}，当前 {self.k_used}")

    def get(self, i: int, j: int) -> Optional[Fraction]:
        return self._entries.get((i, j))

    @property
    def entries(self) -> Mapping[Entry, Fraction]:
        return self._entries

    def to_rows(self) -> List[Tuple[int, int, str]]:
        return [(i, j, format_rational(self._entries[(i, j)])) for (i, j) in sorted(self._entries)]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k_used": self.k_used,
            "entries": [{"i": i, "j": j, "value": v} for i, j, v in self.to_rows()],
        }


class ExactPolynomial:
    """有理系数一元多项式 Σ c_n x^n

    系数按升幂保存，尾部零被去掉。
    """

    __slots__ = ("coeffs", "float_coeffs")

    def __init__(self, coeffs: Iterable[Number]):
        c = [Fraction(v) for v in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs: Tuple[Fraction, ...] = tuple(c)
        self.float_coeffs: np.ndarray = np.array([float(v) for v in c] or [0.0])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coefficient(self, n: int) -> Fraction:
        return self.coeffs[n] if 0 <= n < len(self.coeffs) else ZERO

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExactPolynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return "ExactPolynomial([" + ", ".join(format_rational(c) for c in self.coeffs) + "])"

    def __add__(self, other: "ExactPolynomial") -> "ExactPolynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        return ExactPolynomial(self.coefficient(i) + other.coefficient(i) for i in range(n))

    def __sub__(self, other: "ExactPolynomial") -> "ExactPolynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        return ExactPolynomial(self.coefficient(i) - other.coefficient(i) for i in range(n))

    def exact(self, x: Number) -> Fraction:
        """精确求值（Horner）"""
        x = Fraction(x)
        acc = ZERO
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __call__(self, x: Any) -> Any:
        """浮点求值，支持 numpy 数组"""
        return npoly.polyval(x, self.float_coeffs)

    def derivative(self) -> "ExactPolynomial":
        return ExactPolynomial(n * c for n, c in enumerate(self.coeffs) if n > 0)

    def antiderivative(self) -> "ExactPolynomial":
        """原函数，常数项为 0"""
        return ExactPolynomial([ZERO] + [c / (n + 1) for n, c in enumerate(self.coeffs)])

    def integral(self, a: Number = 0, b: Number = 1) -> Fraction:
        """精确定积分 ∫_a^b"""
        anti = self.antiderivative()
        return anti.exact(b) - anti.exact(a)

    def moment(self, r: int) -> Fraction:
        """精确矩 ∫₀¹ x^r p(x) dx"""
        return sum((c / (n + r + 1) for n, c in enumerate(self.coeffs)), ZERO)

    def to_rows(self) -> List[Tuple[int, str]]:
        return [(n, format_rational(c)) for n, c in enumerate(self.coeffs)]


def seed_table_k1() -> CoeffTable:
    """k=1 的系数表：q₁(x, y) = x − x² + x³/3"""
    return CoeffTable(1, {(1, 0): 1, (2, 0): -1, (3, 0): Fraction(1, 3)})


def advance(table: CoeffTable) -> CoeffTable:
    """由第 k 步系数表计算第 k+1 步

    计算顺序：i=1 行（只依赖第 k 步），i=2 行（用到刚算出的 α_{1,j,k+1}），
    i ≥ 3 行，最后 j=0 列。所有 Σ_{p=0}^{3k+1} 的上限按原样保留。

    Args:
        table: 第 k 步系数表

    Returns:
        CoeffTable: 第 k+1 步系数表

    Raises:
        InvariantViolationError: 输入或输出破坏不变量
    """
    table.check_invariants()
    k = table.k
    a = table.get
    upper = 3 * k + 1
    new_i_max = 3 * (k + 1)
    new_j_max = 3 * (k + 1) - 1

    row_sums: Dict[int, Fraction] = {}

    def row_sum(i: int) -> Fraction:
        # Σ_{p=0}^{3k+1} α_{i,p,k}/(p+1)
        if i not in row_sums:
            row_sums[i] = sum((a(i, p) / (p + 1) for p in range(upper + 1)), ZERO)
        return row_sums[i]

    def diagonal(d: int, weight) -> Fraction:
        # Σ_{p=0}^{d} α_{d−p,p,k}·weight(p)
        return sum((a(d - p, p) * weight(p) for p in range(d + 1) if a(d - p, p)), ZERO)

    new: Dict[Entry, Fraction] = {}

    for j in range(1, new_j_max + 1):
        value = row_sum(j)
        for p in range(j):
            coeff = a(j - 1 - p, p)
            if coeff:
                value += Fraction(2 * p - j + 1, (p + 1) * (j - p)) * coeff
        new[(1, j)] = value

    for j in range(1, new_j_max + 1):
        new[(2, j)] = a(1, j) - new[(1, j)] / 2

    for i in range(3, new_i_max + 1):
        c2 = 1 + Fraction(1, i * (i - 1))
        c3 = Fraction(1, 3) + Fraction(1, i * (i - 2))
        for j in range(1, new_j_max + 1):
            new[(i, j)] = a(i - 1, j) - c2 * a(i - 2, j) + c3 * a(i - 3, j)

    new[(1, 0)] = ZERO
    # i=2 instance of the j=0 recursion; a(1,0) only contributes at k=1
    new[(2, 0)] = a(1, 0) + 2 * row_sum(1)

    for i in range(3, new_i_max + 1):
        c2 = 1 + Fraction(1, (i - 1) * i)
        c3 = Fraction(1, 3) + Fraction(1, (i - 2) * i)
        value = a(i - 1, 0) - c2 * a(i - 2, 0) + c3 * a(i - 3, 0)
        value += Fraction(i + 2, i) * row_sum(i - 1)
        value -= Fraction(i + 4, 2 * i) * row_sum(i - 2)
        value -= Fraction(i + 2, i) * diagonal(i - 2, lambda p: Fraction(1, p + 1))
        value += Fraction(i + 4, 2 * i) * diagonal(i - 3, lambda p: Fraction(1, p + 1))
        value += diagonal(i - 2, lambda p, i=i: Fraction(1, i - p))
        value -= diagonal(i - 3, lambda p, i=i: Fraction(1, i - p)) / 2
        new[(i, 0)] = value

    result = CoeffTable(k + 1, new)
    result.check_invariants()
    logger.debug(_t("系数表已推进") + f": k={k + 1}, " + _t("非零项") + f"={len(result)}")
    return result


@lru_cache(maxsize=None)
def _tables_cached(k_max: int) -> Tuple[CoeffTable, ...]:
    tables = [seed_table_k1()]
    while tables[-1].k < k_max:
        tables.append(advance(tables[-1]))
    return tuple(tables)


def tables_up_to(k_max: int) -> Tuple[CoeffTable, ...]:
    """返回 k = 1..k_max 的全部系数表（结果被缓存）

    Raises:
        InvariantViolationError: k_max < 1
    """
    if k_max < 1:
        raise InvariantViolationError(f"k 必须 ≥ 1: {k_max}", k=k_max)
    return _tables_cached(int(k_max))


def table_at(k: int) -> CoeffTable:
    """第 k 步系数表"""
    return tables_up_to(k)[-1]


def limits(k_max: int) -> LimitTable:
    """读取极限系数 β_{i,j} = α_{i,j,k_max}（i + j + 1 ≤ k_max）

    额外推进一步，要求所有声称已稳定的条目在 k_max 与 k_max+1 之间不变。

    Args:
        k_max: 读取步数（≥ 2）

    Returns:
        LimitTable: 极限系数表

    Raises:
        StabilizationError: 有声称稳定的条目发生变化
    """
    if k_max < 2:
        raise InvariantViolationError(f"k_max 必须 ≥ 2: {k_max}", k=k_max)
    tables = tables_up_to(k_max + 1)
    current, following = tables[k_max - 1], tables[k_max]
    entries: Dict[Entry, Fraction] = {}
    violations: List[Entry] = []
    for total in range(k_max):
        for i in range(total + 1):
            j = total - i
            value = current.get(i, j)
            if following.get(i, j) != value:
                violations.append((i, j))
            entries[(i, j)] = value
    if violations:
        raise StabilizationError(
            f"k_max={k_max} 时 {len(violations)} 个声称稳定的系数发生变化: {violations[:5]}",
            violations=violations)
    logger.info(_t("极限系数已读取") + f": k_used={k_max}, " + _t("条目数") + f"={len(entries)}")
    return LimitTable(entries, k_max)


def stabilization_report(k_max: int) -> List[Dict[str, Any]]:
    """逐步检查稳定性：i + j + 1 ≤ k 时 α_{i,j,k} = α_{i,j,k+1}

    Args:
        k_max: 检查到的最大 k

    Returns:
        list: 每个 k 一条记录 {k, claimed, violations}
    """
    tables = tables_up_to(k_max + 1)
    report = []
    for k in range(1, k_max + 1):
        current, following = tables[k - 1], tables[k]
        claimed = 0
        violations = []
        for total in range(k):
            for i in range(total + 1):
                j = total - i
                claimed += 1
                if current.get(i, j) != following.get(i, j):
                    violations.append((i, j))
        report.append({"k": k, "claimed": claimed, "violations": violations})
    return report


def eval_qk(table: CoeffTable, x: Any, y: Any) -> Any:
    """q_k(x, y) = Σ α x^i y^j 的浮点值，支持 numpy 数组"""
    return npoly.polyval2d(x, y, table.dense)


def integral_gk(table: CoeffTable) -> Fraction:
    """g_k 在 [0,1]⁵ 上的精确积分 10·Σ α_{i,j}/((i+1)(i+j+2))"""
    return 10 * sum((v / ((i + 1) * (i + j + 2)) for i, j, v in table), ZERO)


def marginal_poly_k(table: CoeffTable) -> ExactPolynomial:
    """一维边缘密度 3/5 + 2∫₀ˣ q_k(y,x)dy + 2∫ₓ¹ q_k(x,y)dy 的精确展开"""
    degree = table.max_i + table.max_j + 2
    c = [ZERO] * (degree + 1)
    c[0] = MARGINAL_CONSTANT
    for i, j, v in table:
        c[i + j + 1] += 2 * v / (i + 1)
        c[i] += 2 * v / (j + 1)
        c[i + j + 1] -= 2 * v / (j + 1)
    return ExactPolynomial(c)


def marginal_cdf_poly_k(table: CoeffTable) -> ExactPolynomial:
    """边缘分布函数：marginal_poly_k 的原函数（在 0 处为 0）"""
    return marginal_poly_k(table).antiderivative()


def marginal_from_next_row(next_table: CoeffTable) -> ExactPolynomial:
    """由第 k+1 步的 i=1 行得到第 k 步边缘密度 3/5 + 2Σ_j α_{1,j,k+1} x^j"""
    c = [ZERO] * (next_table.max_j + 1)
    for (i, j), v in next_table.entries.items():
        if i == 1:
            c[j] += 2 * v
    c[0] += MARGINAL_CONSTANT
    return ExactPolynomial(c)


def marginal_moment_k(table: CoeffTable, r: int = 1) -> Fraction:
    """第 k 步边缘分布的精确 r 阶矩"""
    return marginal_poly_k(table).moment(r)


def boundary_conditions_from_limits(lt: LimitTable) -> Tuple[Fraction, ...]:
    """ℬ₁ 在 y=1 处的五个边界值

    ℬ₁(1) = 1/5，ℬ₁⁽ⁿ⁺¹⁾(1) = (−1)ⁿ n! β_{1,n}，n = 0..3。

    Raises:
        MissingLimitError: 缺少 β_{1,0..3}
    """
    values = [Fraction(1, 5)]
    factorial = 1
    for n in range(4):
        if n > 0:
            factorial *= n
        values.append((-1) ** n * factorial * lt.beta(1, n))
    return tuple(values)


def kgen_partial_sums(tables: Sequence[CoeffTable], x: float, z: float,
                      j: int) -> Tuple[float, float]:
    """k 方向生成函数的截断和

    Returns:
        (Σ_{i,k} α_{i,j,k} x^i z^k, Σ_k α_{1,j,k} z^k)，k 取自给定的系数表
    """
    full = 0.0
    row_one = 0.0
    for table in tables:
        zk = z ** table.k
        for (i, jj), v in table.entries.items():
            if jj != j:
                continue
            term = float(v) * zk
            full += term * x ** i
            if i == 1:
                row_one += term
    return full, row_one
