"""自定义异常模块

定义项目中使用的自定义异常层次结构：
- BakSneppenError: 基础异常
- ConfigError: 配置错误
- CoefficientError: 精确系数错误
- HypergeometricError: 超几何函数错误
- SolverError: 常微分方程求解错误
- QuadratureError: 数值积分错误
- SimulationError: 蒙特卡洛模拟错误
- SerializationError: 序列化错误
"""

from typing import Optional, Tuple


class BakSneppenError(Exception):
    """bsfive 基础异常

    所有自定义异常的基类。
    """
    pass


class ConfigError(BakSneppenError):
    """配置错误

    配置加载、验证失败时抛出。
    """
    pass


class ValidationError(ConfigError):
    """配置验证错误

    配置或参数取值无效时抛出。
    """
    pass


class CoefficientError(BakSneppenError):
    """精确系数错误

    系数表 α_{i,j,k} 计算相关的错误。
    """
    pass


class InvariantViolationError(CoefficientError):
    """系数表不变量被破坏

    Attributes:
        k: 出错的步数
        entry: 出错的 (i, j) 位置
    """

    def __init__(self, message: str, k: Optional[int] = None,
                 entry: Optional[Tuple[int, int]] = None):
        super().__init__(message)
        self.k = k
        self.entry = entry


class StabilizationError(CoefficientError):
    """稳定性错误

    声称已稳定的系数在最后两步之间发生了变化。

    Attributes:
        violations: 发生变化的 (i, j) 列表
    """

    def __init__(self, message: str, violations: Optional[list] = None):
        super().__init__(message)
        self.violations = violations or []


class MissingLimitError(CoefficientError):
    """极限系数缺失

    LimitTable 中缺少所需的 β_{i,j}。
    """
    pass


class HypergeometricError(BakSneppenError):
    """超几何函数错误"""
    pass


class ParameterError(HypergeometricError):
    """参数错误

    c = m/3 为非正整数，或自变量超出收敛域。
    """
    pass


class SeriesConvergenceError(HypergeometricError):
    """级数不收敛

    达到最大项数仍未满足停止条件。
    """
    pass


class SingularPointError(HypergeometricError):
    """奇点错误

    在 y = 0 处请求 𝒢 的导数链。
    """
    pass


class SolverError(BakSneppenError):
    """常微分方程求解错误"""
    pass


class SingularityError(SolverError):
    """主系数过小

    |c₅(y)| 低于设定下限。

    Attributes:
        y: 出错位置
        value: c₅(y) 的值
    """

    def __init__(self, message: str, y: Optional[float] = None, value: Optional[float] = None):
        super().__init__(message)
        self.y = y
        self.value = value


class StepSizeUnderflowError(SolverError):
    """步长下溢

    积分器无法继续推进。
    """
    pass


class DomainError(SolverError):
    """定义域错误

    在 [y_min, 1] 之外求值且未允许外推。
    """
    pass


class QuadratureError(BakSneppenError):
    """数值积分不收敛"""
    pass


class SimulationError(BakSneppenError):
    """模拟错误

    模拟器状态无效。
    """
    pass


class SerializationError(BakSneppenError):
    """序列化错误

    "p/q" 字符串或表格文件格式错误。
    """
    pass
