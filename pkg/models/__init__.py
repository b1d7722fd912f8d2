"""数据模型模块

提供项目中使用的数据模型：
- SeriesConfig / SolverConfig / QuadratureConfig / SimConfig: 数值参数
- CheckStatus / CheckRecord / ValidationReport: 验证报告
"""

from .config import QuadratureConfig, SeriesConfig, SimConfig, SolverConfig
from .report import CheckRecord, CheckStatus, ValidationReport

__all__ = [
    "SeriesConfig",
    "SolverConfig",
    "QuadratureConfig",
    "SimConfig",
    "CheckStatus",
    "CheckRecord",
    "ValidationReport",
]
