"""工具模块

提供配置管理、错误处理、异常定义与结果序列化。
"""

__version__ = "0.1.0"

from .config_manager import ConfigManager, ConfigValidator, get_config, load_config
from .error_handler import ErrorHandler, guard
from .exceptions import (
    BakSneppenError,
    CoefficientError,
    ConfigError,
    DomainError,
    HypergeometricError,
    InvariantViolationError,
    MissingLimitError,
    ParameterError,
    QuadratureError,
    SerializationError,
    SeriesConvergenceError,
    SimulationError,
    SingularityError,
    SingularPointError,
    SolverError,
    StabilizationError,
    StepSizeUnderflowError,
    ValidationError,
)
from .serialization import format_rational, parse_rational, write_csv, write_json

__all__ = [
    "ConfigManager",
    "ConfigValidator",
    "load_config",
    "get_config",
    "ErrorHandler",
    "guard",
    "format_rational",
    "parse_rational",
    "write_csv",
    "write_json",
    # 异常类
    "BakSneppenError",
    "ConfigError",
    "ValidationError",
    "CoefficientError",
    "InvariantViolationError",
    "StabilizationError",
    "MissingLimitError",
    "HypergeometricError",
    "ParameterError",
    "SeriesConvergenceError",
    "SingularPointError",
    "SolverError",
    "SingularityError",
    "StepSizeUnderflowError",
    "DomainError",
    "QuadratureError",
    "SimulationError",
    "SerializationError",
]
