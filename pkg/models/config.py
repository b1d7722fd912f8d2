"""配置数据模型

定义数值计算各阶段的参数对象：
- SeriesConfig: 超几何级数求和参数
- SolverConfig: 五阶常微分方程求解参数
- QuadratureConfig: 数值积分参数
- SimConfig: 蒙特卡洛模拟参数
"""

from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, Mapping, Optional, Type, TypeVar

from utils.config_manager import ConfigValidator, ValidationError

T = TypeVar("T")


def _from_mapping(cls: Type[T], section: Optional[Mapping[str, Any]], **overrides: Any) -> T:
    """从配置节构造数据类，忽略未知键"""
    names = {f.name for f in fields(cls)}  # type: ignore[arg-type]
    kwargs = {k: v for k, v in (section or {}).items() if k in names}
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    return cls(**kwargs)


@dataclass
class SeriesConfig:
    """超几何级数求和参数

    当 |t_s| < rel_tol·|部分和| 时停止；超过 max_terms 视为不收敛。
    """
    rel_tol: float = 1e-14
    max_terms: int = 10000

    def __post_init__(self):
        """初始化后验证"""
        self.validate()

    def validate(self) -> None:
        """验证参数

        Raises:
            ValidationError: 验证失败时抛出
        """
        self.rel_tol = ConfigValidator.validate_range(self.rel_tol, "rel_tol", 0, 1, exclusive=True)
        self.max_terms = ConfigValidator.validate_positive_int(
            self.max_terms, "max_terms", allow_zero=False
        )

    @classmethod
    def from_config(cls, section: Optional[Mapping[str, Any]] = None) -> "SeriesConfig":
        return _from_mapping(cls, section)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class SolverConfig:
    """五阶常微分方程求解参数

    fixed_step 非空时使用定步长 RK4 校验模式，否则使用 solve_ivp 自适应方法。
    """
    y_min: float = 1e-3
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    initial_step: float = 1e-4
    method: str = "DOP853"
    c5_floor: float = 1e-12
    fixed_step: Optional[float] = None

    def __post_init__(self):
        """初始化后验证"""
        self.validate()

    def validate(self) -> None:
        """验证参数

        Raises:
            ValidationError: 验证失败时抛出
        """
        self.y_min = ConfigValidator.validate_range(self.y_min, "y_min", 0, 1, exclusive=True)
        self.rel_tol = ConfigValidator.validate_range(self.rel_tol, "rel_tol", 0, 1, exclusive=True)
        self.abs_tol = ConfigValidator.validate_range(self.abs_tol, "abs_tol", 0, 1, exclusive=True)
        self.initial_step = ConfigValidator.validate_range(
            self.initial_step, "initial_step", 0, 1, exclusive=True
        )
        self.method = ConfigValidator.validate_choice(
            self.method, "method", ["DOP853", "RK45", "Radau"]
        ).upper()
        if self.method == "RADAU":
            self.method = "Radau"
        self.c5_floor = ConfigValidator.validate_range(self.c5_floor, "c5_floor", min_val=0)
        if self.fixed_step is not None:
            self.fixed_step = ConfigValidator.validate_range(
                self.fixed_step, "fixed_step", 0, 1 - self.y_min, exclusive=False
            )
            if self.fixed_step <= 0:
                raise ValidationError(f"fixed_step 必须大于 0: {self.fixed_step}")

    @classmethod
    def from_config(cls, section: Optional[Mapping[str, Any]] = None,
                    **overrides: Any) -> "SolverConfig":
        return _from_mapping(cls, section, **overrides)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class QuadratureConfig:
    """数值积分参数"""
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    limit: int = 200
    table_points: int = 801

    def __post_init__(self):
        """初始化后验证"""
        self.validate()

    def validate(self) -> None:
        """验证参数

        Raises:
            ValidationError: 验证失败时抛出
        """
        self.abs_tol = ConfigValidator.validate_range(self.abs_tol, "abs_tol", 0, 1, exclusive=True)
        self.rel_tol = ConfigValidator.validate_range(self.rel_tol, "rel_tol", 0, 1, exclusive=True)
        self.limit = ConfigValidator.validate_positive_int(self.limit, "limit", allow_zero=False)
        self.table_points = int(ConfigValidator.validate_range(
            ConfigValidator.validate_positive_int(self.table_points, "table_points"),
            "table_points", min_val=3
        ))

    @classmethod
    def from_config(cls, section: Optional[Mapping[str, Any]] = None) -> "QuadratureConfig":
        return _from_mapping(cls, section)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class SimConfig:
    """蒙特卡洛模拟参数

    表示一次模拟运行的全部参数。n_samples 是所有副本与通道合计的记录样本数；
    关闭 pool_sites 时只记录位点 0。
    """
    n_species: int = 5
    seed: int = 20240501
    burn_in: int = 100000
    n_samples: int = 1000000
    thinning: int = 10
    n_replicas: int = 4
    lanes: int = 1024
    pool_sites: bool = False
    workers: int = 4

    def __post_init__(self):
        """初始化后验证"""
        self.validate()

    def validate(self) -> None:
        """验证参数

        Raises:
            ValidationError: 验证失败时抛出
        """
        self.n_species = int(ConfigValidator.validate_range(
            ConfigValidator.validate_positive_int(self.n_species, "n_species"),
            "n_species", min_val=3
        ))
        self.seed = ConfigValidator.validate_positive_int(self.seed, "seed")
        if self.seed >= 2 ** 64:
            raise ValidationError(f"seed 必须小于 2^64: {self.seed}")
        self.burn_in = ConfigValidator.validate_positive_int(self.burn_in, "burn_in")
        self.n_samples = ConfigValidator.validate_positive_int(
            self.n_samples, "n_samples", allow_zero=False
        )
        self.thinning = ConfigValidator.validate_positive_int(
            self.thinning, "thinning", allow_zero=False
        )
        self.n_replicas = ConfigValidator.validate_positive_int(
            self.n_replicas, "n_replicas", allow_zero=False
        )
        self.lanes = ConfigValidator.validate_positive_int(self.lanes, "lanes", allow_zero=False)
        self.workers = ConfigValidator.validate_positive_int(
            self.workers, "workers", allow_zero=False
        )
        self.pool_sites = bool(self.pool_sites)

    @classmethod
    def from_config(cls, section: Optional[Mapping[str, Any]] = None,
                    **overrides: Any) -> "SimConfig":
        return _from_mapping(cls, section, **overrides)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
