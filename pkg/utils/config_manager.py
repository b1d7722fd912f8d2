"""配置管理模块

提供配置加载、验证和管理功能：
- 内置默认值 -> config/default.yaml -> config/config.yaml -> 环境变量 的合并顺序
- 提供配置验证功能，无效值回退到默认值
- 支持通过点号路径访问嵌套配置
"""

import copy
import os
from typing import Any, Dict, List, Mapping, Optional, Union

import yaml

from logger import setup_logger, _ as _t
from utils.exceptions import ValidationError

logger = setup_logger(__name__)

# 环境变量前缀
ENV_PREFIX: str = "BSFIVE_"

# 环境变量名（去掉前缀） -> 配置路径
ENV_OVERRIDES: Dict[str, str] = {
    "K": "coeffs.default_k",
    "KMAX": "coeffs.stability_k",
    "FORMAT": "output.format",
    "OUT": "output.dir",
    "SEED": "simulation.seed",
    "N_SPECIES": "simulation.n_species",
    "SAMPLES": "simulation.n_samples",
    "BURN_IN": "simulation.burn_in",
    "THIN": "simulation.thinning",
    "YMIN": "solver.y_min",
    "TOL": "solver.rel_tol",
    "LEVEL": "validation.level",
}


class ConfigValidator:
    """配置验证器"""

    @staticmethod
    def validate_positive_int(value: Any, field_name: str, allow_zero: bool = True) -> int:
        """验证正整数

        Args:
            value: 要验证的值
            field_name: 字段名称
            allow_zero: 是否允许零

        Returns:
            int: 验证后的整数值

        Raises:
            ValidationError: 验证失败
        """
        if isinstance(value, bool):
            raise ValidationError(f"{field_name} 必须是整数: {value}")
        try:
            int_value = int(value)
        except (TypeError, ValueError):
            raise ValidationError(f"{field_name} 必须是整数: {value}")
        if isinstance(value, float) and int_value != value:
            raise ValidationError(f"{field_name} 必须是整数: {value}")

        if allow_zero:
            if int_value < 0:
                raise ValidationError(f"{field_name} 不能为负数: {int_value}")
        else:
            if int_value <= 0:
                raise ValidationError(f"{field_name} 必须是正整数: {int_value}")

        return int_value

    @staticmethod
    def validate_range(value: Union[int, float], field_name: str,
                       min_val: Optional[Union[int, float]] = None,
                       max_val: Optional[Union[int, float]] = None,
                       exclusive: bool = False) -> float:
        """验证数值范围

        Args:
            value: 要验证的值
            field_name: 字段名称
            min_val: 最小值
            max_val: 最大值
            exclusive: 是否为开区间

        Returns:
            验证后的值

        Raises:
            ValidationError: 验证失败
        """
        try:
            num_value = float(value)
        except (TypeError, ValueError):
            raise ValidationError(f"{field_name} 必须是数字: {value}")

        if exclusive:
            if min_val is not None and num_value <= min_val:
                raise ValidationError(f"{field_name} 必须大于 {min_val}: {num_value}")
            if max_val is not None and num_value >= max_val:
                raise ValidationError(f"{field_name} 必须小于 {max_val}: {num_value}")
        else:
            if min_val is not None and num_value < min_val:
                raise ValidationError(f"{field_name} 不能小于 {min_val}: {num_value}")
            if max_val is not None and num_value > max_val:
                raise ValidationError(f"{field_name} 不能大于 {max_val}: {num_value}")

        return num_value

    @staticmethod
    def validate_path(path: str, field_name: str, must_exist: bool = False) -> str:
        """验证路径

        Args:
            path: 要验证的路径
            field_name: 字段名称
            must_exist: 路径是否必须存在

        Returns:
            str: 验证后的路径

        Raises:
            ValidationError: 验证失败
        """
        if not path:
            raise ValidationError(f"{field_name} 不能为空")

        expanded_path = os.path.expanduser(str(path))

        if must_exist and not os.path.exists(expanded_path):
            raise ValidationError(f"{field_name} 路径不存在: {expanded_path}")

        return expanded_path

    @staticmethod
    def validate_choice(value: Any, field_name: str, choices: List[str]) -> str:
        """验证枚举值

        Args:
            value: 要验证的值
            field_name: 字段名称
            choices: 允许的选项

        Returns:
            str: 验证后的值（保持原始大小写）

        Raises:
            ValidationError: 验证失败
        """
        str_value = str(value)
        valid_choices_lower = [c.lower() for c in choices]

        if str_value.lower() not in valid_choices_lower:
            raise ValidationError(
                f"{field_name} 必须是以下值之一: {', '.join(choices)}, 实际值: {value}"
            )

        return str_value


class ConfigManager:
    """配置管理器"""

    # 默认配置，与 config/default.yaml 保持一致
    DEFAULT_CONFIG: Dict[str, Any] = {
        "coeffs": {
            "max_k": 15,
            "default_k": 5,
            "stability_k": 8,
        },
        "series": {
            "rel_tol": 1e-14,
            "max_terms": 10000,
        },
        "solver": {
            "y_min": 1e-3,
            "rel_tol": 1e-10,
            "abs_tol": 1e-12,
            "initial_step": 1e-4,
            "method": "DOP853",
            "c5_floor": 1e-12,
            "fixed_step": None,
        },
        "quadrature": {
            "abs_tol": 1e-10,
            "rel_tol": 1e-10,
            "limit": 200,
            "table_points": 801,
        },
        "density": {
            "marginal_convention": "derived",
        },
        "simulation": {
            "n_species": 5,
            "seed": 20240501,
            "burn_in": 100000,
            "n_samples": 1000000,
            "thinning": 10,
            "n_replicas": 4,
            "lanes": 1024,
            "pool_sites": False,
            "workers": 4,
        },
        "validation": {
            "level": "quick",
            "kstep_samples": 1000000,
            "kstep_ks": [1, 3, 5],
            "steady_samples": 10000000,
            "confidence": 0.99,
            "trend_k": [4, 6, 8, 10, 12],
        },
        "output": {
            "dir": "output",
            "format": "csv",
            "grid_points": 201,
        },
        "logging": {
            "level": "INFO",
            "file": "logs/bsfive.log",
            "max_bytes": 10485760,
            "backup_count": 5,
        },
        "error_handling": {
            "fail_strategy": "log",
        },
    }

    def __init__(self, config_dir: str = "config"):
        """初始化配置管理器

        Args:
            config_dir: 配置文件目录
        """
        self.config_dir: str = config_dir
        self.default_config_file: str = os.path.join(config_dir, "default.yaml")
        self.user_config_file: str = os.path.join(config_dir, "config.yaml")
        self._config: Dict[str, Any] = copy.deepcopy(self.DEFAULT_CONFIG)
        self._validator: ConfigValidator = ConfigValidator()

    def load(self, environ: Optional[Mapping[str, str]] = None) -> Dict[str, Any]:
        """加载配置

        加载顺序：内置默认值 -> 默认配置文件 -> 用户配置文件 -> 环境变量

        Args:
            environ: 环境变量映射，默认使用 os.environ

        Returns:
            dict: 合并后的配置
        """
        config = copy.deepcopy(self.DEFAULT_CONFIG)

        for path, label in ((self.default_config_file, "默认"), (self.user_config_file, "用户")):
            if not os.path.exists(path):
                logger.debug(_t(f"{label}配置文件不存在") + f": {path}")
                continue
            try:
                with open(path, "r", encoding="utf-8") as f:
                    loaded = yaml.safe_load(f)
            except (OSError, yaml.YAMLError) as e:
                raise ValidationError(f"无法读取配置文件 {path}: {e}")
            if loaded is None:
                continue
            if not isinstance(loaded, dict):
                raise ValidationError(f"配置文件顶层必须是映射: {path}")
            config = self._merge(config, loaded)
            logger.debug(_t(f"已加载{label}配置文件") + f": {path}")

        self.apply_env_overrides(config, os.environ if environ is None else environ)

        self.validate(config)

        self._config = config
        return config

    def apply_env_overrides(self, config: Dict[str, Any], environ: Mapping[str, str]) -> None:
        """应用 BSFIVE_ 前缀的环境变量

        值使用 yaml.safe_load 解析，数字与布尔值保持类型。

        Args:
            config: 配置字典（就地修改）
            environ: 环境变量映射
        """
        for name, dotted in ENV_OVERRIDES.items():
            raw = environ.get(ENV_PREFIX + name)
            if raw is None or raw == "":
                continue
            try:
                value = yaml.safe_load(raw)
            except yaml.YAMLError:
                value = raw
            self._set_in(config, dotted, value)
            logger.debug(_t("环境变量覆盖") + f": {ENV_PREFIX}{name} -> {dotted}={value!r}")

    def validate(self, config: Dict[str, Any]) -> None:
        """验证配置

        无效取值记录警告并回退到默认值；结构错误直接抛出。

        Args:
            config: 要验证的配置

        Raises:
            ValidationError: 验证失败时抛出
        """
        errors: List[str] = []
        warnings: List[str] = []
        defaults = self.DEFAULT_CONFIG
        v = self._validator

        for section in defaults:
            if section in config and not isinstance(config[section], dict):
                errors.append(f"配置节 {section} 必须是映射")
        if errors:
            raise ValidationError("; ".join(errors))

        def check(section: str, key: str, fn) -> None:
            block = config.get(section)
            if block is None or key not in block:
                return
            try:
                block[key] = fn(block[key], f"{section}.{key}")
            except ValidationError as e:
                warnings.append(str(e))
                block[key] = copy.deepcopy(defaults[section][key])

        check("coeffs", "max_k", lambda x, f: v.validate_positive_int(x, f, allow_zero=False))
        check("coeffs", "default_k", lambda x, f: v.validate_positive_int(x, f, allow_zero=False))
        check("coeffs", "stability_k",
              lambda x, f: int(v.validate_range(v.validate_positive_int(x, f), f, min_val=2)))

        check("series", "rel_tol", lambda x, f: v.validate_range(x, f, 0, 1, exclusive=True))
        check("series", "max_terms", lambda x, f: v.validate_positive_int(x, f, allow_zero=False))

        check("solver", "y_min", lambda x, f: v.validate_range(x, f, 0, 1, exclusive=True))
        check("solver", "rel_tol", lambda x, f: v.validate_range(x, f, 0, 1, exclusive=True))
        check("solver", "abs_tol", lambda x, f: v.validate_range(x, f, 0, 1, exclusive=True))
        check("solver", "initial_step", lambda x, f: v.validate_range(x, f, 0, 1, exclusive=True))
        check("solver", "method", lambda x, f: v.validate_choice(x, f, ["DOP853", "RK45", "Radau"]))
        check("solver", "c5_floor", lambda x, f: v.validate_range(x, f, min_val=0))
        check("solver", "fixed_step",
              lambda x, f: None if x is None else v.validate_range(x, f, 0, 1, exclusive=True))

        check("quadrature", "abs_tol", lambda x, f: v.validate_range(x, f, 0, 1, exclusive=True))
        check("quadrature", "rel_tol", lambda x, f: v.validate_range(x, f, 0, 1, exclusive=True))
        check("quadrature", "limit", lambda x, f: v.validate_positive_int(x, f, allow_zero=False))
        check("quadrature", "table_points",
              lambda x, f: int(v.validate_range(v.validate_positive_int(x, f), f, min_val=3)))

        check("density", "marginal_convention",
              lambda x, f: v.validate_choice(x, f, ["derived", "printed"]).lower())

        check("simulation", "n_species",
              lambda x, f: int(v.validate_range(v.validate_positive_int(x, f), f, min_val=3)))
        check("simulation", "seed", lambda x, f: v.validate_positive_int(x, f))
        check("simulation", "burn_in", lambda x, f: v.validate_positive_int(x, f))
        check("simulation", "n_samples", lambda x, f: v.validate_positive_int(x, f, allow_zero=False))
        check("simulation", "thinning", lambda x, f: v.validate_positive_int(x, f, allow_zero=False))
        check("simulation", "n_replicas", lambda x, f: v.validate_positive_int(x, f, allow_zero=False))
        check("simulation", "lanes", lambda x, f: v.validate_positive_int(x, f, allow_zero=False))
        check("simulation", "workers",
              lambda x, f: int(v.validate_range(
                  v.validate_positive_int(x, f, allow_zero=False), f, max_val=64)))

        check("validation", "level", lambda x, f: v.validate_choice(x, f, ["quick", "full"]).lower())
        check("validation", "kstep_samples",
              lambda x, f: v.validate_positive_int(x, f, allow_zero=False))
        check("validation", "steady_samples",
              lambda x, f: v.validate_positive_int(x, f, allow_zero=False))
        check("validation", "confidence", lambda x, f: v.validate_range(x, f, 0, 1, exclusive=True))

        check("output", "dir", lambda x, f: v.validate_path(x, f))
        check("output", "format", lambda x, f: v.validate_choice(x, f, ["csv", "json"]).lower())
        check("output", "grid_points",
              lambda x, f: int(v.validate_range(v.validate_positive_int(x, f), f, min_val=2)))

        check("logging", "level",
              lambda x, f: v.validate_choice(
                  x, f, ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]).upper())

        check("error_handling", "fail_strategy",
              lambda x, f: v.validate_choice(x, f, ["log", "skip", "raise"]).lower())

        for warning in warnings:
            logger.warning(_t("配置警告") + f": {warning}")

    def get(self, key: str, default: Any = None) -> Any:
        """获取配置值，支持点号路径

        Args:
            key: 配置键，支持点号路径（如 "solver.y_min"）
            default: 默认值

        Returns:
            配置值或默认值
        """
        value: Any = self._config
        for k in key.split("."):
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default
        return value

    def set(self, key: str, value: Any) -> None:
        """设置配置值，支持点号路径

        Args:
            key: 配置键，支持点号路径
            value: 配置值
        """
        self._set_in(self._config, key, value)

    @property
    def config(self) -> Dict[str, Any]:
        """获取完整配置（深拷贝）"""
        return copy.deepcopy(self._config)

    @staticmethod
    def _set_in(config: Dict[str, Any], key: str, value: Any) -> None:
        keys = key.split(".")
        node = config
        for k in keys[:-1]:
            if k not in node or not isinstance(node[k], dict):
                node[k] = {}
            node = node[k]
        node[keys[-1]] = value

    def _merge(self, base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
        """递归合并配置

        Args:
            base: 基础配置
            override: 覆盖配置

        Returns:
            合并后的配置
        """
        result = copy.deepcopy(base)

        for key, value in override.items():
            if key in result and isinstance(result[key], dict) and isinstance(value, dict):
                result[key] = self._merge(result[key], value)
            else:
                result[key] = value

        return result


# 全局配置管理器实例
_config_manager: Optional[ConfigManager] = None


def get_config_manager(config_dir: Optional[str] = None) -> ConfigManager:
    """获取全局配置管理器实例

    Args:
        config_dir: 配置目录；与当前实例不同时重新创建

    Returns:
        ConfigManager: 配置管理器实例
    """
    global _config_manager
    if _config_manager is None or (config_dir is not None and config_dir != _config_manager.config_dir):
        _config_manager = ConfigManager(config_dir or "config")
    return _config_manager


def load_config(config_dir: Optional[str] = None) -> Dict[str, Any]:
    """加载配置的便捷函数

    Args:
        config_dir: 配置目录

    Returns:
        dict: 配置字典
    """
    return get_config_manager(config_dir).load()


def get_config(key: str, default: Any = None) -> Any:
    """获取配置值的便捷函数

    Args:
        key: 配置键
        default: 默认值

    Returns:
        配置值
    """
    return get_config_manager().get(key, default)
