"""日志配置模块

提供统一的日志记录功能：
- 文件日志： RotatingFileHandler，自动轮转
- 控制台日志：StreamHandler，输出到 stderr，保证 stdout 上的 CSV 不被污染
- 支持日志消息翻译
- 程序退出时正确释放资源
"""

import logging
import os
import sys
from logging.handlers import RotatingFileHandler
from typing import Any, Dict, Mapping, Optional, Tuple

# 日志配置常量
DEFAULT_LOG_DIR: str = "logs"
DEFAULT_LOG_FILE: str = "bsfive.log"
DEFAULT_MAX_BYTES: int = 10 * 1024 * 1024  # 10MB
DEFAULT_BACKUP_COUNT: int = 5
DEFAULT_ENCODING: str = 'utf-8'
LOG_FORMAT: str = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
DATE_FORMAT: str = '%Y-%m-%d %H:%M:%S'

# 控制台输出开关（测试或嵌入使用时可关闭）
CONSOLE_OUTPUT_ENABLED: bool = True

# 全局标志：是否已经初始化
_initialized: bool = False
_root_handlers: list = []
_logging_config_cache: Optional[Dict[str, Any]] = None


def disable_console_output() -> None:
    """禁用控制台日志输出

    调用此函数后，新初始化的 logger 只输出到文件
    """
    global CONSOLE_OUTPUT_ENABLED
    CONSOLE_OUTPUT_ENABLED = False


def _load_logging_config() -> Dict[str, Any]:
    """加载日志配置

    apply_logging_config() 设置过的配置优先，否则使用默认值。

    Returns:
        包含日志配置项的字典
    """
    if _logging_config_cache is not None:
        return _logging_config_cache
    return {
        'file': os.path.join(DEFAULT_LOG_DIR, DEFAULT_LOG_FILE),
        'level': 'INFO',
        'max_bytes': DEFAULT_MAX_BYTES,
        'backup_count': DEFAULT_BACKUP_COUNT
    }


def apply_logging_config(config: Mapping[str, Any]) -> None:
    """按配置文件中的 logging 节重新配置根日志记录器

    Args:
        config: 包含 file、level、max_bytes、backup_count 的映射
    """
    global _logging_config_cache, _initialized
    _logging_config_cache = {**_load_logging_config(), **dict(config or {})}
    _initialized = False
    _ensure_root_logger_configured()


def _get_log_settings() -> Tuple[str, str, int, int, int]:
    """获取日志设置

    Returns:
        (log_dir, log_file, log_level, max_bytes, backup_count)
    """
    config = _load_logging_config()

    log_file: str = config.get('file', os.path.join(DEFAULT_LOG_DIR, DEFAULT_LOG_FILE))
    log_dir: str = os.path.dirname(log_file) or DEFAULT_LOG_DIR

    level_str: str = str(config.get('level', 'INFO'))
    log_level: int = getattr(logging, level_str.upper(), logging.INFO)

    max_bytes: int = int(config.get('max_bytes', DEFAULT_MAX_BYTES))
    backup_count: int = int(config.get('backup_count', DEFAULT_BACKUP_COUNT))

    return log_dir, log_file, log_level, max_bytes, backup_count


def _(message: str) -> str:
    """翻译函数，从 builtins 获取实际的翻译函数"""
    import builtins
    trans_func = getattr(builtins, '_', None)
    if trans_func and callable(trans_func):
        return trans_func(message)
    return message


def _ensure_root_logger_configured() -> None:
    """确保根日志记录器已配置（只执行一次）"""
    global _initialized

    if _initialized:
        return

    log_dir, log_file, log_level, max_bytes, backup_count = _get_log_settings()

    log_file = os.path.abspath(log_file)
    log_dir = os.path.abspath(log_dir)
    os.makedirs(log_dir, exist_ok=True)

    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG)

    # 清除现有的处理器（避免重复）
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)
        try:
            handler.close()
        except (IOError, OSError) as e:
            print(f"关闭日志处理器时出错: {e}", file=sys.stderr)

    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)

    try:
        file_handler = RotatingFileHandler(
            log_file,
            maxBytes=max_bytes,
            backupCount=backup_count,
            encoding=DEFAULT_ENCODING,
            delay=True
        )
        file_handler.setLevel(log_level)
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)
        _root_handlers.append(file_handler)
    except Exception as e:
        print(f"[Logger Error] 无法创建文件处理器: {e}", file=sys.stderr, flush=True)

    if CONSOLE_OUTPUT_ENABLED:
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(log_level)
        console_handler.setFormatter(formatter)
        root_logger.addHandler(console_handler)
        _root_handlers.append(console_handler)

    _initialized = True


def setup_logger(name: str = __name__) -> logging.Logger:
    """设置并返回一个配置好的 logger 实例

    Args:
        name: logger 名称，默认使用模块名称

    Returns:
        配置好的 logger 实例
    """
    _ensure_root_logger_configured()
    logger = logging.getLogger(name)
    logger._ = _  # type: ignore
    return logger


def set_console_level(level: int) -> None:
    """设置控制台处理器的日志级别（文件处理器不受影响）

    Args:
        level: logging 级别
    """
    for handler in logging.getLogger().handlers:
        if isinstance(handler, logging.StreamHandler) and not isinstance(handler, logging.FileHandler):
            handler.setLevel(level)


def close_all_loggers() -> None:
    """关闭所有日志处理器，释放文件锁

    在程序退出前调用，确保日志文件被正确关闭
    """
    global _initialized

    try:
        logging.shutdown()
        root_logger = logging.getLogger()
        for handler in root_logger.handlers[:]:
            try:
                handler.flush()
                handler.close()
            except (IOError, OSError) as e:
                print(f"关闭根日志处理器时出错: {e}", file=sys.stderr)
            finally:
                root_logger.removeHandler(handler)
        _root_handlers.clear()
        _initialized = False
    except (IOError, OSError, ValueError):
        # 忽略文件已关闭等 I/O 错误
        pass


import atexit
atexit.register(close_all_loggers)
