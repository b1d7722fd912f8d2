"""错误处理模块

提供统一的失败处理策略：
- 包装单个操作（例如一项验证检查），捕获其异常
- 可配置失败策略：log（记录）、skip（跳过）、raise（抛出）
- 可选的失败回调，把异常转换为调用方需要的返回值
"""

from functools import wraps
from typing import Any, Callable, Optional, Tuple, Type, TypeVar

from logger import setup_logger, _ as _t

F = TypeVar('F', bound=Callable[..., Any])

# 获取 logger 实例
logger = setup_logger(__name__)

FAIL_STRATEGIES = ('log', 'skip', 'raise')


class ErrorHandler:
    """错误处理器，按失败策略处理被包装操作抛出的异常"""

    def __init__(
        self,
        fail_strategy: str = 'log',
        handled_errors: Tuple[Type[BaseException], ...] = (Exception,),
        on_failure: Optional[Callable[[Exception], Any]] = None
    ) -> None:
        """初始化错误处理器

        Args:
            fail_strategy: 失败策略，可选值：'log'（记录错误）, 'skip'（跳过）, 'raise'（抛出异常）
            handled_errors: 需要处理的异常类型，其他异常直接向上传播
            on_failure: 失败回调，返回值作为被包装函数的返回值
        """
        if fail_strategy not in FAIL_STRATEGIES:
            raise ValueError(f"fail_strategy 必须是 {FAIL_STRATEGIES} 之一: {fail_strategy}")
        self.fail_strategy: str = fail_strategy
        self.handled_errors: Tuple[Type[BaseException], ...] = handled_errors
        self.on_failure: Optional[Callable[[Exception], Any]] = on_failure

    def guard(self, func: F) -> F:
        """保护装饰器

        Args:
            func: 要装饰的函数

        Returns:
            装饰后的函数
        """
        @wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            try:
                return func(*args, **kwargs)
            except self.handled_errors as e:  # type: ignore[misc]
                return self._handle_failure(e, getattr(func, '__name__', repr(func)))
        return wrapper  # type: ignore[return-value]

    def call(self, func: Callable[..., Any], *args: Any, **kwargs: Any) -> Any:
        """以保护方式调用一次函数

        Args:
            func: 要调用的函数
            *args: 函数参数
            **kwargs: 函数关键字参数

        Returns:
            函数返回值，失败时为失败回调的返回值或 None
        """
        return self.guard(func)(*args, **kwargs)

    def _handle_failure(self, error: Exception, name: str) -> Any:
        """处理失败

        Args:
            error: 异常对象
            name: 操作名称

        Returns:
            失败时的返回值
        """
        if self.fail_strategy == 'raise':
            raise error
        if self.fail_strategy == 'skip':
            logger.info(_t("跳过失败的操作") + f" {name}: {error}")
        else:  # 'log'
            logger.error(_t("操作失败") + f" {name}: {type(error).__name__}: {error}")
        if self.on_failure is not None:
            return self.on_failure(error)
        return None


# 创建默认错误处理器实例
default_error_handler = ErrorHandler()


def guard(
    fail_strategy: str = 'log',
    handled_errors: Tuple[Type[BaseException], ...] = (Exception,),
    on_failure: Optional[Callable[[Exception], Any]] = None
) -> Callable[[F], F]:
    """便捷的保护装饰器

    Args:
        fail_strategy: 失败策略
        handled_errors: 需要处理的异常类型
        on_failure: 失败回调

    Returns:
        装饰器函数
    """
    def decorator(func: F) -> F:
        handler = ErrorHandler(
            fail_strategy=fail_strategy,
            handled_errors=handled_errors,
            on_failure=on_failure
        )
        return handler.guard(func)
    return decorator
