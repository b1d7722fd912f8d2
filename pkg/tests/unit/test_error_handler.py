"""错误处理器模块单元测试"""

from unittest.mock import Mock, patch

import pytest

from utils.error_handler import ErrorHandler, guard
from utils.exceptions import QuadratureError, SolverError


class TestErrorHandler:
    """测试 ErrorHandler 类"""

    def test_init_default(self):
        """测试默认初始化"""
        handler = ErrorHandler()
        assert handler.fail_strategy == 'log'
        assert handler.handled_errors == (Exception,)
        assert handler.on_failure is None

    def test_init_invalid_strategy(self):
        """测试无效的失败策略"""
        with pytest.raises(ValueError):
            ErrorHandler(fail_strategy='retry')

    def test_call_success(self):
        """测试成功调用直接返回结果"""
        handler = ErrorHandler()
        mock_func = Mock(return_value="success")
        assert handler.call(mock_func, 1, b=2) == "success"
        mock_func.assert_called_once_with(1, b=2)

    def test_log_strategy_returns_none(self):
        """测试 log 策略记录错误并返回 None"""
        handler = ErrorHandler(fail_strategy='log')
        mock_func = Mock(side_effect=SolverError("步长下溢"), __name__="solve")
        with patch('utils.error_handler.logger') as mock_logger:
            assert handler.call(mock_func) is None
        mock_logger.error.assert_called_once()

    def test_skip_strategy_logs_info(self):
        """测试 skip 策略只记录信息"""
        handler = ErrorHandler(fail_strategy='skip')
        mock_func = Mock(side_effect=QuadratureError("不收敛"), __name__="quad")
        with patch('utils.error_handler.logger') as mock_logger:
            handler.call(mock_func)
        mock_logger.info.assert_called_once()
        mock_logger.error.assert_not_called()

    def test_raise_strategy(self):
        """测试 raise 策略重新抛出异常"""
        handler = ErrorHandler(fail_strategy='raise')
        mock_func = Mock(side_effect=SolverError("失败"), __name__="solve")
        with pytest.raises(SolverError):
            handler.call(mock_func)

    def test_on_failure_callback(self):
        """测试失败回调的返回值作为调用结果"""
        handler = ErrorHandler(on_failure=lambda e: ("failed", str(e)))
        mock_func = Mock(side_effect=QuadratureError("误差过大"), __name__="quad")
        assert handler.call(mock_func) == ("failed", "误差过大")

    def test_unhandled_error_propagates(self):
        """测试不在处理范围内的异常直接传播"""
        handler = ErrorHandler(handled_errors=(SolverError,))
        mock_func = Mock(side_effect=KeyError("x"), __name__="lookup")
        with pytest.raises(KeyError):
            handler.call(mock_func)


class TestGuardDecorator:
    """测试 guard 装饰器"""

    def test_guard_decorator(self):
        """测试装饰器保护函数"""
        calls = []

        @guard(fail_strategy='skip', on_failure=lambda e: -1)
        def flaky(x):
            calls.append(x)
            raise SolverError("失败")

        assert flaky(3) == -1
        assert calls == [3]

    def test_guard_preserves_name(self):
        """测试装饰器保留函数名"""
        @guard()
        def check_something():
            return 1

        assert check_something.__name__ == "check_something"
        assert check_something() == 1
