"""验证报告模型

定义验证报告相关的数据模型：
- CheckStatus: 检查状态枚举
- CheckRecord: 单项检查记录
- ValidationReport: 完整验证报告
"""

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional


class CheckStatus(Enum):
    """检查状态枚举"""
    PENDING = "pending"    # 待运行
    RUNNING = "running"    # 运行中
    PASS = "pass"          # 通过
    FAIL = "fail"          # 未通过
    ERROR = "error"        # 运行时异常
    SKIPPED = "skipped"    # 已跳过
    INFO = "info"          # 仅报告，不参与判定


@dataclass
class CheckRecord:
    """单项检查记录

    measured 与 tolerance 通常是浮点数；精确检查中 measured 可以是违规条目数。
    """
    name: str                                   # 检查名称
    tolerance: Optional[float] = None           # 容差
    measured: Optional[float] = None            # 实测值
    status: CheckStatus = field(default=CheckStatus.PENDING)
    detail: Dict[str, Any] = field(default_factory=dict)  # 附加信息
    error: Optional[str] = None                 # 错误信息
    started_at: Optional[float] = None
    completed_at: Optional[float] = None

    def start(self) -> None:
        """标记检查开始"""
        self.status = CheckStatus.RUNNING
        self.started_at = time.perf_counter()

    def finish(self, passed: bool, measured: Optional[float] = None, **detail: Any) -> None:
        """标记检查结束

        Args:
            passed: 是否通过
            measured: 实测值
            **detail: 附加信息
        """
        self.status = CheckStatus.PASS if passed else CheckStatus.FAIL
        if measured is not None:
            self.measured = float(measured)
        self.detail.update(detail)
        self.completed_at = time.perf_counter()

    def inform(self, measured: Optional[float] = None, **detail: Any) -> None:
        """标记为仅报告"""
        self.status = CheckStatus.INFO
        if measured is not None:
            self.measured = float(measured)
        self.detail.update(detail)
        self.completed_at = time.perf_counter()

    def fail(self, error: str) -> None:
        """标记检查因异常失败

        Args:
            error: 错误信息
        """
        self.status = CheckStatus.ERROR
        self.error = error
        self.completed_at = time.perf_counter()

    def skip(self, reason: str = "") -> None:
        """标记检查跳过"""
        self.status = CheckStatus.SKIPPED
        if reason:
            self.detail["reason"] = reason
        self.completed_at = time.perf_counter()

    @property
    def runtime(self) -> Optional[float]:
        """获取检查耗时（秒）

        Returns:
            float: 耗时，如果检查未完成返回 None
        """
        if self.started_at is not None and self.completed_at is not None:
            return self.completed_at - self.started_at
        return None

    @property
    def failed(self) -> bool:
        return self.status in (CheckStatus.FAIL, CheckStatus.ERROR)

    def to_dict(self) -> Dict[str, Any]:
        """转换为字典

        Returns:
            dict: 检查记录的字典表示
        """
        return {
            "name": self.name,
            "status": self.status.value,
            "measured": self.measured,
            "tolerance": self.tolerance,
            "runtime": self.runtime,
            "error": self.error,
            "detail": self.detail,
        }


@dataclass
class ValidationReport:
    """验证报告

    每个检查名称只出现一次。
    """
    level: str = "quick"
    records: List[CheckRecord] = field(default_factory=list)
    started_at: float = field(default_factory=time.time)
    finished_at: Optional[float] = None

    def add(self, record: CheckRecord) -> CheckRecord:
        """添加检查记录

        Args:
            record: 检查记录

        Returns:
            添加的记录

        Raises:
            ValueError: 名称重复
        """
        if any(r.name == record.name for r in self.records):
            raise ValueError(f"重复的检查名称: {record.name}")
        self.records.append(record)
        return record

    def get(self, name: str) -> Optional[CheckRecord]:
        for record in self.records:
            if record.name == name:
                return record
        return None

    def finish(self) -> None:
        """标记报告结束"""
        self.finished_at = time.time()

    @property
    def passed(self) -> bool:
        """是否没有失败或出错的检查"""
        return not any(r.failed for r in self.records)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def counts(self) -> Dict[str, int]:
        """按状态统计检查数量

        Returns:
            dict: 状态 -> 数量
        """
        result = {status.value: 0 for status in CheckStatus}
        for record in self.records:
            result[record.status.value] += 1
        return result

    def summary_lines(self) -> List[str]:
        """生成控制台摘要

        Returns:
            list: 每项检查一行
        """
        lines = []
        for r in self.records:
            measured = "-" if r.measured is None else f"{r.measured:.3e}"
            tol = "-" if r.tolerance is None else f"{r.tolerance:.1e}"
            runtime = "-" if r.runtime is None else f"{r.runtime:.2f}s"
            lines.append(f"[{r.status.value.upper():7s}] {r.name:40s} {measured:>11s} "
                         f"tol={tol:>8s} {runtime:>8s}")
            if r.error:
                lines.append(f"          {r.error}")
            elif r.detail.get("note"):
                lines.append(f"          {r.detail['note']}")
        counts = self.counts()
        lines.append(
            f"pass={counts['pass']} fail={counts['fail']} error={counts['error']} "
            f"info={counts['info']} skipped={counts['skipped']}"
        )
        return lines

    def to_dict(self) -> Dict[str, Any]:
        """转换为字典

        Returns:
            dict: 报告的字典表示
        """
        return {
            "level": self.level,
            "passed": self.passed,
            "counts": self.counts(),
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "checks": [r.to_dict() for r in self.records],
        }
