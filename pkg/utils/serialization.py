"""序列化模块

提供结果文件的读写功能：
- 有理数与 "p/q" 字符串互转（无损）
- CSV 表格与曲线写出
- JSON 报告写出
- 运行清单（版本、配置、种子、输出文件 SHA-256）
"""

import csv
import hashlib
import io
import json
import os
import platform
import re
import sys
from datetime import datetime, timezone
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, TextIO, Union

from logger import setup_logger, _ as _t
from utils.exceptions import SerializationError

logger = setup_logger(__name__)

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")


def format_rational(value: Fraction) -> str:
    """把有理数格式化为 "p/q" 字符串，整数省略分母"""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_rational(text: Union[str, int]) -> Fraction:
    """解析 "p/q" 或整数字符串

    Args:
        text: 待解析的字符串

    Returns:
        Fraction: 最简分数

    Raises:
        SerializationError: 格式错误或分母为零
    """
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str):
        raise SerializationError(f"有理数必须是字符串: {text!r}")
    match = _RATIONAL_RE.match(text)
    if not match:
        raise SerializationError(f"无法解析有理数: {text!r}")
    numerator = int(match.group(1))
    denominator = int(match.group(2)) if match.group(2) is not None else 1
    if denominator == 0:
        raise SerializationError(f"分母不能为零: {text!r}")
    return Fraction(numerator, denominator)


def _to_jsonable(obj: Any) -> Any:
    """把 Fraction、numpy 标量等转换为 JSON 可序列化对象"""
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, Mapping):
        return {str(k): _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if hasattr(obj, "item"):
        return obj.item()
    return obj


def dumps_json(obj: Any) -> str:
    return json.dumps(_to_jsonable(obj), indent=2, ensure_ascii=False)


def _open_target(path: Optional[str]) -> Any:
    if path is None or path == "-":
        return None
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    return open(path, "w", encoding="utf-8", newline="")


def write_json(obj: Any, path: Optional[str], stream: Optional[TextIO] = None) -> Optional[str]:
    """写出 JSON

    Args:
        obj: 要写出的对象
        path: 文件路径；None 或 "-" 表示写到 stream（默认 stdout）
        stream: 备用输出流

    Returns:
        实际写入的文件路径，写到流时返回 None

    Raises:
        SerializationError: 写入失败
    """
    text = dumps_json(obj)
    try:
        f = _open_target(path)
        if f is None:
            (stream or sys.stdout).write(text + "\n")
            return None
        with f:
            f.write(text + "\n")
    except (IOError, OSError) as e:
        raise SerializationError(f"写入 JSON 失败 {path}: {e}")
    logger.debug(_t("已写入 JSON") + f": {path}")
    return path


def write_csv(header: Sequence[str], rows: Iterable[Sequence[Any]], path: Optional[str],
              stream: Optional[TextIO] = None) -> Optional[str]:
    """写出 CSV

    Fraction 单元格写成 "p/q"，浮点数使用 repr 保留全部有效位。

    Args:
        header: 表头
        rows: 数据行
        path: 文件路径；None 或 "-" 表示写到 stream（默认 stdout）
        stream: 备用输出流

    Returns:
        实际写入的文件路径，写到流时返回 None
    """
    def cell(value: Any) -> Any:
        if isinstance(value, Fraction):
            return format_rational(value)
        if isinstance(value, bool):
            return "true" if value else "false"
        if hasattr(value, "item"):
            return cell(value.item())
        if isinstance(value, float):
            return repr(value)
        return value

    try:
        f = _open_target(path)
        target = f if f is not None else (stream or sys.stdout)
        writer = csv.writer(target, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([cell(v) for v in row])
        if f is not None:
            f.close()
    except (IOError, OSError) as e:
        raise SerializationError(f"写入 CSV 失败 {path}: {e}")
    if path not in (None, "-"):
        logger.debug(_t("已写入 CSV") + f": {path}")
    return None if path in (None, "-") else path


def read_csv(source: Union[str, TextIO]) -> List[Dict[str, str]]:
    """读取带表头的 CSV

    Args:
        source: 文件路径或文本流

    Returns:
        list: 每行一个字典

    Raises:
        SerializationError: 读取失败
    """
    try:
        if isinstance(source, str):
            with open(source, "r", encoding="utf-8", newline="") as f:
                return list(csv.DictReader(f))
        return list(csv.DictReader(source))
    except (IOError, OSError, csv.Error) as e:
        raise SerializationError(f"读取 CSV 失败: {e}")


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    write_csv(header, rows, None, stream=buffer)
    return buffer.getvalue()


def sha256_file(path: str) -> str:
    """计算文件的 SHA-256 摘要"""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _library_versions() -> Dict[str, Optional[str]]:
    versions: Dict[str, Optional[str]] = {"python": platform.python_version()}
    for name in ("numpy", "scipy", "yaml"):
        module = sys.modules.get(name)
        versions[name] = getattr(module, "__version__", None) if module else None
    return versions


def build_manifest(command: str, argv: Sequence[str], config: Mapping[str, Any],
                   outputs: Sequence[str], seeds: Optional[Mapping[str, Any]] = None,
                   results: Optional[Mapping[str, Any]] = None,
                   version: str = "0.1.0") -> Dict[str, Any]:
    """构造运行清单

    Args:
        command: 子命令名称
        argv: 命令行参数
        config: 生效配置
        outputs: 输出文件路径（不存在的文件会被忽略）
        seeds: 使用的随机种子
        results: 命令相关的结果摘要
        version: 软件包版本

    Returns:
        dict: 清单内容
    """
    files = []
    for path in outputs:
        if path and os.path.isfile(path):
            files.append({"path": path, "sha256": sha256_file(path), "bytes": os.path.getsize(path)})
    return {
        "package": "bsfive",
        "version": version,
        "command": command,
        "argv": list(argv),
        "created_utc": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
        "versions": _library_versions(),
        "seeds": dict(seeds or {}),
        "config": config,
        "outputs": files,
        "results": dict(results or {}),
    }


def manifest_path_for(out: Optional[str], out_dir: str) -> str:
    """清单文件路径：<out>.manifest.json，写到 stdout 时为 <out_dir>/manifest.json"""
    if out and out != "-":
        return f"{out}.manifest.json"
    return os.path.join(out_dir, "manifest.json")
