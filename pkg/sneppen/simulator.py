"""蒙特卡洛模拟模块

N 个物种排成一个环，每一步找出适应度最小的位点 ν（并列时取最小下标），
把 ν−1、ν、ν+1（模 N）三个位点的适应度重新抽成独立的 [0,1] 均匀随机数。

- init / step: 单条链的参考实现
- Simulator: 向量化的多通道链，副本在工作线程中运行，
  每个副本使用 SeedSequence.spawn 派生的独立随机流，结果按副本顺序合并
- EmpiricalCDF / ks_distance / ks_test: 经验分布函数与 KS 检验
"""

import queue
import threading
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy import stats

from logger import setup_logger, _ as _t
from models.config import SimConfig
from utils.exceptions import SimulationError

logger = setup_logger(__name__)

_NEIGHBOURS = np.array([-1, 0, 1])


@dataclass
class SimState:
    """单条链的状态"""
    fitness: np.ndarray
    rng: np.random.Generator
    step_count: int = 0


def init(cfg: SimConfig, rng: Optional[np.random.Generator] = None) -> SimState:
    """用种子流生成独立均匀的初始适应度"""
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    return SimState(fitness=rng.random(cfg.n_species), rng=rng)


def step(state: SimState) -> SimState:
    """执行一步更新（原地修改并返回 state）"""
    n = state.fitness.shape[0]
    nu = int(np.argmin(state.fitness))
    state.fitness[(nu + _NEIGHBOURS) % n] = state.rng.random(3)
    state.step_count += 1
    return state


class EmpiricalCDF:
    """经验分布函数（右连续阶梯函数）"""

    def __init__(self, samples: np.ndarray):
        samples = np.asarray(samples, dtype=float).ravel()
        if samples.size == 0:
            raise SimulationError("经验分布至少需要一个样本")
        self.samples = np.sort(samples)
        self.samples.setflags(write=False)

    def __len__(self) -> int:
        return self.samples.size

    def __repr__(self) -> str:
        return f"EmpiricalCDF(n={len(self)}, mean={self.mean:.6f})"

    def __call__(self, x: Any) -> Any:
        out = np.searchsorted(self.samples, np.asarray(x, dtype=float), side="right") / len(self)
        return float(out) if np.ndim(x) == 0 else out

    @property
    def mean(self) -> float:
        return float(self.samples.mean())

    @property
    def std_error(self) -> float:
        """样本均值的标准误差（按独立样本计）"""
        if len(self) < 2:
            return float("nan")
        return float(self.samples.std(ddof=1) / np.sqrt(len(self)))

    def moment(self, r: int = 1) -> float:
        return float(np.mean(self.samples ** r))

    def histogram(self, bins: int = 50) -> Tuple[np.ndarray, np.ndarray]:
        """[0,1] 上的归一化直方图，返回 (边界, 密度)"""
        density, edges = np.histogram(self.samples, bins=bins, range=(0.0, 1.0), density=True)
        return edges, density

    def merged(self, other: "EmpiricalCDF") -> "EmpiricalCDF":
        return EmpiricalCDF(np.concatenate([self.samples, other.samples]))


def ks_distance(ecdf: EmpiricalCDF, cdf: Callable[[np.ndarray], Any]) -> float:
    """sup |ECDF − cdf|，在每个样本点比较左右两侧的取值

    cdf 在样本点左侧的值取 cdf(nextafter(x, −∞))，因此阶梯型参考分布也能得到精确结果。
    """
    xs = ecdf.samples
    n = len(ecdf)
    right = np.searchsorted(xs, xs, side="right") / n
    left = np.searchsorted(xs, xs, side="left") / n
    f_right = np.asarray(cdf(xs), dtype=float)
    f_left = np.asarray(cdf(np.nextafter(xs, -np.inf)), dtype=float)
    return float(max(np.max(np.abs(right - f_right)), np.max(np.abs(left - f_left))))


@dataclass
class KsResult:
    """KS 检验结果"""
    statistic: float
    pvalue: float
    critical: float
    n: int
    confidence: float

    @property
    def passed(self) -> bool:
        return self.statistic < self.critical

    def to_dict(self) -> Dict[str, Any]:
        return {
            "statistic": self.statistic,
            "pvalue": self.pvalue,
            "critical": self.critical,
            "n": self.n,
            "confidence": self.confidence,
            "passed": self.passed,
        }


def ks_critical(n: int, confidence: float = 0.99) -> float:
    """单样本 KS 统计量在给定置信度下的临界值"""
    return float(stats.kstwo.ppf(confidence, n))


def ks_test(ecdf: EmpiricalCDF, cdf: Callable[[np.ndarray], Any],
            confidence: float = 0.99) -> KsResult:
    """单样本 KS 检验，p 值来自 scipy.stats.kstest"""
    statistic = ks_distance(ecdf, cdf)
    pvalue = float(stats.kstest(ecdf.samples, cdf).pvalue)
    return KsResult(statistic=statistic, pvalue=pvalue,
                    critical=ks_critical(len(ecdf), confidence),
                    n=len(ecdf), confidence=confidence)


class _Lanes:
    """同一副本内并行推进的 L 条独立链"""

    def __init__(self, n_lanes: int, n_species: int, rng: np.random.Generator):
        self.rng = rng
        self.fitness = rng.random((n_lanes, n_species))
        self._rows = np.arange(n_lanes)[:, None]
        self.steps = 0

    def advance(self, n_steps: int) -> None:
        n = self.fitness.shape[1]
        for _ in range(n_steps):
            nu = np.argmin(self.fitness, axis=1)
            cols = (nu[:, None] + _NEIGHBOURS) % n
            self.fitness[self._rows, cols] = self.rng.random(cols.shape)
        self.steps += n_steps


def _split(total: int, parts: int) -> List[int]:
    base, extra = divmod(total, parts)
    return [base + (1 if r < extra else 0) for r in range(parts)]


class Simulator:
    """多副本蒙特卡洛模拟器

    副本 r 使用 SeedSequence(seed).spawn(n_replicas)[r]，结果只取决于 (seed, cfg)，
    与工作线程数和完成顺序无关。

    Args:
        cfg: 模拟参数
        stop_event: 停止信号，设置后尚未开始的副本不再运行
    """

    def __init__(self, cfg: Optional[SimConfig] = None,
                 stop_event: Optional[threading.Event] = None):
        self.cfg = cfg or SimConfig()
        self.stop_event = stop_event
        self.seeds = np.random.SeedSequence(self.cfg.seed).spawn(self.cfg.n_replicas)

    def _rng(self, replica: int) -> np.random.Generator:
        return np.random.default_rng(self.seeds[replica])

    def _steady_replica(self, replica: int, target: int) -> np.ndarray:
        cfg = self.cfg
        lanes = _Lanes(cfg.lanes, cfg.n_species, self._rng(replica))
        lanes.advance(cfg.burn_in)
        chunks = []
        collected = 0
        while collected < target:
            lanes.advance(cfg.thinning)
            record = lanes.fitness.ravel() if cfg.pool_sites else lanes.fitness[:, 0]
            chunks.append(record.copy())
            collected += record.size
        return np.concatenate(chunks)[:target] if chunks else np.empty(0)

    def _kstep_replica(self, replica: int, target: int, k: int) -> np.ndarray:
        cfg = self.cfg
        rng = self._rng(replica)
        chunks = []
        collected = 0
        batch = max(cfg.lanes, 1 << 16)
        while collected < target:
            width = min(batch, target - collected)
            lanes = _Lanes(width, cfg.n_species, rng)
            lanes.advance(k)
            chunks.append(lanes.fitness[:, 0].copy())
            collected += width
        return np.concatenate(chunks) if chunks else np.empty(0)

    def _run(self, job: Callable[[int, int], np.ndarray], label: str) -> EmpiricalCDF:
        cfg = self.cfg
        targets = _split(cfg.n_samples, cfg.n_replicas)
        results: List[Optional[np.ndarray]] = [None] * cfg.n_replicas
        errors: List[BaseException] = []
        lock = threading.Lock()
        tasks: "queue.Queue[int]" = queue.Queue()
        for replica in range(cfg.n_replicas):
            tasks.put(replica)

        def worker() -> None:
            while True:
                if self.stop_event and self.stop_event.is_set():
                    logger.info(_t("模拟线程收到停止信号，正在退出..."))
                    return
                try:
                    replica = tasks.get_nowait()
                except queue.Empty:
                    return
                try:
                    samples = job(replica, targets[replica])
                    with lock:
                        results[replica] = samples
                    logger.debug(_t("副本完成") + f": {label} #{replica}, n={samples.size}")
                except Exception as e:
                    with lock:
                        errors.append(e)
                finally:
                    tasks.task_done()

        n_workers = min(cfg.workers, cfg.n_replicas)
        workers = [threading.Thread(target=worker, name=f"SimWorker-{i}", daemon=True)
                   for i in range(n_workers)]
        for w in workers:
            w.start()
        for w in workers:
            w.join()

        if errors:
            raise SimulationError(f"{label} 模拟失败: {errors[0]}") from errors[0]
        if any(r is None for r in results):
            raise SimulationError(f"{label} 模拟被中止")
        ecdf = EmpiricalCDF(np.concatenate(results))
        logger.info(_t("模拟完成") + f": {label}, n={len(ecdf)}, mean={ecdf.mean:.6f}")
        return ecdf

    def run_steady(self) -> EmpiricalCDF:
        """预热 burn_in 步后每隔 thinning 步记录一次，直到凑满 n_samples 个样本"""
        return self._run(self._steady_replica, f"steady N={self.cfg.n_species}")

    def run_kstep(self, k: int) -> EmpiricalCDF:
        """n_samples 条独立链各从均匀初值运行 k 步，记录位点 0"""
        if k < 0:
            raise SimulationError(f"步数不能为负: {k}")
        return self._run(lambda r, t: self._kstep_replica(r, t, k), f"k={k}")


def run_steady(cfg: Optional[SimConfig] = None) -> EmpiricalCDF:
    return Simulator(cfg).run_steady()


def run_kstep(cfg: Optional[SimConfig] = None, k: int = 0) -> EmpiricalCDF:
    return Simulator(cfg).run_kstep(k)
