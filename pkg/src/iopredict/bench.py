"""Read benchmarks (sequential, random, concurrent) and a synthetic
training-pipeline benchmark.

Each benchmark cell runs one warmup iteration and ``repeats`` measured
iterations and reports the iteration with the median elapsed time. Time is
read through an injectable clock returning integer nanoseconds; the clock is
only ever read from the coordinating thread, so a fake clock makes every
record reproducible.
"""

from __future__ import annotations

import logging
import math
import os
import shutil
import tempfile
import threading
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .dataset import FEATURES, Observation

log = logging.getLogger(__name__)

MIB = 1 << 20
KIB = 1 << 10

PATTERNS = ("sequential", "random", "concurrent")
TARGET_KINDS = ("local_disk", "memory_fs", "other_mounted")

DEFAULT_BLOCK_KB = (4, 64, 1024, 4096)
DEFAULT_FILE_SIZE_MB = (10, 100, 1024)
DEFAULT_N_SAMPLES = (1_000, 10_000, 100_000)
DEFAULT_N_THREADS = (1, 2, 4, 8)
DEFAULT_BATCH_SIZES = (16, 32, 64, 128)
DEFAULT_NUM_WORKERS = (0, 1, 2, 3, 4)

_WRITE_CHUNK = 4 * MIB

Clock = Callable[[], int]


monotonic_clock: Clock = time.perf_counter_ns


class FakeClock:
    """Deterministic clock that advances ``step_ns`` on every reading."""

    def __init__(self, step_ns: int = 1_000, start_ns: int = 0):
        if step_ns <= 0:
            raise ValueError("step_ns must be positive")
        self.step_ns = step_ns
        self.now = start_ns
        self.calls = 0
        self._lock = threading.Lock()

    def __call__(self) -> int:
        with self._lock:
            self.now += self.step_ns
            self.calls += 1
            return self.now


class BenchError(RuntimeError):
    pass


@dataclass(frozen=True)
class StorageTarget:
    name: str
    root_path: Path
    kind: str = "other_mounted"

    def __post_init__(self):
        object.__setattr__(self, "root_path", Path(self.root_path))
        if self.kind not in TARGET_KINDS:
            raise ValueError(f"unknown target kind {self.kind!r}; expected one of {TARGET_KINDS}")

    def validate(self) -> None:
        if not self.root_path.is_dir():
            raise BenchError(f"target {self.name}: {self.root_path} does not exist or is not a directory")
        if not os.access(self.root_path, os.W_OK | os.X_OK):
            raise BenchError(f"target {self.name}: {self.root_path} is not writable")


def default_target() -> StorageTarget:
    """Target from ``IOMETER_TARGET_ROOT``, falling back to /dev/shm or the temp dir."""
    env = os.environ.get("IOMETER_TARGET_ROOT")
    if env:
        root = Path(env)
    elif Path("/dev/shm").is_dir():
        root = Path("/dev/shm") / "iopredict"
    else:
        root = Path(tempfile.gettempdir()) / "iopredict"
    root.mkdir(parents=True, exist_ok=True)
    kind = "memory_fs" if str(root.resolve()).startswith("/dev/shm") else "other_mounted"
    return StorageTarget("default", root, kind)


def _positive(name: str, v) -> None:
    if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v <= 0:
        raise ValueError(f"{name} must be a positive integer, got {v!r}")


@dataclass(frozen=True)
class BenchConfig:
    target: StorageTarget
    pattern: str
    block_kb: int
    file_size_mb: int
    n_samples: int | None = None
    n_threads: int | None = None
    seed: int = 0
    warmup: int = 1
    repeats: int = 3

    def __post_init__(self):
        if self.pattern not in PATTERNS:
            raise ValueError(f"unknown pattern {self.pattern!r}; expected one of {PATTERNS}")
        _positive("block_kb", self.block_kb)
        _positive("file_size_mb", self.file_size_mb)
        _positive("repeats", self.repeats)
        if self.warmup < 0:
            raise ValueError("warmup must be non-negative")
        if self.pattern == "random":
            _positive("n_samples", self.n_samples)
        if self.pattern == "concurrent":
            _positive("n_threads", self.n_threads)
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def block_bytes(self) -> int:
        return self.block_kb * KIB

    @property
    def file_bytes(self) -> int:
        return self.file_size_mb * MIB


@dataclass(frozen=True)
class PipelineBenchConfig:
    target: StorageTarget
    batch_size: int
    num_workers: int
    n_batches: int
    sample_bytes: int = 3072
    synthetic_compute_ms_per_batch: float = 1.0
    seed: int = 0
    pool_samples: int | None = None
    warmup: int = 1
    repeats: int = 3

    def __post_init__(self):
        _positive("batch_size", self.batch_size)
        _positive("n_batches", self.n_batches)
        _positive("sample_bytes", self.sample_bytes)
        _positive("repeats", self.repeats)
        if self.num_workers < 0:
            raise ValueError("num_workers must be non-negative")
        if self.synthetic_compute_ms_per_batch < 0:
            raise ValueError("synthetic_compute_ms_per_batch must be non-negative")
        if self.pool_samples is not None:
            _positive("pool_samples", self.pool_samples)
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def pool(self) -> int:
        return self.pool_samples or min(self.n_batches * self.batch_size, 8192)


@dataclass(frozen=True)
class BenchRecord:
    benchmark_type: str
    target_throughput_mb_s: float
    elapsed_s: float
    bytes_read: int
    target_name: str
    timestamp: str
    cache_state: str
    seed: int
    block_kb: float | None = None
    file_size_mb: float | None = None
    n_samples: float | None = None
    throughput_mb_s: float | None = None
    iops: float | None = None
    n_threads: float | None = None
    batch_size: float | None = None
    samples_per_second: float | None = None
    data_loading_ratio: float | None = None
    num_workers: float | None = None
    aggregate_throughput_mb_s: float | None = None
    simulated_gpu_utilization: float | None = None
    reads: int = 0

    def __post_init__(self):
        if not self.elapsed_s > 0:
            raise ValueError("elapsed_s must be positive")
        if self.target_throughput_mb_s < 0:
            raise ValueError("throughput must be non-negative")
        for name in ("data_loading_ratio", "simulated_gpu_utilization"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    @property
    def source_tag(self) -> str:
        return f"{self.target_name}/{self.benchmark_type}/{self.cache_state}"

    def to_observation(self) -> Observation:
        values = {f: getattr(self, f) for f in FEATURES}
        return Observation.from_mapping(self.benchmark_type, values, self.target_throughput_mb_s,
                                        self.source_tag)

    def to_json_dict(self) -> dict:
        return asdict(self)


# -- fixtures --------------------------------------------------------------

def fixture_file_path(target: StorageTarget, size_mb: int, seed: int) -> Path:
    return target.root_path / f"iopredict_{size_mb}mb_s{seed}.bin"


def _write_random_file(path: Path, nbytes: int, seed: int) -> Path:
    free = shutil.disk_usage(path.parent).free
    if free < nbytes:
        raise BenchError(f"insufficient space on {path.parent}: need {nbytes} bytes, {free} free")
    rng = np.random.Generator(np.random.PCG64(seed))
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            remaining = nbytes
            while remaining:
                n = min(_WRITE_CHUNK, remaining)
                fh.write(rng.bytes(n))
                remaining -= n
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException as exc:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        if isinstance(exc, OSError):
            raise BenchError(f"failed writing {path}: {exc}") from exc
        raise
    return path


def generate_test_file(target: StorageTarget, size_mb: int, seed: int, *, reuse: bool = True) -> Path:
    """Create ``size_mb`` MiB of seed-deterministic random bytes on ``target``.

    An existing file of the right size is reused when ``reuse`` is set; the
    content of a (size, seed) pair never changes so reuse is safe.
    """
    if not isinstance(size_mb, (int, np.integer)) or size_mb < 1:
        raise ValueError(f"size_mb must be an integer >= 1, got {size_mb!r}")
    target.validate()
    path = fixture_file_path(target, int(size_mb), seed)
    nbytes = int(size_mb) * MIB
    if reuse and path.is_file() and path.stat().st_size == nbytes:
        return path
    return _write_random_file(path, nbytes, seed)


def pipeline_fixture_path(target: StorageTarget, sample_bytes: int, pool: int, seed: int) -> Path:
    return target.root_path / f"iopredict_samples_{sample_bytes}b_x{pool}_s{seed}.bin"


def generate_pipeline_fixture(cfg: PipelineBenchConfig) -> Path:
    cfg.target.validate()
    path = pipeline_fixture_path(cfg.target, cfg.sample_bytes, cfg.pool, cfg.seed)
    nbytes = cfg.sample_bytes * cfg.pool
    if path.is_file() and path.stat().st_size == nbytes:
        return path
    return _write_random_file(path, nbytes, cfg.seed)


# -- access plans ----------------------------------------------------------

def sequential_offsets(file_bytes: int, block_bytes: int) -> list[tuple[int, int]]:
    """(offset, length) pairs covering the file; the last block is clamped."""
    return [(off, min(block_bytes, file_bytes - off)) for off in range(0, file_bytes, block_bytes)]


def random_offsets(file_bytes: int, block_bytes: int, n_samples: int, seed: int) -> np.ndarray:
    """Block-aligned uniform offsets such that every read stays inside the file."""
    if n_samples <= 0:
        raise BenchError("n_samples must be positive")
    n_blocks = file_bytes // block_bytes
    if n_blocks < 1:
        raise BenchError(f"file of {file_bytes} bytes is smaller than one {block_bytes}-byte block")
    rng = np.random.default_rng(seed)
    return rng.integers(0, n_blocks, size=n_samples, dtype=np.int64) * block_bytes


def partition_regions(file_bytes: int, n_threads: int, block_bytes: int) -> list[tuple[int, int]]:
    """Split the file into ``n_threads`` disjoint contiguous [start, end) regions.

    Boundaries fall on block multiples; earlier regions take the remainder.
    """
    if n_threads <= 0:
        raise BenchError("n_threads must be positive")
    n_blocks = math.ceil(file_bytes / block_bytes)
    if n_blocks < n_threads:
        raise BenchError(f"cannot split {n_blocks} block(s) across {n_threads} threads")
    base, rem = divmod(n_blocks, n_threads)
    regions = []
    start_block = 0
    for i in range(n_threads):
        end_block = start_block + base + (1 if i < rem else 0)
        regions.append((start_block * block_bytes, min(end_block * block_bytes, file_bytes)))
        start_block = end_block
    return regions


def pipeline_plan(pool: int, batch_size: int, n_batches: int, seed: int) -> np.ndarray:
    """Sample indices per batch, shape (n_batches, batch_size): shuffled epochs over the pool."""
    rng = np.random.default_rng(seed)
    need = batch_size * n_batches
    parts = []
    have = 0
    while have < need:
        parts.append(rng.permutation(pool))
        have += pool
    return np.concatenate(parts)[:need].reshape(n_batches, batch_size)


# -- readers ---------------------------------------------------------------

def _pread_into(fd: int, buf: memoryview, nbytes: int, offset: int) -> int:
    view = buf[:nbytes]
    if hasattr(os, "preadv"):
        return os.preadv(fd, [view], offset)
    data = os.pread(fd, nbytes, offset)
    view[: len(data)] = data
    return len(data)


def _read_plan(fd: int, plan: Iterable[tuple[int, int]], max_len: int,
               trace: list | None = None) -> tuple[int, int]:
    buf = memoryview(bytearray(max_len))
    total = reads = 0
    for off, length in plan:
        n = _pread_into(fd, buf, length, off)
        if n != length:
            raise BenchError(f"short read at offset {off}: wanted {length} bytes, got {n}")
        total += n
        reads += 1
        if trace is not None:
            trace.append((off, length))
    return total, reads


def _drop_cache(fd: int, target: StorageTarget) -> str:
    if target.kind == "memory_fs":
        return "memory"
    advise = getattr(os, "posix_fadvise", None)
    if advise is None:
        return "warm"
    try:
        advise(fd, 0, 0, os.POSIX_FADV_DONTNEED)
    except OSError:
        return "warm"
    return "dropped"


def _check_file(path: Path, expected: int) -> None:
    if not path.is_file():
        raise BenchError(f"test file {path} is missing (expected {expected} bytes)")
    size = path.stat().st_size
    if size < expected:
        raise BenchError(f"test file {path} holds {size} bytes, expected {expected} bytes")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class _Iteration:
    elapsed_ns: int
    nbytes: int
    reads: int
    cache_state: str
    extra: dict = field(default_factory=dict)


def _measure(run_once: Callable[[bool], _Iteration], warmup: int, repeats: int) -> _Iteration:
    for _ in range(warmup):
        run_once(False)
    runs = [run_once(i == repeats - 1) for i in range(repeats)]
    runs.sort(key=lambda it: it.elapsed_ns)
    chosen = runs[(len(runs) - 1) // 2]
    chosen.elapsed_ns = max(chosen.elapsed_ns, 1)
    return chosen


def _open(path: Path) -> int:
    return os.open(path, os.O_RDONLY)


def run_sequential_read(cfg: BenchConfig, clock: Clock = monotonic_clock,
                        trace: list | None = None) -> BenchRecord:
    """Scan the test file start to end in ``block_kb`` chunks.

    ``trace`` receives the (offset, length) reads of the last measured iteration.
    """
    if cfg.pattern != "sequential":
        raise BenchError(f"expected a sequential config, got {cfg.pattern}")
    path = fixture_file_path(cfg.target, cfg.file_size_mb, cfg.seed)
    _check_file(path, cfg.file_bytes)
    plan = sequential_offsets(cfg.file_bytes, cfg.block_bytes)
    max_len = min(cfg.block_bytes, cfg.file_bytes)

    def once(record: bool) -> _Iteration:
        fd = _open(path)
        try:
            cache = _drop_cache(fd, cfg.target)
            if record and trace is not None:
                trace.clear()
            t0 = clock()
            nbytes, reads = _read_plan(fd, plan, max_len, trace if record else None)
            t1 = clock()
        finally:
            os.close(fd)
        return _Iteration(t1 - t0, nbytes, reads, cache)

    it = _measure(once, cfg.warmup, cfg.repeats)
    elapsed = it.elapsed_ns / 1e9
    tput = it.nbytes / elapsed / MIB
    return BenchRecord(
        benchmark_type="seq_read", target_throughput_mb_s=tput, elapsed_s=elapsed,
        bytes_read=it.nbytes, target_name=cfg.target.name, timestamp=_now(),
        cache_state=it.cache_state, seed=cfg.seed, block_kb=cfg.block_kb,
        file_size_mb=cfg.file_size_mb, throughput_mb_s=tput, iops=it.reads / elapsed,
        reads=it.reads,
    )


def run_random_read(cfg: BenchConfig, clock: Clock = monotonic_clock,
                    trace: list | None = None) -> BenchRecord:
    if cfg.pattern != "random":
        raise BenchError(f"expected a random config, got {cfg.pattern}")
    path = fixture_file_path(cfg.target, cfg.file_size_mb, cfg.seed)
    _check_file(path, cfg.file_bytes)
    offsets = random_offsets(cfg.file_bytes, cfg.block_bytes, cfg.n_samples, cfg.seed)
    plan = [(int(o), cfg.block_bytes) for o in offsets]

    def once(record: bool) -> _Iteration:
        fd = _open(path)
        try:
            cache = _drop_cache(fd, cfg.target)
            if record and trace is not None:
                trace.clear()
            t0 = clock()
            nbytes, reads = _read_plan(fd, plan, cfg.block_bytes, trace if record else None)
            t1 = clock()
        finally:
            os.close(fd)
        return _Iteration(t1 - t0, nbytes, reads, cache)

    it = _measure(once, cfg.warmup, cfg.repeats)
    elapsed = it.elapsed_ns / 1e9
    tput = it.nbytes / elapsed / MIB
    return BenchRecord(
        benchmark_type="random_read", target_throughput_mb_s=tput, elapsed_s=elapsed,
        bytes_read=it.nbytes, target_name=cfg.target.name, timestamp=_now(),
        cache_state=it.cache_state, seed=cfg.seed, block_kb=cfg.block_kb,
        file_size_mb=cfg.file_size_mb, n_samples=cfg.n_samples, throughput_mb_s=tput,
        iops=cfg.n_samples / elapsed, reads=it.reads,
    )


def run_concurrent_read(cfg: BenchConfig, clock: Clock = monotonic_clock,
                        trace: list | None = None) -> BenchRecord:
    """``n_threads`` workers each scan one disjoint region; throughput is aggregate over wall time."""
    if cfg.pattern != "concurrent":
        raise BenchError(f"expected a concurrent config, got {cfg.pattern}")
    path = fixture_file_path(cfg.target, cfg.file_size_mb, cfg.seed)
    _check_file(path, cfg.file_bytes)
    regions = partition_regions(cfg.file_bytes, cfg.n_threads, cfg.block_bytes)
    plans = [[(off, min(cfg.block_bytes, end - off)) for off in range(start, end, cfg.block_bytes)]
             for start, end in regions]
    max_len = min(cfg.block_bytes, cfg.file_bytes)

    def once(record: bool) -> _Iteration:
        fds = [_open(path) for _ in plans]
        results: list[tuple[int, int] | BaseException | None] = [None] * len(plans)
        traces: list[list | None] = [[] if (record and trace is not None) else None for _ in plans]
        gate = threading.Barrier(len(plans) + 1)

        def work(i: int) -> None:
            try:
                gate.wait()
                results[i] = _read_plan(fds[i], plans[i], max_len, traces[i])
            except BaseException as exc:  # surfaced after join
                results[i] = exc

        try:
            cache = _drop_cache(fds[0], cfg.target)
            threads = [threading.Thread(target=work, args=(i,), daemon=True) for i in range(len(plans))]
            for t in threads:
                t.start()
            t0 = clock()
            gate.wait()
            for t in threads:
                t.join()
            t1 = clock()
        finally:
            for fd in fds:
                os.close(fd)
        for r in results:
            if isinstance(r, BaseException):
                raise BenchError(f"concurrent worker failed: {r}") from r
        if record and trace is not None:
            trace.clear()
            for tr in traces:
                trace.extend(tr)
        nbytes = sum(r[0] for r in results)
        reads = sum(r[1] for r in results)
        return _Iteration(t1 - t0, nbytes, reads, cache)

    it = _measure(once, cfg.warmup, cfg.repeats)
    elapsed = it.elapsed_ns / 1e9
    tput = it.nbytes / elapsed / MIB
    return BenchRecord(
        benchmark_type="concurrent_read", target_throughput_mb_s=tput, elapsed_s=elapsed,
        bytes_read=it.nbytes, target_name=cfg.target.name, timestamp=_now(),
        cache_state=it.cache_state, seed=cfg.seed, block_kb=cfg.block_kb,
        file_size_mb=cfg.file_size_mb, n_threads=cfg.n_threads, throughput_mb_s=tput,
        aggregate_throughput_mb_s=tput, iops=it.reads / elapsed, reads=it.reads,
    )


def busy_wait(clock: Clock, duration_ns: int) -> int:
    """Spin on ``clock`` for at least ``duration_ns``; returns the time actually spent."""
    if duration_ns <= 0:
        return 0
    start = now = clock()
    while now - start < duration_ns:
        now = clock()
    return now - start


def loading_split(stall_ns: int, compute_ns: int) -> tuple[float, float]:
    """(data_loading_ratio, simulated_gpu_utilization); the two sum to exactly 1."""
    total = stall_ns + compute_ns
    if compute_ns <= 0:
        return 1.0, 0.0
    if stall_ns <= 0:
        return 0.0, 1.0
    ratio = stall_ns / total
    util = 1.0 - ratio
    if ratio + util != 1.0:
        ratio = 1.0 - util
    return ratio, util


def run_pipeline_bench(cfg: PipelineBenchConfig, clock: Clock = monotonic_clock,
                       trace: list | None = None) -> BenchRecord:
    """Simulated training loop: load a batch, then busy-wait the compute phase.

    With ``num_workers > 0`` a pool of that many loader threads keeps up to
    ``num_workers`` batches in flight, overlapping loads with compute. Stall
    time is whatever the consumer spends waiting on the next batch.
    """
    path = pipeline_fixture_path(cfg.target, cfg.sample_bytes, cfg.pool, cfg.seed)
    _check_file(path, cfg.sample_bytes * cfg.pool)
    batches = pipeline_plan(cfg.pool, cfg.batch_size, cfg.n_batches, cfg.seed)
    compute_ns = int(round(cfg.synthetic_compute_ms_per_batch * 1e6))
    sb = cfg.sample_bytes

    def load(fd: int, batch: np.ndarray) -> int:
        out = bytearray(sb * len(batch))
        view = memoryview(out)
        total = 0
        for j, idx in enumerate(batch):
            n = _pread_into(fd, view[j * sb:], sb, int(idx) * sb)
            if n != sb:
                raise BenchError(f"short read of sample {idx} from {path}")
            total += n
        return total

    def once(record: bool) -> _Iteration:
        fd = _open(path)
        stall = compute = nbytes = 0
        try:
            cache = _drop_cache(fd, cfg.target)
            if record and trace is not None:
                trace.clear()
                trace.extend((int(i) * sb, sb) for i in batches.ravel())
            if cfg.num_workers == 0:
                t_start = clock()
                for batch in batches:
                    t0 = clock()
                    nbytes += load(fd, batch)
                    stall += clock() - t0
                    compute += busy_wait(clock, compute_ns)
                t_end = clock()
            else:
                with ThreadPoolExecutor(max_workers=cfg.num_workers) as pool:
                    t_start = clock()
                    inflight = deque(pool.submit(load, fd, batches[i])
                                     for i in range(min(cfg.num_workers, len(batches))))
                    nxt = len(inflight)
                    for _ in range(len(batches)):
                        t0 = clock()
                        nbytes += inflight.popleft().result()
                        stall += clock() - t0
                        if nxt < len(batches):
                            inflight.append(pool.submit(load, fd, batches[nxt]))
                            nxt += 1
                        compute += busy_wait(clock, compute_ns)
                    t_end = clock()
        finally:
            os.close(fd)
        return _Iteration(t_end - t_start, nbytes, cfg.n_batches * cfg.batch_size, cache,
                          {"stall_ns": stall, "compute_ns": compute})

    it = _measure(once, cfg.warmup, cfg.repeats)
    elapsed = it.elapsed_ns / 1e9
    tput = it.nbytes / elapsed / MIB
    ratio, util = loading_split(it.extra["stall_ns"], it.extra["compute_ns"])
    return BenchRecord(
        benchmark_type="pipeline", target_throughput_mb_s=tput, elapsed_s=elapsed,
        bytes_read=it.nbytes, target_name=cfg.target.name, timestamp=_now(),
        cache_state=it.cache_state, seed=cfg.seed, batch_size=cfg.batch_size,
        num_workers=cfg.num_workers, samples_per_second=cfg.n_batches * cfg.batch_size / elapsed,
        data_loading_ratio=ratio, simulated_gpu_utilization=util, throughput_mb_s=tput,
        reads=it.reads,
    )


# -- suites ----------------------------------------------------------------

@dataclass(frozen=True)
class CellFailure:
    index: int
    config: BenchConfig | PipelineBenchConfig
    error: str


@dataclass
class SuiteResult:
    records: list[BenchRecord]
    failures: list[CellFailure]


def run_cell(cfg: BenchConfig | PipelineBenchConfig, clock: Clock = monotonic_clock) -> BenchRecord:
    if isinstance(cfg, PipelineBenchConfig):
        generate_pipeline_fixture(cfg)
        return run_pipeline_bench(cfg, clock)
    generate_test_file(cfg.target, cfg.file_size_mb, cfg.seed)
    runner = {"sequential": run_sequential_read, "random": run_random_read,
              "concurrent": run_concurrent_read}[cfg.pattern]
    return runner(cfg, clock)


def run_suite(cells: Sequence[BenchConfig | PipelineBenchConfig],
              clock: Clock = monotonic_clock) -> SuiteResult:
    """Run every cell in order; a failing cell is logged and skipped."""
    if not cells:
        raise BenchError("benchmark grid is empty")
    for target in {c.target for c in cells}:
        target.validate()
    records: list[BenchRecord] = []
    failures: list[CellFailure] = []
    for i, cfg in enumerate(cells):
        try:
            records.append(run_cell(cfg, clock))
        except (BenchError, OSError, ValueError) as exc:
            log.warning("cell %d failed: %s", i, exc)
            failures.append(CellFailure(i, cfg, str(exc)))
    return SuiteResult(records, failures)
