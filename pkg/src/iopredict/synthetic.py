"""Benchmark-shaped synthetic data with a known nonlinear ground truth.

Rows mimic what the harness records for the three benchmark families
(random/sequential access, data-loader pipeline, concurrent reads) across
several storage backends. The backend is not a feature, so its speed enters
the target as an unobserved multiplicative factor that only the measured
throughput columns reveal. The target follows a closed-form model with:

* multiplicative interactions (backend x block size x cache residency,
  backend x batch size x workers),
* threshold effects (page-cache cliff above 100 MB, loader contention past
  3 cores, a bandwidth ceiling for concurrent reads),
* multiplicative log-normal noise (default 5%).

Measured feature columns (throughput_mb_s, iops, samples_per_second,
data_loading_ratio, aggregate_throughput_mb_s) carry noise draws independent
of the target's. For access and concurrent rows the recorded throughput is a
second measurement of the target quantity; for pipeline rows
samples_per_second and throughput_mb_s are end-to-end rates including
compute. Each family populates the same columns the harness records for it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import FEATURES, Dataset, Observation


@dataclass(frozen=True)
class Backend:
    name: str
    latency_ms: float
    mb_s: float
    page_cache: bool


BACKENDS = (
    Backend("memory_fs", 0.002, 40_000.0, False),
    Backend("local_nvme", 0.1, 2_000.0, True),
    Backend("network", 1.0, 200.0, True),
)

# family mix of the reference dataset: access tests, pipeline tests, concurrent tests
DEFAULT_MIX = (84, 52, 5)

BLOCK_KB = (4, 16, 64, 256, 1024, 4096)
FILE_SIZE_MB = (10, 100, 1000)
N_SAMPLES = (1_000, 5_000, 10_000, 50_000, 100_000)
BATCH_SIZES = (16, 32, 64, 128)
NUM_WORKERS = (0, 1, 2, 3, 4)
N_THREADS = (1, 2, 4, 8, 16)

MEMORY = BACKENDS[0]
PAGE_CACHE_MB = 100
READAHEAD_HIDES = 0.9
RANDOM_WARMUP_READS = 2_000.0
BANDWIDTH_CAP_FACTOR = 3.0
SAMPLE_KB = 3.0
# loader: fixed collate/IPC cost per batch plus per-sample fetch and decode
BATCH_OVERHEAD_MS = 30.0
DECODE_MS_PER_SAMPLE = 0.05
COMPUTE_MS_PER_SAMPLE = 0.1
LOADER_CORES = 3
OVERSUBSCRIBE_PENALTY = 0.6


def _mix_counts(n: int) -> tuple[int, int, int]:
    total = sum(DEFAULT_MIX)
    access = round(n * DEFAULT_MIX[0] / total)
    concurrent = max(1, round(n * DEFAULT_MIX[2] / total))
    return access, n - access - concurrent, concurrent


def expected_mix(n: int) -> tuple[int, int, int]:
    """(access, pipeline, concurrent) row counts used for ``n`` rows."""
    return _mix_counts(n)


def per_request_mb_s(block_kb, latency_ms, mb_s):
    """Throughput of back-to-back requests: fixed latency plus transfer time."""
    mb = np.asarray(block_kb, dtype=np.float64) / 1024.0
    return mb / (np.asarray(latency_ms) / 1000.0 + mb / np.asarray(mb_s))


def _served(backend: Backend, file_size_mb):
    """(latency_ms, mb_s) arrays: page-cache hits are served at memory speed."""
    hit = backend.page_cache & (np.asarray(file_size_mb) <= PAGE_CACHE_MB)
    return (np.where(hit, MEMORY.latency_ms, backend.latency_ms),
            np.where(hit, MEMORY.mb_s, backend.mb_s))


def access_truth(backend: Backend, block_kb, file_size_mb, n_samples, sequential):
    seq = np.asarray(sequential, dtype=bool)
    latency, mb_s = _served(backend, file_size_mb)
    latency = np.where(seq, latency * (1.0 - READAHEAD_HIDES), latency)
    out = per_request_mb_s(block_kb, latency, mb_s)
    ns = np.asarray(n_samples, dtype=np.float64)
    # short random runs pay a fixed open/seek warmup
    return out * np.where(seq, 1.0, ns / (ns + RANDOM_WARMUP_READS))


def worker_speedup(num_workers):
    """Parallel loaders scale up to the core count, then contend for it."""
    nw = np.asarray(num_workers, dtype=np.float64)
    over = np.maximum(nw - LOADER_CORES, 0.0)
    return np.where(nw == 0, 1.0, 0.9 * np.minimum(nw, LOADER_CORES) / (1.0 + OVERSUBSCRIBE_PENALTY * over))


def batch_load_ms(backend: Backend, batch_size, num_workers):
    bs = np.asarray(batch_size, dtype=np.float64)
    fetch_ms = backend.latency_ms + (SAMPLE_KB / 1024.0) / backend.mb_s * 1000.0
    return (BATCH_OVERHEAD_MS + (fetch_ms + DECODE_MS_PER_SAMPLE) * bs) / worker_speedup(num_workers)


def pipeline_truth(backend: Backend, batch_size, num_workers):
    """Loader-side throughput: one batch of samples per ``batch_load_ms``."""
    bs = np.asarray(batch_size, dtype=np.float64)
    return bs * (SAMPLE_KB / 1024.0) / (batch_load_ms(backend, bs, num_workers) / 1000.0)


def concurrent_truth(backend: Backend, n_threads, block_kb=1024, file_size_mb=1000):
    """Threads overlap request latency until the device bandwidth ceiling."""
    latency, mb_s = _served(backend, file_size_mb)
    one = per_request_mb_s(block_kb, latency, mb_s)
    t = np.asarray(n_threads, dtype=np.float64)
    return np.minimum(one * t ** 0.8, BANDWIDTH_CAP_FACTOR * mb_s)


def make_synthetic_dataset(n: int = 141, seed: int = 0, noise: float = 0.05) -> Dataset:
    """Draw an ``n``-row raw dataset (target in MB/s, missing cells as None)."""
    if n < 3:
        raise ValueError("synthetic dataset needs at least 3 rows")
    if noise < 0:
        raise ValueError("noise must be non-negative")
    rng = np.random.default_rng(seed)
    n_access, n_pipe, n_conc = _mix_counts(n)

    def jitter(size=None):
        return np.exp(noise * rng.standard_normal(size))

    def pick_backend() -> Backend:
        return BACKENDS[int(rng.integers(len(BACKENDS)))]

    def row(kind: str, backend: Backend, target: float, **values) -> Observation:
        feats = dict.fromkeys(FEATURES)
        feats.update({k: float(v) for k, v in values.items()})
        return Observation(kind, tuple(feats[f] for f in FEATURES), float(target),
                           f"synthetic/{backend.name}")

    rows: list[Observation] = []
    for _ in range(n_access):
        be = pick_backend()
        block = rng.choice(BLOCK_KB)
        fsize = rng.choice(FILE_SIZE_MB)
        seq = bool(rng.random() < 1 / 7)
        ns = 0 if seq else rng.choice(N_SAMPLES)
        truth = float(access_truth(be, block, fsize, ns, seq))
        measured = truth * jitter()
        extra = {} if seq else {"n_samples": ns}
        rows.append(row("seq_read" if seq else "random_read", be, truth * jitter(),
                        block_kb=block, file_size_mb=fsize, throughput_mb_s=measured,
                        iops=measured * 1024.0 / block, **extra))

    for _ in range(n_pipe):
        be = pick_backend()
        bs = rng.choice(BATCH_SIZES)
        nw = rng.choice(NUM_WORKERS)
        compute_ms = COMPUTE_MS_PER_SAMPLE * bs
        load_ms = float(batch_load_ms(be, bs, nw))
        # with workers, loading overlaps compute and only the excess stalls
        stall = load_ms if nw == 0 else max(load_ms - compute_ms, 0.0)
        ratio = min(stall / (stall + compute_ms) * jitter(), 1.0)
        sps = bs / ((stall + compute_ms) / 1000.0) * jitter()
        rows.append(row("pipeline", be, float(pipeline_truth(be, bs, nw)) * jitter(),
                        batch_size=bs, num_workers=nw, data_loading_ratio=ratio, samples_per_second=sps,
                        throughput_mb_s=sps * SAMPLE_KB / 1024.0))

    for i in range(n_conc):
        be = pick_backend()
        nt = N_THREADS[i % len(N_THREADS)]
        truth = float(concurrent_truth(be, nt))
        measured = truth * jitter()
        rows.append(row("concurrent_read", be, truth * jitter(),
                        block_kb=1024, file_size_mb=1000, n_threads=nt, throughput_mb_s=measured,
                        aggregate_throughput_mb_s=measured, iops=measured * 1024.0 / 1024))

    order = rng.permutation(len(rows))
    return Dataset(tuple(rows[i] for i in order))
