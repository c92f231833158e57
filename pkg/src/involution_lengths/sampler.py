"""Uniform random involutions and Monte Carlo histograms of their monotone subsequences.

Randomness is counter-based: sample number i under seed S draws from a splitmix64
sequence started at hash(S, i). A sample therefore does not depend on which thread
produced it or in what order, and histograms are identical for any thread count.

Involutions are built in O(n): with k elements left, the last one is a fixed point with
probability I_{k-1}/I_k, otherwise it is paired with one of the other k-1 uniformly.
Those ratios are the single inexact ingredient (double precision, relative error
about 1e-16 per step).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numba
import numpy as np

from .cases import get_case

__all__ = [
    "RngStream", "Histogram", "fixed_point_ratios", "sample_involution",
    "sample_fpf_involution", "simulate_lengths", "patience_length",
]

# the system TBB is too old for numba; fall through to OpenMP or the builtin work queue
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


@dataclass(frozen=True)
class RngStream:
    """A (seed, stream) pair naming one reproducible random sequence."""
    seed: int
    stream: int = 0

    def __post_init__(self):
        if not 0 <= self.seed <= _MASK:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.stream < 0:
            raise ValueError("stream id must be >= 0")


# --------------------------------------------------------------- numba kernels

@numba.njit(cache=True, inline="always")
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True)
def _stream_start(seed, stream):
    return _mix(np.uint64(seed) ^ _mix(np.uint64(stream) * np.uint64(_GOLDEN) + np.uint64(1)))


@numba.njit(cache=True, inline="always")
def _uniform(state):
    """Advance splitmix64; return (new state, uniform double in [0, 1))."""
    state = state + np.uint64(_GOLDEN)
    return state, (_mix(state) >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@numba.njit(cache=True)
def _build(n, ratios, fixed_points, state, out):
    """Fill out[0:n] with a one-line involution (1-based values); return the state."""
    pool = np.empty(n, np.int64)
    for i in range(n):
        pool[i] = i
    k = n
    while k > 0:
        e = pool[k - 1]
        if fixed_points:
            state, u = _uniform(state)
            if u < ratios[k]:
                out[e] = e + 1
                k -= 1
                continue
        state, u = _uniform(state)
        j = int(u * (k - 1))
        if j >= k - 1:
            j = k - 2
        f = pool[j]
        out[e] = f + 1
        out[f] = e + 1
        pool[j] = pool[k - 2]
        k -= 2
    return state


@numba.njit(cache=True)
def _patience(p, decreasing):
    n = p.shape[0]
    tops = np.empty(n, np.int64)
    size = 0
    for i in range(n):
        x = -p[i] if decreasing else p[i]
        lo, hi = 0, size
        while lo < hi:
            mid = (lo + hi) >> 1
            if tops[mid] < x:
                lo = mid + 1
            else:
                hi = mid
        tops[lo] = x
        if lo == size:
            size += 1
    return size


@numba.njit(cache=True, parallel=True)
def _simulate(n, ratios, fixed_points, decreasing, seed, first, count):
    lengths = np.empty(count, np.int64)
    for i in numba.prange(count):
        perm = np.empty(n, np.int64)
        state = _stream_start(seed, first + np.uint64(i))
        _build(n, ratios, fixed_points, state, perm)
        lengths[i] = _patience(perm, decreasing)
    return lengths


# ------------------------------------------------------------------ Python API

_RATIO_CACHE: dict[int, np.ndarray] = {}


def fixed_point_ratios(n: int) -> np.ndarray:
    """ratios[k] = I_{k-1} / I_k for k = 1..n (ratios[0] unused), from exact integers."""
    if n not in _RATIO_CACHE:
        from .exact_series import involution_numbers
        I = involution_numbers(max(n, 1))
        r = np.zeros(n + 1)
        for k in range(1, n + 1):
            # exact integer division keeps 53 correct bits even when I_k overflows a double
            q, rem = divmod(I[k - 1] << 64, I[k])
            r[k] = math.ldexp(q, -64)
        _RATIO_CACHE[n] = r
    return _RATIO_CACHE[n]


def _sample(size: int, fixed_points: bool, rng: RngStream) -> tuple[int, ...]:
    ratios = fixed_point_ratios(size) if fixed_points else np.zeros(size + 1)
    out = np.empty(size, np.int64)
    # numba hands the uint64 back as a Python int, which it cannot re-import above 2^63
    state = np.uint64(_stream_start(np.uint64(rng.seed), np.uint64(rng.stream)))
    _build(size, ratios, fixed_points, state, out)
    return tuple(int(v) for v in out)


def sample_involution(n: int, rng: RngStream) -> tuple[int, ...]:
    """Uniform involution of 1..n in one-line notation."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return _sample(n, True, rng)


def sample_fpf_involution(n_pairs: int, rng: RngStream) -> tuple[int, ...]:
    """Uniform fixed-point-free involution of 1..2*n_pairs (a uniform perfect matching)."""
    if n_pairs < 0:
        raise ValueError("n_pairs must be >= 0")
    return _sample(2 * n_pairs, False, rng)


def patience_length(p, decreasing: bool = False) -> int:
    return int(_patience(np.asarray(p, dtype=np.int64), decreasing))


@dataclass
class Histogram:
    """Counts of the subsequence length (the length itself, even for decr-fpf)."""
    case: str
    n: int
    counts: dict[int, int]
    samples: int
    seed: int
    threads: int = 1

    def __post_init__(self):
        if sum(self.counts.values()) != self.samples:
            raise ValueError("counts do not add up to the number of samples")

    def mean(self) -> float:
        return sum(l * c for l, c in self.counts.items()) / self.samples

    def variance(self) -> float:
        m = self.mean()
        return sum(c * (l - m) ** 2 for l, c in self.counts.items()) / (self.samples - 1)

    def by_table_index(self) -> dict[int, int]:
        """Counts keyed like the exact tables (length/2 for decr-fpf)."""
        if self.case == "decr-fpf":
            return {l // 2: c for l, c in self.counts.items()}
        return dict(self.counts)

    def merged(self, other: "Histogram") -> "Histogram":
        if (self.case, self.n) != (other.case, other.n):
            raise ValueError("cannot merge histograms of different problems")
        counts = dict(self.counts)
        for l, c in other.counts.items():
            counts[l] = counts.get(l, 0) + c
        return Histogram(self.case, self.n, counts, self.samples + other.samples, self.seed, self.threads)

    def csv_lines(self) -> list[str]:
        return ["case,n,l,count,samples,seed"] + [
            f"{self.case},{self.n},{l},{c},{self.samples},{self.seed}" for l, c in sorted(self.counts.items())]

    def to_csv(self, path) -> None:
        Path(path).write_text("\n".join(self.csv_lines()) + "\n", encoding="utf-8")


def simulate_lengths(case, n: int, samples: int, seed: int, threads: int | None = None,
                     first_stream: int = 0) -> Histogram:
    """Histogram of L over ``samples`` uniform objects; n counts 2-cycles for fpf cases.

    Sample i uses stream first_stream + i, so the result is independent of ``threads``.
    """
    case = get_case(case)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    size = 2 * n if case.fixed_point_free else n
    fixed_points = not case.fixed_point_free
    ratios = fixed_point_ratios(size) if fixed_points else np.zeros(size + 1)
    avail = numba.config.NUMBA_NUM_THREADS
    threads = avail if threads is None else max(1, min(int(threads), avail))
    numba.set_num_threads(threads)
    lengths = _simulate(size, ratios, fixed_points, case.tag == "decr-fpf",
                        np.uint64(seed), np.uint64(first_stream), samples)
    values, counts = np.unique(lengths, return_counts=True)
    hist = {int(v): int(c) for v, c in zip(values, counts)}
    return Histogram(case.tag, n, hist, samples, int(seed), threads)
