"""Brute-force ground truth: enumeration, patience sorting, hook lengths, closed formulas."""
from __future__ import annotations

import bisect
import math
from fractions import Fraction
from typing import Iterator, Sequence

from .cases import get_case

__all__ = [
    "enumerate_involutions", "monotone_subseq_length", "lis_quadratic", "is_involution",
    "partitions", "syt_count", "rsk_count", "goulden_count", "regev_estimate",
    "enumeration_histogram",
]

ENUMERATION_GUARD = 14
RSK_GUARD = 40


def is_involution(p: Sequence[int]) -> bool:
    return all(p[p[i] - 1] == i + 1 for i in range(len(p)))


def enumerate_involutions(n: int, fixed_point_free: bool = False) -> Iterator[tuple[int, ...]]:
    """Every involution of 1..n exactly once, in one-line notation."""
    if n > ENUMERATION_GUARD:
        raise ValueError(f"enumeration is capped at n = {ENUMERATION_GUARD}")
    if n < 0:
        raise ValueError("n must be >= 0")
    if fixed_point_free and n % 2:
        raise ValueError("fixed-point-free involutions need an even n")
    p = [0] * n

    def rec(free: list[int]):
        if not free:
            yield tuple(p)
            return
        i, rest = free[0], free[1:]
        if not fixed_point_free:
            p[i] = i + 1
            yield from rec(rest)
        for k, j in enumerate(rest):
            p[i], p[j] = j + 1, i + 1
            yield from rec(rest[:k] + rest[k + 1:])

    yield from rec(list(range(n)))


def monotone_subseq_length(p: Sequence[int], direction: str = "incr") -> int:
    """Longest strictly monotone subsequence by patience sorting, O(n log n)."""
    if direction not in ("incr", "decr"):
        raise ValueError("direction must be 'incr' or 'decr'")
    seq = p if direction == "incr" else [-x for x in p]
    tops: list = []
    for x in seq:
        k = bisect.bisect_left(tops, x)
        if k == len(tops):
            tops.append(x)
        else:
            tops[k] = x
    return len(tops)


def lis_quadratic(p: Sequence[int]) -> int:
    """O(n^2) dynamic program, used to cross-check patience sorting."""
    best = [1] * len(p)
    for i in range(len(p)):
        for j in range(i):
            if p[j] < p[i] and best[j] + 1 > best[i]:
                best[i] = best[j] + 1
    return max(best, default=0)


def enumeration_histogram(case, n: int) -> dict[int, int]:
    """Histogram of table index l over all objects of size n (n = pairs for fpf cases)."""
    case = get_case(case)
    size = 2 * n if case.fixed_point_free else n
    hist: dict[int, int] = {}
    for p in enumerate_involutions(size, case.fixed_point_free):
        if case.tag == "decr-fpf":
            l = monotone_subseq_length(p, "decr") // 2
        else:
            l = monotone_subseq_length(p, "incr")
        hist[l] = hist.get(l, 0) + 1
    return dict(sorted(hist.items()))


def partitions(n: int, max_part: int | None = None) -> Iterator[tuple[int, ...]]:
    """Partitions of n as weakly decreasing tuples, streamed without storing them."""
    if max_part is None:
        max_part = n
    if n == 0:
        yield ()
        return
    for first in range(min(n, max_part), 0, -1):
        for rest in partitions(n - first, first):
            yield (first,) + rest


def _conjugate(lam: Sequence[int]) -> list[int]:
    return [sum(1 for x in lam if x > j) for j in range(lam[0])] if lam else []


def syt_count(lam: Sequence[int]) -> int:
    """Number of standard Young tableaux of shape lam (hook length formula)."""
    lam = list(lam)
    if any(lam[i] < lam[i + 1] for i in range(len(lam) - 1)) or any(x <= 0 for x in lam):
        raise ValueError("not a partition")
    conj = _conjugate(lam)
    hooks = 1
    for i, row in enumerate(lam):
        for j in range(row):
            hooks *= (row - j) + (conj[j] - i) - 1
    return math.factorial(sum(lam)) // hooks


def rsk_count(case, n: int, l: int) -> int:
    """|{L_n = l}| from sums of tableau counts (|{L_n = 2l}| for decr-fpf)."""
    case = get_case(case)
    if n > RSK_GUARD:
        raise ValueError(f"partition sums are capped at n = {RSK_GUARD}")
    total = 0
    if case.tag == "incr-fpf":
        for lam in partitions(n):
            if len(lam) == l:
                total += syt_count([2 * x for x in lam])
    elif case.tag == "decr-fpf":
        for lam in partitions(n, max_part=l):
            if lam and lam[0] == l:
                total += syt_count([2 * x for x in lam])
    else:
        for lam in partitions(n, max_part=l):
            if lam and lam[0] == l:
                total += syt_count(lam)
    return total


def goulden_count(n: int, l: int) -> int:
    """|{L_n = l}| for involutions, valid only when l >= (n-1)/2."""
    if 2 * l < n - 1:
        raise ValueError("the closed formula needs l >= (n-1)/2")
    if l > n:
        return 0
    from .exact_series import involution_numbers
    I = involution_numbers(n)
    f = [math.factorial(k) for k in range(n + 1)]
    s = 0
    for i in range(0, (n - l) // 2 + 1):
        for j in range(0, n - l - 2 * i + 1):
            if i + j > n:
                continue
            term = f[n] * I[j] // (f[i] * f[j] * f[n - i - j])
            s += term if (i + j) % 2 == 0 else -term
    return s if (n - l) % 2 == 0 else -s


def regev_estimate(case, n: int, l: int) -> float:
    """Leading-order count |{L_n <= l}| for fixed l and n -> infinity (|{L_n <= 2l}| for decr-fpf)."""
    case = get_case(case)
    lg = math.lgamma
    if case.tag == "inv":
        s = sum(lg(k / 2) for k in range(1, l + 1))
        s += (n + l * (l - 1) / 4) * math.log(l) - l / 2 * math.log(math.pi) - l * (l - 1) / 4 * math.log(n)
    elif case.tag == "incr-fpf":
        s = math.log(2) + sum(lg(k / 2) for k in range(1, l + 1))
        s += (2 * n + l * (l - 1) / 4) * math.log(l) - l / 2 * math.log(math.pi) - l * math.log(2)
        s -= l * (l - 1) / 4 * math.log(2 * n)
    else:
        s = math.log(2) + sum(lg(2 * k) for k in range(1, l + 1))   # 1! 3! ... (2l-1)!
        s += (2 * n + l * l + l / 2) * math.log(2 * l) - l / 2 * math.log(math.pi) - l * l * math.log(2)
        s -= (l * l + l / 2) * math.log(2 * n)
    return math.exp(s)
