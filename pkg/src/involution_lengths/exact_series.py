"""Exact power series for the length distributions.

The log-derivatives v = x d/dx log g of the orthogonal-group integrals
g_l^{+-}(x) = E exp(x tr U) solve a Chazy I equation whose Maclaurin coefficients obey

    (n+1)(n^2-l^2) a_{n+1} - 16(n-2) a_{n-1} + 2 sum_{m=2}^{n-1} m a_m (3(n-m)+1) a_{n+1-m} = 0,

with v = x^2 +- x^{l+1}/l! + O(x^{l+2}). Exponentiating gives the generating functions
of the counts, which are turned into exact integer tables.

Two implementations of the recursion live here. ``chazy_reference`` is the literal
O(N^2) loop over ``Fraction``. The production path writes v = x^2 + delta (x^2 is an
exact solution), so only the quadratic delta*delta term needs a convolution. That term
is fed by an online divide-and-conquer product on FLINT rational polynomials, which
keeps order-2000 series affordable.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
import sqlite3
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import flint
from flint import fmpq, fmpq_poly, fmpq_series

from .cases import ProblemCase, get_case

__all__ = [
    "TruncatedSeries", "chazy_reference", "chazy_coefficients", "group_series",
    "generating_series", "cumulative_counts", "involution_numbers", "double_factorial",
    "ExactTable", "length_counts_table", "windowed_table", "CountCache", "default_cache",
]

ExactScalar = Fraction


# --------------------------------------------------------------------------- series

class TruncatedSeries:
    """Immutable truncated power series c_0 + c_1 x + ... + c_N x^N over the rationals."""

    __slots__ = ("_c",)

    def __init__(self, coefficients: Iterable, order: int | None = None):
        c = [Fraction(x) for x in coefficients]
        if order is not None:
            if order < 0:
                raise ValueError("order must be >= 0")
            c = (c + [Fraction(0)] * (order + 1))[: order + 1]
        if not c:
            raise ValueError("a series needs at least one coefficient")
        self._c = tuple(c)

    @property
    def order(self) -> int:
        return len(self._c) - 1

    @property
    def coefficients(self) -> tuple[Fraction, ...]:
        return self._c

    def __len__(self):
        return len(self._c)

    def __getitem__(self, k):
        return self._c[k]

    def __iter__(self):
        return iter(self._c)

    def __eq__(self, other):
        if isinstance(other, TruncatedSeries):
            return self._c == other._c
        return NotImplemented

    def __hash__(self):
        return hash(self._c)

    def __repr__(self):
        head = ", ".join(str(x) for x in self._c[:6])
        return f"TruncatedSeries([{head}{', ...' if len(self._c) > 6 else ''}], order={self.order})"

    def _common(self, other):
        if not isinstance(other, TruncatedSeries):
            other = TruncatedSeries([other], order=self.order)
        n = min(self.order, other.order)
        return self._c[: n + 1], other._c[: n + 1], n

    def __add__(self, other):
        a, b, n = self._common(other)
        return TruncatedSeries([x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries([-x for x in self._c])

    def __sub__(self, other):
        return self + (-other if isinstance(other, TruncatedSeries) else -Fraction(other))

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            k = Fraction(other)
            return TruncatedSeries([k * x for x in self._c])
        a, b, n = self._common(other)
        out = [Fraction(0)] * (n + 1)
        for i, x in enumerate(a):
            if x:
                for j in range(n + 1 - i):
                    out[i + j] += x * b[j]
        return TruncatedSeries(out)

    __rmul__ = __mul__

    def derivative(self):
        return TruncatedSeries([k * self._c[k] for k in range(1, len(self._c))] or [0])

    def integral(self):
        """Antiderivative with zero constant, truncated at the same order."""
        return TruncatedSeries([0] + [self._c[k] / (k + 1) for k in range(self.order)])

    def exp(self):
        if self._c[0] != 0:
            raise ValueError("exp needs a zero constant term")
        f, N = self._c, self.order
        g = [Fraction(0)] * (N + 1)
        g[0] = Fraction(1)
        for n in range(1, N + 1):
            g[n] = sum(k * f[k] * g[n - k] for k in range(1, n + 1)) / n
        return TruncatedSeries(g)

    def log(self):
        if self._c[0] != 1:
            raise ValueError("log needs constant term 1")
        g, N = self._c, self.order
        f = [Fraction(0)] * (N + 1)
        for n in range(1, N + 1):
            f[n] = g[n] - sum(k * f[k] * g[n - k] for k in range(1, n)) / n
        return TruncatedSeries(f)

    def compose(self, inner: "TruncatedSeries"):
        """self(inner(x)); inner must have zero constant term."""
        if inner[0] != 0:
            raise ValueError("inner series needs a zero constant term")
        N = min(self.order, inner.order)
        out = TruncatedSeries([self._c[N]], order=N)
        for k in range(N - 1, -1, -1):
            out = out * inner + self._c[k]
        return out

    def reversion(self):
        """Compositional inverse g with self(g(x)) = x."""
        if self._c[0] != 0 or self.order < 1 or self._c[1] == 0:
            raise ValueError("reversion needs c_0 = 0 and c_1 != 0")
        N = self.order
        g = TruncatedSeries([0, 1 / self._c[1]], order=N)
        for k in range(2, N + 1):
            err = self.compose(g)[k]
            c = list(g)
            c[k] -= err / self._c[1]
            g = TruncatedSeries(c)
        return g

    def to_fmpq(self):
        return fmpq_poly([fmpq(x.numerator, x.denominator) for x in self._c])


def _to_fraction(q) -> Fraction:
    return Fraction(int(q.p), int(q.q))


# ----------------------------------------------------------------- Chazy recursion

def _check_lsign(l, sign, N):
    if N < 2:
        raise ValueError("truncation order N must be >= 2")
    if l < 1:
        raise ValueError("l must be >= 1")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")


def chazy_reference(l: int, sign: int, N: int) -> list[Fraction]:
    """a_0..a_N by the literal recursion (slow; kept as the readable reference)."""
    _check_lsign(l, sign, N)
    a = [Fraction(0)] * (N + 1)
    a[2] = Fraction(1 + (sign if l == 1 else 0))
    for n in range(2, N):
        if n == l:
            # the prefactor vanishes: a_{l+1} is the free parameter
            a[n + 1] = Fraction(sign, math.factorial(l))
            continue
        s = sum(m * a[m] * (3 * (n - m) + 1) * a[n + 1 - m] for m in range(2, n))
        a[n + 1] = (16 * (n - 2) * a[n - 1] - 2 * s) / ((n + 1) * (n * n - l * l))
    return a


def _chazy_delta(l: int, sign: int, N: int) -> list:
    """delta_{l+1}, ..., delta_N (fmpq) with v = x^2 + delta.

    Substituting v = x^2 + delta, the linear terms collapse to

        (n+1)(n^2-l^2) delta_{n+1} = -4(n+1) delta_{n-1} - 2 [x^{n+1}] (theta delta)(3 theta - 2) delta,

    theta = x d/dx. The quadratic term only reaches orders >= 2(l+1), and it is
    accumulated by an online divide-and-conquer convolution.
    """
    s = l + 1
    M = N - s + 1                     # unknowns d_t = delta_{s+t}, t = 0..M-1
    if M <= 0:
        return []
    cap = N - 2 * s                   # largest t that ever enters the product
    d = [fmpq(0)] * M
    P = [fmpq(0)] * M                 # theta delta
    Q = [fmpq(0)] * M                 # (3 theta - 2) delta
    pending = []                      # (partial product, offset) covering the current leaf

    def leaf(t):
        i = s + t
        if t == 0:
            v = fmpq(sign, math.factorial(l))
        else:
            n = i - 1
            c = fmpq(0)
            k0 = t - s
            if k0 >= 0:
                for poly, off in pending:
                    k = k0 - off
                    if k >= 0:
                        c += poly[k]
            prev = d[t - 2] if t >= 2 else 0
            v = -(4 * (n + 1) * prev + 2 * c) / ((n + 1) * (n * n - l * l))
        d[t] = v
        P[t] = i * v
        Q[t] = (3 * i - 2) * v

    def solve(lo, hi):
        if hi - lo == 1:
            if lo < M:
                leaf(lo)
            return
        mid = (lo + hi) // 2
        solve(lo, mid)
        if mid >= M:
            return
        if lo > cap:
            solve(mid, hi)
            return
        e = min(mid, cap + 1)
        if lo == 0:
            prod, off = fmpq_poly(P[:e]) * fmpq_poly(Q[:e]), 0
        else:
            w = min(hi - lo, cap + 1)
            prod = fmpq_poly(P[lo:e]) * fmpq_poly(Q[:w]) + fmpq_poly(Q[lo:e]) * fmpq_poly(P[:w])
            off = lo
        pending.append((prod, off))
        solve(mid, hi)
        pending.pop()

    size = 1
    while size < M:
        size *= 2
    solve(0, size)
    return d


def chazy_coefficients(l: int, sign: int, N: int) -> TruncatedSeries:
    """Maclaurin coefficients a_0..a_N of the Chazy solution v_l^{sign}."""
    _check_lsign(l, sign, N)
    a = [Fraction(0)] * (N + 1)
    a[2] = Fraction(1)
    for t, q in enumerate(_chazy_delta(l, sign, N)):
        a[l + 1 + t] += _to_fraction(q)
    return TruncatedSeries(a)


_HALF_SQUARE = {}


def _exp_half_square(N: int) -> fmpq_poly:
    """exp(x^2/2) truncated at order N."""
    if N not in _HALF_SQUARE:
        c = [fmpq(0)] * (N + 1)
        for k in range(N // 2 + 1):
            c[2 * k] = fmpq(1, 2 ** k * math.factorial(k))
        _HALF_SQUARE[N] = fmpq_poly(c)
    return _HALF_SQUARE[N]


def _exp_poly(D, N: int, valuation: int = 1) -> fmpq_poly:
    """exp(D) truncated at order N for a polynomial D with the given valuation."""
    terms = N // valuation
    if terms <= 6:
        # few powers of D survive the truncation: plain power sum
        Dp = fmpq_poly(D)
        out, power = Dp + 1, Dp
        for k in range(2, terms + 1):
            power = power.mul_low(Dp, N + 1) / k
            out += power
        return out
    # FLINT silently truncates series at ctx.cap, so widen it first
    if flint.ctx.cap < N + 1:
        flint.ctx.cap = N + 1
    e = fmpq_series(D, prec=N + 1).exp()
    if e.prec < N + 1:
        raise ArithmeticError("series exponential lost precision")
    return fmpq_poly(e.coeffs())


def _group_factor(l: int, sign: int, N: int):
    """(E, shift) with g_l^{sign} = E(x) * exp(x^2/2) up to order N, shift = 0 or None.

    For l = 0 the group integral is exp(+-x) and no Gaussian factor is split off.
    """
    if l == 0:
        return fmpq_poly([fmpq(sign ** k, math.factorial(k)) for k in range(N + 1)]), False
    if N < 2:
        return fmpq_poly([1]), True
    delta = _chazy_delta(l, sign, N)
    D = [fmpq(0)] * (N + 1)
    for t, q in enumerate(delta):
        D[l + 1 + t] = q / (l + 1 + t)
    return _exp_poly(D, N, l + 1), True


def _group_poly(l: int, sign: int, N: int) -> fmpq_poly:
    """g_l^{sign}(x) = exp(int_0^x v(y) dy / y) truncated at order N, as an fmpq_poly."""
    E, gauss = _group_factor(l, sign, N)
    return E.mul_low(_exp_half_square(N), N + 1) if gauss else E


def group_series(l: int, sign: int, N: int) -> TruncatedSeries:
    """Orthogonal-group integral g_l^{sign}(x) = E_{O^sign(l+1)} exp(x tr U) to order N."""
    if l < 0 or sign not in (1, -1) or N < 0:
        raise ValueError("need l >= 0, sign = +-1, N >= 0")
    p = _group_poly(l, sign, N)
    return TruncatedSeries([_to_fraction(p[k]) for k in range(N + 1)])


def _generating_factors(case: ProblemCase, bound: int, N: int) -> list[tuple[fmpq_poly, fmpq_poly | None]]:
    """f_bound as a sum of products E * H (H = None meaning 1), all truncated at order N."""
    if bound < 0:
        raise ValueError("bound must be >= 0")
    gauss = _exp_half_square(N)
    if case.tag == "incr-fpf":
        if bound == 0:
            return [(fmpq_poly([1]), None)]
        if bound == 1:                # cosh z, supplied explicitly
            return [(fmpq_poly([fmpq(1, math.factorial(k)) if k % 2 == 0 else 0 for k in range(N + 1)]), None)]
        out = []
        for sign in (-1, 1):
            E, g = _group_factor(bound - 1, sign, N)
            out.append((E / 2, gauss if g else None))
        return out
    if case.tag == "decr-fpf":
        E, g = _group_factor(2 * bound + 1, -1, N)
        return [(E, gauss if g else None)]
    E, g = _group_factor(bound, -1, N)
    ez = fmpq_poly([fmpq(1, math.factorial(k)) for k in range(N + 1)])
    H = gauss.mul_low(ez, N + 1) if g else ez
    return [(E, H)]


def _generating_poly(case: ProblemCase, bound: int, N: int) -> fmpq_poly:
    total = fmpq_poly([0])
    for E, H in _generating_factors(case, bound, N):
        total += E.mul_low(H, N + 1) if H is not None else E
    return total


def _generating_coeffs(case: ProblemCase, bound: int, N: int, orders: Sequence[int]) -> dict[int, fmpq]:
    """Selected coefficients of f_bound; cheap when only a few orders are needed."""
    if len(orders) > 8:
        p = _generating_poly(case, bound, N)
        return {k: p[k] for k in orders}
    out = {k: fmpq(0) for k in orders}
    for E, H in _generating_factors(case, bound, N):
        e = E.coeffs()
        if H is None:
            for k in orders:
                out[k] += e[k] if k < len(e) else 0
            continue
        h = H.coeffs()
        for k in orders:
            acc = fmpq(0)
            for j in range(max(0, k - len(h) + 1), min(k, len(e) - 1) + 1):
                hk = h[k - j]
                if hk:
                    acc += e[j] * hk
            out[k] += acc
    return out


def generating_series(case, l: int, N: int) -> TruncatedSeries:
    """Exponential generating function f_l of the cumulative counts, truncated at order N.

    Fixed-point-free cases use the variable z with counts sitting at z^{2n}/(2n)!.
    """
    case = get_case(case)
    if N < 0:
        raise ValueError("N must be >= 0")
    p = _generating_poly(case, l, N)
    return TruncatedSeries([_to_fraction(p[k]) for k in range(N + 1)])


def cumulative_counts(case, bound: int, n_max: int, rows: Sequence[int] | None = None):
    """|{L_n <= bound}| (|{L_n <= 2 bound}| for decr-fpf).

    Returns a list over n = 0..n_max, or a dict over ``rows`` when given.
    """
    case = get_case(case)
    step = 2 if case.fixed_point_free else 1
    N = step * n_max
    wanted = list(range(n_max + 1)) if rows is None else sorted(set(rows))
    coeffs = _generating_coeffs(case, bound, N, [step * n for n in wanted])
    out = {}
    for n in wanted:
        c = coeffs[step * n] * math.factorial(step * n)
        if c.q != 1:
            raise ArithmeticError(f"non-integer count at case={case}, bound={bound}, n={n}: {c}")
        out[n] = int(c.p)
    return [out[n] for n in wanted] if rows is None else out


def involution_numbers(n_max: int) -> list[int]:
    """I_0, ..., I_{n_max} from I_{n+2} = I_{n+1} + (n+1) I_n."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    I = [1, 1]
    for n in range(n_max - 1):
        I.append(I[-1] + (n + 1) * I[-2])
    return I[: n_max + 1]


def double_factorial(k: int) -> int:
    """k!! for odd k (and (-1)!! = 1)."""
    return math.prod(range(k, 0, -2)) if k > 0 else 1


# -------------------------------------------------------------------------- cache

def _cache_dir() -> Path:
    env = os.environ.get("INVLEN_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "involution_lengths"


class CountCache:
    """SQLite store of cumulative counts keyed by (case, bound, n)."""

    def __init__(self, path: str | os.PathLike | None = None):
        path = Path(path) if path is not None else _cache_dir() / "counts.sqlite"
        path.parent.mkdir(parents=True, exist_ok=True)
        self.path = path
        self._db = sqlite3.connect(str(path))
        self._db.execute("CREATE TABLE IF NOT EXISTS cum (case_tag TEXT, bound INTEGER, n INTEGER, "
                         "value BLOB, PRIMARY KEY (case_tag, bound, n))")
        self._db.commit()

    def get(self, case: str, bound: int, rows: Sequence[int]) -> dict[int, int]:
        out = {}
        q = "SELECT n, value FROM cum WHERE case_tag=? AND bound=?"
        wanted = set(rows)
        for n, v in self._db.execute(q, (case, bound)):
            if n in wanted:
                out[n] = int(v.decode() if isinstance(v, bytes) else v, 16)
        return out

    def put(self, case: str, bound: int, values: dict[int, int]):
        self._db.executemany("INSERT OR REPLACE INTO cum VALUES (?,?,?,?)",
                             [(case, bound, n, format(v, "x")) for n, v in values.items()])
        self._db.commit()


_DEFAULT_CACHE = None


def default_cache() -> CountCache | None:
    """Process-wide cache, or None when INVLEN_NO_CACHE is set."""
    global _DEFAULT_CACHE
    if os.environ.get("INVLEN_NO_CACHE"):
        return None
    if _DEFAULT_CACHE is None:
        _DEFAULT_CACHE = CountCache()
    return _DEFAULT_CACHE


# -------------------------------------------------------------------------- tables

class ExactTable:
    """Cumulative counts |{L_n <= l}| for selected rows n and bounds l.

    Rows may be complete (every l from 0 to n) or windows around the bulk of the
    distribution. Missing bounds below a window are not guessed: ask ``tail_mass``.
    """

    def __init__(self, case, cumulative: dict[int, dict[int, int]]):
        self.case = get_case(case)
        self._cum = {n: dict(sorted(row.items())) for n, row in sorted(cumulative.items())}
        self.n_max = max(self._cum) if self._cum else 0

    @property
    def rows(self) -> list[int]:
        return list(self._cum)

    def total(self, n: int) -> int:
        return self.case.total(n)

    def bounds(self, n: int) -> list[int]:
        return list(self._cum[n])

    def is_complete(self, n: int) -> bool:
        row = self._cum.get(n, {})
        return all(l in row for l in range(0, n + 1))

    def cumulative(self, n: int, l: int) -> int:
        row = self._cum[n]
        if l in row:
            return row[l]
        if l < 0:
            return 0
        if l >= n and n in row and max(row) >= n:
            return self.total(n)
        raise KeyError(f"bound {l} not computed for row {n} of {self.case}")

    def count(self, n: int, l: int) -> int:
        """|{L_n = l}| (|{L_n = 2l}| for decr-fpf)."""
        return self.cumulative(n, l) - self.cumulative(n, l - 1)

    def row(self, n: int) -> dict[int, int]:
        if not self.is_complete(n):
            raise KeyError(f"row {n} is only a window")
        return {l: self.count(n, l) for l in range(1, n + 1)}

    def cdf(self, n: int, l: int) -> Fraction:
        return Fraction(self.cumulative(n, l), self.total(n))

    def pmf(self, n: int, l: int) -> Fraction:
        return Fraction(self.count(n, l), self.total(n))

    def window(self, n: int) -> tuple[int, int]:
        b = self.bounds(n)
        return b[0], b[-1]

    def tail_mass(self, n: int) -> tuple[Fraction, Fraction]:
        """(P(L <= lowest bound), P(L > highest bound)) for the stored window."""
        lo, hi = self.window(n)
        return self.cdf(n, lo), 1 - self.cdf(n, hi)

    def moments(self, n: int) -> tuple[Fraction, Fraction]:
        """Exact mean and variance of the length over the stored window.

        Uses E L = sum_l P(L > l) and E L^2 = sum_l (2l+1) P(L > l); the mass outside the
        window is treated as sitting at its edges, so check ``tail_mass`` first.
        """
        lo, hi = self.window(n)
        T = self.total(n)
        m1 = Fraction(lo)
        m2 = Fraction(lo * lo)
        for l in range(lo, hi):
            tail = Fraction(T - self.cumulative(n, l), T)
            m1 += tail
            m2 += (2 * l + 1) * tail
        k = 2 if self.case.tag == "decr-fpf" else 1
        return k * m1, k * k * (m2 - m1 * m1)

    def validate(self):
        """Raise if counts are negative or cumulative counts decrease."""
        for n, row in self._cum.items():
            prev = None
            for l, c in row.items():
                if c < 0 or c > self.total(n):
                    raise ArithmeticError(f"count out of range at n={n}, l={l}")
                if prev is not None and c < prev[1] and l == prev[0] + 1:
                    raise ArithmeticError(f"cumulative count decreases at n={n}, l={l}")
                prev = (l, c)
        return self

    # ---- persistence (complete rows only)

    def to_csv(self, path) -> dict:
        lines = ["case,n,l,count"]
        for n in self.rows:
            if n == 0 or not self.is_complete(n):
                continue
            for l in range(1, n + 1):
                lines.append(f"{self.case.tag},{n},{l},{self.count(n, l)}")
        data = ("\n".join(lines) + "\n").encode()
        Path(path).write_bytes(data)
        meta = {"case": self.case.tag, "n_max": self.n_max, "checksum": hashlib.sha256(data).hexdigest()}
        Path(str(path) + ".json").write_text(json.dumps(meta, indent=1) + "\n")
        return meta

    @classmethod
    def from_csv(cls, path) -> "ExactTable":
        data = Path(path).read_bytes()
        side = Path(str(path) + ".json")
        meta = json.loads(side.read_text()) if side.exists() else None
        if meta and meta["checksum"] != hashlib.sha256(data).hexdigest():
            raise ValueError("checksum mismatch between CSV and sidecar")
        rows: dict[int, dict[int, int]] = {}
        case = None
        for line in data.decode().splitlines()[1:]:
            c, n, l, v = line.split(",")
            case = c
            rows.setdefault(int(n), {})[int(l)] = int(v)
        cum = {}
        for n, pts in rows.items():
            acc, row = 0, {0: 0}
            for l in range(1, n + 1):
                acc += pts[l]
                row[l] = acc
            cum[n] = row
        return cls(case or (meta or {}).get("case", "inv"), cum)


def length_counts_table(case, n_max: int, rows: Iterable[int] | None = None,
                        bounds: Iterable[int] | None = None, cache: CountCache | None | bool = None,
                        progress=None) -> ExactTable:
    """Exact cumulative counts for the requested rows (default 1..n_max) and bounds (default 0..n_max).

    Each bound is one independent series computation; results are stored in the cache
    as soon as they are known, so interrupted compilations resume where they stopped.
    """
    case = get_case(case)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    rows = sorted(set(rows)) if rows is not None else list(range(1, n_max + 1))
    if rows and (rows[0] < 0 or rows[-1] > n_max):
        raise ValueError("rows must lie in 0..n_max")
    bounds = sorted(set(bounds)) if bounds is not None else list(range(0, n_max + 1))
    if cache is None or cache is True:
        cache = default_cache()
    elif cache is False:
        cache = None
    top = max(rows) if rows else 0
    cum: dict[int, dict[int, int]] = {n: {} for n in rows}
    for b in bounds:
        have = cache.get(case.tag, b, rows) if cache else {}
        if len(have) < len(rows):
            if cache:
                # the series yields every row up to the top one, so keep them all
                have = dict(enumerate(cumulative_counts(case, b, top)))
                cache.put(case.tag, b, have)
            else:
                have = cumulative_counts(case, b, top, rows=rows)
        for n in rows:
            cum[n][b] = have[n]
        if progress:
            progress(b)
    return ExactTable(case, cum).validate()


def _center(case: ProblemCase, n: int) -> tuple[float, float]:
    """Rough location and width (in table units of l) of the length distribution."""
    g = case.gamma * n
    mean = 2 * math.sqrt(g) + float(case.delta) - (3.3 if case.tag == "incr-fpf" else 1.2) * g ** (1 / 6)
    width = g ** (1 / 6)
    if case.tag == "decr-fpf":
        return mean / 2, width / 2
    return mean, width


def windowed_table(case, rows: Iterable[int], tail: float = 1e-40, cache=None) -> ExactTable:
    """Exact counts on a window of bounds wide enough that both tails are below ``tail``."""
    case = get_case(case)
    rows = sorted(set(rows))
    lo_b, hi_b = None, None
    for n in rows:
        c, w = _center(case, n)
        a = max(0, int(c - 9 * w))
        b = min(n, int(c + 12 * w) + 1)
        lo_b = a if lo_b is None else min(lo_b, a)
        hi_b = b if hi_b is None else max(hi_b, b)
    while True:
        tab = length_counts_table(case, max(rows), rows=rows, bounds=range(lo_b, hi_b + 1), cache=cache)
        grow_lo = lo_b > 0 and any(tab.cdf(n, lo_b) > tail for n in rows)
        grow_hi = any(hi_b < n and 1 - tab.cdf(n, hi_b) > tail for n in rows)
        if not (grow_lo or grow_hi):
            return tab
        if grow_lo:
            lo_b = max(0, lo_b - max(2, (hi_b - lo_b) // 8))
        if grow_hi:
            hi_b = hi_b + max(2, (hi_b - lo_b) // 8)
