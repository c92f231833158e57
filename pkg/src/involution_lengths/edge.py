"""Soft-edge (Tracy-Widom) and hard-edge (Bessel) gap probabilities.

F_z(t) = det(I - z V_Ai) on (t, inf) with V_Ai(x, y) = Ai((x+y)/2) / 2.  The three
Tracy-Widom laws are

    F_1 = F_+,    F_2 = F_+ F_-,    F_4 = (F_+ + F_-) / 2,

and the hard-edge laws are determinants of V_nu(x, y) = J_nu(sqrt(xy)) / 2 on (0, sqrt(s)):

    E_1(s; a) = det(I - V_nu),                          nu = 2a + 1,
    E_4(s; a) = (det(I - V_nu) + det(I + V_nu)) / 2,     nu = a - 1.

Derivatives in t come from exact Taylor jets of the determinant (operators.airy_kernel_jet).
On the working interval those jets are sampled once at Chebyshev points and interpolated,
order by order, so later evaluations are cheap. The samples are cached on disk.
"""
from __future__ import annotations

import functools
import hashlib
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import Chebyshev

from .operators import (
    AIRY_TAIL, DiscretizedKernel, QuadratureRule, airy_kernel_jet, bessel_j, fredholm_det,
)

__all__ = [
    "TW_INTERVAL", "CHEB_POINTS", "JET_ORDER", "REFERENCE_MOMENTS",
    "ChebRepresentation", "soft_edge_representation", "soft_edge_jets", "tw_jets",
    "tracy_widom_cdf", "tw_derivative", "tw_moment", "tw_moment_by_parts",
    "bessel_kernel", "bessel_gap_det", "hard_edge_gap", "hard_edge_order",
    "hard_to_soft_scale", "hard_to_soft_probe",
]

TW_INTERVAL = (-8.0, 5.0)
CHEB_POINTS = 240
JET_ORDER = 7
DERIVATIVE_MARGIN = 0.5
MOMENT_RANGE = (-14.0, 16.0)
BESSEL_CUT = 14.0

# high-precision moments M_{beta,j} = int t^j dF_beta, j = 1..5, for comparison
REFERENCE_MOMENTS = {
    1: (-1.2065335745820248144, 3.0635043011750395555, -6.9776361359603273064,
        21.456738760271069024, -61.491204602495471525),
    4: (-3.2624279028551757547, 11.678883262873371708, -44.683272522328257833,
        180.40053054887040465, -762.06682373066523607),
}


def _check_beta(beta: int, allowed=(1, 2, 4)) -> int:
    if beta not in allowed:
        raise ValueError(f"beta must be one of {allowed}")
    return beta


# ------------------------------------------------------------------ soft edge

@dataclass(frozen=True)
class ChebRepresentation:
    """Chebyshev interpolants of F_z, F_z', ..., F_z^(order) on [s0, s1].

    Each derivative order is interpolated from its own exact samples, so the
    accuracy does not degrade with k the way spectral differentiation would.
    """
    z: float
    interval: tuple[float, float]
    samples: np.ndarray          # (order+1, N) values at the first-kind Chebyshev points

    @property
    def order(self) -> int:
        return self.samples.shape[0] - 1

    @property
    def degree(self) -> int:
        return self.samples.shape[1] - 1

    @functools.cached_property
    def series(self) -> list[Chebyshev]:
        s0, s1 = self.interval
        x = chebyshev_points(s0, s1, self.samples.shape[1])
        return [Chebyshev.fit(x, row, self.degree, domain=[s0, s1]) for row in self.samples]

    def contains(self, t, margin: float = 0.0) -> bool:
        s0, s1 = self.interval
        ta = np.asarray(t)
        return bool(np.all((ta >= s0 + margin) & (ta <= s1 - margin)))

    def __call__(self, t, k: int = 0):
        if not 0 <= k <= self.order:
            raise ValueError(f"derivative order must lie in 0..{self.order}")
        if not self.contains(t):
            raise ValueError(f"t outside {self.interval}")
        return self.series[k](t)


def chebyshev_points(a: float, b: float, n: int) -> np.ndarray:
    k = np.arange(n)
    return 0.5 * (a + b) + 0.5 * (b - a) * np.cos(np.pi * (k + 0.5) / n)[::-1]


def _cache_dir() -> Path:
    env = os.environ.get("INVLEN_CACHE_DIR")
    return Path(env) if env else Path.home() / ".cache" / "involution_lengths"


def _cached_array(key: str, compute) -> np.ndarray:
    """compute() stored under ~/.cache (or INVLEN_CACHE_DIR), keyed by a hash of ``key``."""
    path = _cache_dir() / (key.split("|")[0] + "-" + hashlib.sha1(key.encode()).hexdigest()[:16] + ".npy")
    use_cache = not os.environ.get("INVLEN_NO_CACHE")
    if use_cache and path.exists():
        return np.load(path)
    arr = compute()
    if use_cache:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp.npy")
        np.save(tmp, arr)
        os.replace(tmp, path)
    return arr


@functools.lru_cache(maxsize=64)
def soft_edge_representation(z: float = 1.0, interval: tuple[float, float] = TW_INTERVAL,
                             points: int = CHEB_POINTS, order: int = JET_ORDER) -> ChebRepresentation:
    """Sample jets of F_z at Chebyshev points (about 20 s on first use, then cached)."""
    def sample():
        x = chebyshev_points(*interval, points)
        return np.stack([airy_kernel_jet(float(t), z, order) for t in x], axis=1)
    samples = _cached_array(f"airyjet|{z!r}|{interval!r}|{points}|{order}|{AIRY_TAIL}", sample)
    return ChebRepresentation(float(z), tuple(interval), samples)


def soft_edge_jets(t, z: float = 1.0, order: int = JET_ORDER, points: int = CHEB_POINTS) -> np.ndarray:
    """F_z^(k)(t), k = 0..order, for scalar or array t; shape t.shape + (order+1,).

    Uses the cached representation inside the working interval, direct jets outside.
    """
    ta = np.asarray(t, dtype=float)
    flat = ta.reshape(-1)
    out = np.empty((flat.size, order + 1))
    rep = soft_edge_representation(z, TW_INTERVAL, points) if order <= JET_ORDER else None
    inside = np.zeros(flat.size, bool)
    if rep is not None:
        inside = (flat >= rep.interval[0]) & (flat <= rep.interval[1])
        if inside.any():
            for k in range(order + 1):
                out[inside, k] = rep.series[k](flat[inside])
    for i in np.flatnonzero(~inside):
        out[i] = airy_kernel_jet(float(flat[i]), z, order)
    return out.reshape(ta.shape + (order + 1,))


def tw_jets(beta: int, t, order: int = JET_ORDER, points: int = CHEB_POINTS) -> np.ndarray:
    """F_beta^(k)(t), k = 0..order, assembled from the z = +1 and z = -1 jets."""
    _check_beta(beta)
    plus = soft_edge_jets(t, 1.0, order, points)
    if beta == 1:
        return plus
    minus = soft_edge_jets(t, -1.0, order, points)
    if beta == 4:
        return 0.5 * (plus + minus)
    out = np.zeros_like(plus)
    for k in range(order + 1):
        for i in range(k + 1):
            out[..., k] += math.comb(k, i) * plus[..., i] * minus[..., k - i]
    return out


def tracy_widom_cdf(beta: int, t):
    """F_beta(t) for beta in {1, 2, 4}."""
    v = tw_jets(beta, t, 0)[..., 0]
    return float(v) if np.ndim(t) == 0 else v


def tw_derivative(beta: int, k: int, t):
    """F_beta^(k)(t), 1 <= k <= 7, for t at least 0.5 inside the working interval."""
    if not 1 <= k <= JET_ORDER:
        raise ValueError(f"k must lie in 1..{JET_ORDER}")
    s0, s1 = TW_INTERVAL
    ta = np.asarray(t, dtype=float)
    if np.any(ta < s0 + DERIVATIVE_MARGIN) or np.any(ta > s1 - DERIVATIVE_MARGIN):
        raise ValueError(f"t must lie in [{s0 + DERIVATIVE_MARGIN}, {s1 - DERIVATIVE_MARGIN}]")
    v = tw_jets(beta, ta, k)[..., k]
    return float(v) if ta.ndim == 0 else v


def _moment_rule(panels=((-14.0, -8.0, 48), (-8.0, -2.0, 64), (-2.0, 5.0, 64), (5.0, 16.0, 48))):
    xs, ws = [], []
    for a, b, m in panels:
        r = QuadratureRule.gauss_legendre(a, b, m)
        xs.append(r.nodes)
        ws.append(r.weights)
    return np.concatenate(xs), np.concatenate(ws)


@functools.lru_cache(maxsize=8)
def _density_on_moment_rule(beta: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    x, w = _moment_rule()
    key = f"twdensity|{beta}|{x.size}|{x[0]!r}|{x[-1]!r}|{TW_INTERVAL!r}|{CHEB_POINTS}|{AIRY_TAIL}"
    return x, w, _cached_array(key, lambda: tw_jets(beta, x, 1)[:, 1])


def tw_moment(beta: int, j: int) -> float:
    """M_{beta,j} = int t^j F_beta'(t) dt, 0 <= j <= 5.

    Integrated over [-14, 16]; outside, t^j F' is below 1e-14 for every beta.
    """
    _check_beta(beta)
    if not 0 <= j <= 5:
        raise ValueError("j must lie in 0..5")
    x, w, dens = _density_on_moment_rule(beta)
    return float(np.dot(w, x ** j * dens))


def tw_moment_by_parts(beta: int, j: int) -> float:
    """Same moment from the CDF alone: -j int_{t<0} t^{j-1} F + j int_{t>0} t^{j-1} (1 - F)."""
    _check_beta(beta)
    if j == 0:
        return 1.0
    lo, hi = MOMENT_RANGE
    left = QuadratureRule.gauss_legendre(lo, 0.0, 96)
    right = QuadratureRule.gauss_legendre(0.0, hi, 96)
    Fl = tracy_widom_cdf(beta, left.nodes)
    Fr = tracy_widom_cdf(beta, right.nodes)
    return float(-j * np.dot(left.weights, left.nodes ** (j - 1) * Fl)
                 + j * np.dot(right.weights, right.nodes ** (j - 1) * (1.0 - Fr)))


# ------------------------------------------------------------------ hard edge

def hard_edge_order(beta: int, a: float) -> float:
    """Bessel order nu of the kernel behind E_beta^hard(s; a)."""
    _check_beta(beta, (1, 4))
    return 2 * a + 1 if beta == 1 else a - 1


def _bessel_nodes(nu: float, lo: float, hi: float) -> int:
    # xi*eta runs up to hi^2; each unit of argument beyond the turning point nu oscillates
    span = max(0.0, hi * hi - max(nu, lo * lo))
    return max(64, int(math.ceil(48 + 0.9 * span ** 0.75 + 0.25 * (hi * hi - lo * lo) ** 0.5)))


def bessel_kernel(nu: float, s: float, m: int | None = None, cut: float = BESSEL_CUT) -> DiscretizedKernel:
    """V_nu on (0, sqrt(s)) after x = xi^2, i.e. J_nu(xi eta)/2 with weight 2 xi on (0, s^(1/4)).

    The substitution removes the sqrt(x) branch point of J_nu(sqrt(xy)) for odd integer
    orders. Where xi*eta < nu - cut*nu^(1/3) the kernel is below 1e-20 and the left part
    of the interval is dropped.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    hi = s ** 0.25
    lo = 0.0
    if nu > 0:
        edge = nu - cut * nu ** (1 / 3)
        if edge > 0:
            lo = min(edge / hi, 0.999 * hi)
    m = _bessel_nodes(nu, lo, hi) if m is None else m
    base = QuadratureRule.gauss_legendre(lo, hi, m)
    rule = QuadratureRule(base.nodes, 2.0 * base.nodes * base.weights, lo, hi)
    return DiscretizedKernel.assemble(lambda x, y: 0.5 * bessel_j(nu, x * y), rule, f"bessel{nu}")


def bessel_gap_det(nu: float, s: float, z: float = 1.0, m: int | None = None) -> float:
    """det(I - z V_nu) on (0, sqrt(s))."""
    if s == 0:
        return 1.0
    return fredholm_det(bessel_kernel(nu, s, m), z)


def hard_edge_gap(beta: int, s: float, a: float, m: int | None = None) -> float:
    """E_beta^hard(s; a) for beta in {1, 4}."""
    nu = hard_edge_order(beta, a)
    if nu < -0.5:
        raise ValueError("Bessel order below -1/2")
    if s == 0:
        return 1.0
    K = bessel_kernel(nu, s, m)
    if beta == 1:
        return fredholm_det(K, 1.0)
    return 0.5 * (fredholm_det(K, 1.0) + fredholm_det(K, -1.0))


def hard_to_soft_scale(nu: float) -> float:
    """h_nu = 2^(-1/3) nu^(-2/3)."""
    return 2.0 ** (-1 / 3) * nu ** (-2 / 3)


def hard_to_soft_probe(beta: int, nu: float, t: float, m: int = 0) -> float:
    """E_beta^hard(phi_nu(t); nu_beta) - F_beta(t) - sum_{j<=m} E_{beta,j}(t) h_nu^j.

    phi_nu(t) = (nu (1 - h_nu t))^2, and nu_beta is chosen so that the kernel order is nu.
    """
    from .expansions import term_polynomials, apply_terms
    _check_beta(beta, (1, 4))
    if not 0 <= m <= 3:
        raise ValueError("m must lie in 0..3")
    if nu < 20:
        raise ValueError("nu must be at least 20")
    h = hard_to_soft_scale(nu)
    omega = nu * (1.0 - h * t)
    a = (nu - 1) / 2 if beta == 1 else nu + 1
    exact = hard_edge_gap(beta, omega * omega, a)
    jets = tw_jets(beta, t, JET_ORDER)
    approx = jets[0]
    for j in range(1, m + 1):
        approx += apply_terms(term_polynomials("hard2soft", beta, j), t, jets) * h ** j
    return float(exact - approx)
