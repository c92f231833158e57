"""Nyström discretization of integral operators and their determinants.

Kernels on an interval are replaced by the symmetric matrix sqrt(w_i w_j) K(x_i, x_j)
over a Gauss-Legendre rule. Determinants det(I - zA) converge spectrally for the
analytic kernels used here; every determinant can be re-checked by doubling m.

Besides plain determinants this module provides
  * the trace polynomials d_1, d_2, d_3 of a determinant whose kernel is a power series
    in a small parameter,
  * determinant *jets*: Taylor coefficients of det(I - A(e)) for a matrix series
    A(e) = A_0 + e A_1 + ..., which is how derivatives of Airy-kernel determinants in
    the endpoint are obtained without numerical differentiation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla
from scipy import special

__all__ = [
    "QuadratureRule", "DiscretizedKernel", "ConvergenceError",
    "airy_pair", "bessel_j", "airy_derivative_polys", "airy_derivatives",
    "fredholm_det", "log_fredholm_det", "det_expansion_terms", "resolvent_trace",
    "determinant_jet", "airy_kernel_jet", "airy_upper_limit", "airy_nodes",
]

AIRY_RANGE = (-20.0, 40.0)
BESSEL_MAX_ORDER = 2200.0
DEFAULT_NODES = 64
AIRY_TAIL = 25.0          # semi-infinite intervals (t, inf) end at max(t, 0) + AIRY_TAIL


class ConvergenceError(RuntimeError):
    """Raised when doubling the quadrature moves a result beyond the requested tolerance."""


# ----------------------------------------------------------------- special functions

def airy_pair(x):
    """(Ai(x), Ai'(x)) on the working range [-20, 40]."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa < AIRY_RANGE[0]) or np.any(xa > AIRY_RANGE[1]):
        raise ValueError(f"Airy arguments must lie in {AIRY_RANGE}")
    ai, aip, _, _ = special.airy(xa)
    if np.ndim(x) == 0:
        return float(ai), float(aip)
    return ai, aip


def _ai(u):
    # no range check: kernels evaluate far into the decaying tail where Ai underflows to 0
    ai, aip, _, _ = special.airy(u)
    return ai, aip


def bessel_j(nu, x):
    """J_nu(x) for real nu in [-1/2, 2200] and x >= 0."""
    nua = np.asarray(nu, dtype=float)
    xa = np.asarray(x, dtype=float)
    if np.any(nua < -0.5) or np.any(nua > BESSEL_MAX_ORDER):
        raise ValueError("Bessel order must lie in [-1/2, 2200]")
    if np.any(xa < 0):
        raise ValueError("Bessel argument must be >= 0")
    out = special.jv(nua, xa)
    return float(out) if out.ndim == 0 else out


def airy_derivative_polys(order: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Integer polynomials (p_k, q_k) with Ai^(k)(u) = p_k(u) Ai(u) + q_k(u) Ai'(u).

    Coefficient arrays are in increasing powers of u. From Ai'' = u Ai:
    p_{k+1} = p_k' + u q_k and q_{k+1} = p_k + q_k'.
    """
    P = np.polynomial.polynomial
    p, q = np.array([1.0]), np.array([0.0])
    out = [(p, q)]
    for _ in range(order):
        p, q = P.polyadd(P.polyder(p), P.polymulx(q)), P.polyadd(p, P.polyder(q))
        out.append((np.atleast_1d(p), np.atleast_1d(q)))
    return out


def airy_derivatives(u, order: int) -> np.ndarray:
    """Stack of Ai^(k)(u) for k = 0..order, shape (order+1,) + u.shape."""
    u = np.asarray(u, dtype=float)
    ai, aip = _ai(u)
    P = np.polynomial.polynomial
    return np.stack([P.polyval(u, p) * ai + P.polyval(u, q) * aip
                     for p, q in airy_derivative_polys(order)])


# ----------------------------------------------------------------------- quadrature

@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre nodes and weights on a finite interval (a, b)."""
    nodes: np.ndarray
    weights: np.ndarray
    a: float
    b: float

    @classmethod
    def gauss_legendre(cls, a: float, b: float, m: int = DEFAULT_NODES) -> "QuadratureRule":
        if m < 1:
            raise ValueError("need at least one node")
        if not b > a:
            raise ValueError("empty interval")
        x, w = np.polynomial.legendre.leggauss(m)
        half = 0.5 * (b - a)
        return cls(a + half * (x + 1.0), half * w, float(a), float(b))

    @property
    def m(self) -> int:
        return len(self.nodes)

    def integrate(self, f: Callable) -> float:
        return float(np.dot(self.weights, f(self.nodes)))

    def refined(self, factor: int = 2) -> "QuadratureRule":
        return QuadratureRule.gauss_legendre(self.a, self.b, factor * self.m)


KernelFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class DiscretizedKernel:
    """The Nyström matrix sqrt(w_i w_j) K(x_i, x_j) of a kernel over a rule."""
    matrix: np.ndarray
    rule: QuadratureRule
    tag: str = ""
    kernel: KernelFn | None = field(default=None, compare=False, repr=False)

    @classmethod
    def assemble(cls, kernel: KernelFn, rule: QuadratureRule, tag: str = "") -> "DiscretizedKernel":
        x = rule.nodes
        sw = np.sqrt(rule.weights)
        A = sw[:, None] * kernel(x[:, None], x[None, :]) * sw[None, :]
        return cls(A, rule, tag, kernel)

    @property
    def m(self) -> int:
        return self.rule.m

    def refined(self, factor: int = 2) -> "DiscretizedKernel":
        if self.kernel is None:
            raise ValueError("kernel function unknown, cannot refine")
        return DiscretizedKernel.assemble(self.kernel, self.rule.refined(factor), self.tag)

    def __mul__(self, c: float) -> "DiscretizedKernel":
        k = self.kernel
        return DiscretizedKernel(c * self.matrix, self.rule, self.tag,
                                 None if k is None else (lambda x, y: c * k(x, y)))

    __rmul__ = __mul__

    def is_symmetric(self, tol: float = 1e-14) -> bool:
        A = self.matrix
        return bool(np.max(np.abs(A - A.T)) <= tol * max(1.0, np.max(np.abs(A))))


# ---------------------------------------------------------------------- determinants

def _lu_logdet(M: np.ndarray) -> tuple[float, float]:
    lu, piv = sla.lu_factor(M, check_finite=False)
    d = np.diag(lu)
    sign = (-1.0) ** np.count_nonzero(piv != np.arange(len(piv))) * np.prod(np.sign(d))
    return float(sign), float(np.sum(np.log(np.abs(d))))


def log_fredholm_det(kernel: DiscretizedKernel, z: float = 1.0) -> tuple[float, float]:
    """(sign, log|det(I - zA)|) from a pivoted LU factorization."""
    if kernel.m == 0:
        return 1.0, 0.0
    return _lu_logdet(np.eye(kernel.m) - z * kernel.matrix)


def fredholm_det(kernel: DiscretizedKernel, z: float = 1.0, tol: float | None = None) -> float:
    """det(I - zA). With ``tol`` the value is confirmed against a rule with twice the nodes."""
    if not -1.0 <= z <= 1.0:
        raise ValueError("z must lie in [-1, 1]")
    if z == 0:
        return 1.0
    sign, logabs = log_fredholm_det(kernel, z)
    val = sign * math.exp(logabs) if logabs > -745 else 0.0
    if tol is not None:
        fine = fredholm_det(kernel.refined(), z)
        if abs(fine - val) > tol:
            raise ConvergenceError(f"det changed by {abs(fine - val):.2e} when doubling m={kernel.m}")
        return fine
    return val


def _resolvent_solve(K0: DiscretizedKernel, z: float, B: np.ndarray) -> np.ndarray:
    M = np.eye(K0.m) - z * K0.matrix
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > 1e12:
        raise ConvergenceError(f"resolvent (I - zK0)^-1 is ill-conditioned (cond {cond:.2e})")
    return np.linalg.solve(M, B)


def resolvent_trace(K0: DiscretizedKernel, kernels: Sequence[DiscretizedKernel], z: float = 1.0) -> float:
    """tr of the product of (I - zK0)^{-1} K_i over the given kernels, in order."""
    if not kernels:
        raise ValueError("empty product")
    P = np.eye(K0.m)
    for K in kernels:
        P = P @ _resolvent_solve(K0, z, K.matrix)
    return float(np.trace(P))


def det_expansion_terms(K0: DiscretizedKernel, Ks: Sequence[DiscretizedKernel],
                        z: float = 1.0) -> list[float]:
    """[d_1, ..., d_j] for det(I - z(K0 + h K1 + h^2 K2 + ...)) = det(I - zK0) (1 + d_1 h + ...).

    j = len(Ks) <= 3; E_j = (I - zK0)^{-1} (z K_j).
    """
    j = len(Ks)
    if not 1 <= j <= 3:
        raise ValueError("trace formulas are available for 1 <= j <= 3")
    E = [_resolvent_solve(K0, z, z * K.matrix) for K in Ks]
    tr = np.trace
    t1 = tr(E[0])
    t11 = tr(E[0] @ E[0])
    out = [-t1]
    if j >= 2:
        t2 = tr(E[1])
        out.append(0.5 * t1 ** 2 - 0.5 * t11 - t2)
    if j >= 3:
        t3 = tr(E[2])
        t111 = tr(E[0] @ E[0] @ E[0])
        t12 = tr(E[0] @ E[1])
        out.append(-t1 ** 3 / 6 + 0.5 * t1 * t11 - t12 - t111 / 3 + t1 * t2 - t3)
    return [float(d) for d in out]


# ---------------------------------------------------------------------------- jets

def _series_matmul(X: list, Y: list, order: int) -> list:
    out = [None] * (order + 1)
    for i, Xi in enumerate(X):
        if Xi is None:
            continue
        for k, Yk in enumerate(Y[: order + 1 - i]):
            if Yk is None:
                continue
            term = Xi @ Yk
            out[i + k] = term if out[i + k] is None else out[i + k] + term
    return out


def determinant_jet(A: Sequence[np.ndarray], order: int | None = None) -> np.ndarray:
    """Taylor coefficients c_0..c_K of det(I - A_0 - e A_1 - e^2 A_2 - ...).

    log det(I - A(e)) = log det(I - A_0) - sum_j tr(C(e)^j)/j with C = (I - A_0)^{-1}(A - A_0),
    then the exponential is expanded as a power series.
    """
    K = len(A) - 1 if order is None else order
    n = A[0].shape[0]
    M = np.eye(n) - A[0]
    sign, logabs = _lu_logdet(M)
    det0 = sign * math.exp(logabs) if logabs > -745 else 0.0
    if K == 0:
        return np.array([det0])
    lu = sla.lu_factor(M, check_finite=False)
    C = [None] + [sla.lu_solve(lu, A[k], check_finite=False) if k < len(A) else None
                  for k in range(1, K + 1)]
    L = np.zeros(K + 1)
    P = C
    for j in range(1, K + 1):
        for k in range(j, K + 1):
            if P[k] is not None:
                L[k] -= np.trace(P[k]) / j
        if j < K:
            P = _series_matmul(P, C, K)
    # exp of the series L (L[0] = 0): e' = L' e
    E = np.zeros(K + 1)
    E[0] = 1.0
    for k in range(1, K + 1):
        E[k] = sum(i * L[i] * E[k - i] for i in range(1, k + 1)) / k
    return det0 * E


def airy_upper_limit(t: float) -> float:
    return max(t, 0.0) + AIRY_TAIL


def airy_nodes(t: float, m: int | None = None) -> int:
    """Node count for (t, max(t,0)+25): the default, raised on long oscillatory intervals."""
    if m is not None:
        return m
    length = airy_upper_limit(t) - t
    return max(DEFAULT_NODES, int(math.ceil(2.2 * length + 8 * max(0.0, -t))))


def _airy_taylor(u: np.ndarray, terms: int) -> np.ndarray:
    """Taylor coefficients of e -> Ai(u + e), from Ai'' = u Ai.

    Seeded with real Ai, Ai'; errors grow at most like exp(sqrt|u|) over |e| <= 1,
    harmless in absolute terms for |u| <= 45.
    """
    ai, aip = _ai(u)
    a = np.empty((terms,) + u.shape)
    a[0], a[1] = ai, aip
    a[2] = u * ai / 2
    for k in range(1, terms - 2):
        a[k + 2] = (u * a[k] + a[k - 1]) / ((k + 1) * (k + 2))
    return a


def _det_many(M: np.ndarray) -> np.ndarray:
    sign, logabs = np.linalg.slogdet(M)
    return sign * np.exp(logabs)


JET_COND_LIMIT = 4.0      # above this, contour integration replaces the log-series jet
CONTOUR_POINTS = 32
TAYLOR_TERMS = 56


def airy_kernel_jet(t: float, z: float = 1.0, order: int = 8, m: int | None = None,
                    method: str = "auto") -> np.ndarray:
    """F_z^{(k)}(t) for k = 0..order, F_z(t) = det(I - z V_Ai) on (t, inf).

    Moving the endpoint by e shifts both kernel arguments, so
    F_z(t + e) = det(I - z/2 Ai(e + (x+y)/2)) on the fixed nodes of (t, x_max).
    Two ways to get the Taylor coefficients in e:
      "series"  log-det power series; keeps relative accuracy where F is near 1, but
                loses everything once I - zV is nearly singular (left tail);
      "contour" Cauchy integral over |e| = 1 with complex shifts; absolute accuracy
                about 1e-12 for order 8 regardless of conditioning.
    "auto" picks by the condition number of I - zV.
    """
    if method not in ("auto", "series", "contour"):
        raise ValueError("method must be auto, series or contour")
    # the contour reaches one unit left of t, so resolve the interval starting there
    rule = QuadratureRule.gauss_legendre(t, airy_upper_limit(t), airy_nodes(t - 1.0, m))
    x = rule.nodes
    sw = np.sqrt(rule.weights)
    fact = np.array([math.factorial(k) for k in range(order + 1)], dtype=float)
    W = sw[:, None] * sw[None, :]
    u = 0.5 * (x[:, None] + x[None, :])
    if method == "auto":
        A0 = 0.5 * z * W * _ai(u)[0]
        method = "series" if np.linalg.cond(np.eye(len(x)) - A0) < JET_COND_LIMIT else "contour"
    if method == "series":
        D = airy_derivatives(u, order)
        A = [0.5 * z * W * D[k] / math.factorial(k) for k in range(order + 1)]
        return determinant_jet(A, order) * fact
    N = max(CONTOUR_POINTS, 2 * order + 8)
    shifts = np.exp(2j * np.pi * np.arange(N) / N)
    coeffs = _airy_taylor(u, TAYLOR_TERMS).reshape(TAYLOR_TERMS, -1)
    ai_shifted = (shifts[:, None] ** np.arange(TAYLOR_TERMS)[None, :]) @ coeffs
    M = np.eye(len(x)) - 0.5 * z * W * ai_shifted.reshape(N, len(x), len(x))
    c = np.fft.fft(_det_many(M)) / N
    return c[: order + 1].real * fact
