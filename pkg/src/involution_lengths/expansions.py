"""Finite-size corrections: term tables, expansions and de-Poissonization.

Every correction term has the linear form

    sum_k p_k(t) F^(k)(t)

with exact rational polynomials p_k.  Such an expression is a :class:`DiffExpr`
(derivative order -> polynomial).  The reference term tables are stored verbatim as
strings and parsed once; the small algebra on DiffExpr (differentiate, multiply by a
polynomial, integrate against t^j) is used to re-derive tables from one another, which
is how the transcriptions are audited.

Evaluation maps for the three cases live on :class:`~involution_lengths.cases.ProblemCase`.
"""
from __future__ import annotations

import functools
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import mpmath
import numpy as np

from .cases import ProblemCase, get_case

__all__ = [
    "Poly", "DiffExpr", "TermTable", "TERM_KINDS", "term_polynomials", "term_table", "apply_terms",
    "transcription_audit", "scaled_variable", "scaled_variable_slope",
    "poissonized_expansion", "cdf_expansion", "pdf_expansion", "derived_cdf_terms",
    "derived_pdf_terms", "MomentPoly", "mu_nu_expressions", "derived_mu_nu",
    "mu_nu_coefficients", "mean_variance_expansion", "REFERENCE_MU", "REFERENCE_NU",
    "jasz_coefficients", "JASZ_INVOLUTION_SERIES", "depoisson_sandwich", "depoisson_gap",
    "involution_asymptotics", "log_involution_number", "fit_mean_variance", "FitResult",
]

F = Fraction

# ----------------------------------------------------------------- polynomials


class Poly(tuple):
    """Exact polynomial in t, coefficients in increasing powers, no trailing zeros."""

    def __new__(cls, coeffs: Iterable = ()):
        c = [F(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        return super().__new__(cls, c)

    @classmethod
    def monomial(cls, c, k: int) -> "Poly":
        return cls([0] * k + [c])

    def __add__(self, other):
        other = other if isinstance(other, Poly) else Poly([other])
        n = max(len(self), len(other))
        return Poly([(self[i] if i < len(self) else 0) + (other[i] if i < len(other) else 0)
                     for i in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return Poly([-c for c in self])

    def __sub__(self, other):
        return self + (-(other if isinstance(other, Poly) else Poly([other])))

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return Poly([c * F(other) for c in self])
        out = [F(0)] * max(0, len(self) + len(other) - 1)
        for i, a in enumerate(self):
            for j, b in enumerate(other):
                out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def derivative(self) -> "Poly":
        return Poly([i * c for i, c in enumerate(self)][1:])

    def __call__(self, t):
        acc = 0.0 * np.asarray(t, dtype=float)
        for c in reversed(self):
            acc = acc * t + float(c)
        return acc

    def __repr__(self):
        if not self:
            return "0"
        return " + ".join(f"({c})t^{i}" for i, c in enumerate(self) if c)


_TERM = re.compile(r"\s*([+-])?\s*(\d+)?(?:/(\d+))?\s*(t(?:\^(\d+))?)?")


def parse_poly(text: str) -> Poly:
    """'9/175 + 32/175 t^3' -> Poly. Terms are 'a/b t^k' with optional pieces."""
    text = text.replace("−", "-").strip()
    pos, out = 0, Poly()
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse polynomial {text!r} at {pos}")
        sign, num, den, tee, power = m.groups()
        if num is None and tee is None:
            raise ValueError(f"empty term in {text!r}")
        c = F(int(num) if num else 1, int(den) if den else 1)
        if sign == "-":
            c = -c
        k = (int(power) if power else 1) if tee else 0
        out = out + Poly.monomial(c, k)
        pos = m.end()
    return out


# -------------------------------------------------------- derivative expressions

@dataclass(frozen=True)
class DiffExpr:
    """sum_k p_k(t) F^(k)(t); ``terms`` maps k -> Poly, zero polynomials dropped."""
    terms: Mapping[int, Poly] = field(default_factory=dict)

    def __post_init__(self):
        clean = {k: p for k, p in sorted(self.terms.items()) if p}
        object.__setattr__(self, "terms", clean)

    @classmethod
    def of(cls, spec: Mapping[int, str]) -> "DiffExpr":
        return cls({k: parse_poly(v) for k, v in spec.items()})

    @classmethod
    def derivative_of_F(cls, k: int) -> "DiffExpr":
        return cls({k: Poly([1])})

    def __add__(self, other: "DiffExpr") -> "DiffExpr":
        out = dict(self.terms)
        for k, p in other.terms.items():
            out[k] = out.get(k, Poly()) + p
        return DiffExpr(out)

    def __neg__(self):
        return DiffExpr({k: -p for k, p in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        """Multiply by a number or a Poly."""
        return DiffExpr({k: p * c for k, p in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, DiffExpr) and dict(self.terms) == dict(other.terms)

    def __hash__(self):
        return hash(tuple(self.terms.items()))

    def D(self, times: int = 1) -> "DiffExpr":
        """Derivative in t."""
        e = self
        for _ in range(times):
            out: dict[int, Poly] = {}
            for k, p in e.terms.items():
                out[k] = out.get(k, Poly()) + p.derivative()
                out[k + 1] = out.get(k + 1, Poly()) + p
            e = DiffExpr(out)
        return e

    @property
    def max_order(self) -> int:
        return max(self.terms, default=-1)

    def __call__(self, t, jets: np.ndarray):
        """Evaluate with jets[..., k] = F^(k)(t)."""
        acc = 0.0
        for k, p in self.terms.items():
            acc = acc + p(t) * jets[..., k]
        return acc

    def moment(self, j: int) -> "MomentPoly":
        """int t^j (this) dt as a polynomial in the moments M_i = int t^i F'(t) dt.

        Integration by parts: int t^a F^(k) = (-1)^(k-1) a!/(a-k+1)! M_{a-k+1} for k <= a+1,
        and 0 for larger k (boundary terms vanish for k >= 1).
        """
        out = MomentPoly()
        for k, p in self.terms.items():
            if k == 0:
                raise ValueError("moments of F itself diverge")
            for i, c in enumerate(p):
                a = i + j
                if k <= a + 1:
                    coef = c * (-1) ** (k - 1) * F(math.factorial(a), math.factorial(a - k + 1))
                    out = out + MomentPoly.var(a - k + 1) * coef
        return out

    def __repr__(self):
        return " + ".join(f"[{p!r}] F^({k})" for k, p in self.terms.items()) or "0"


# ------------------------------------------------------------ reference term tables

TERM_KINDS = ("hard2soft", "poisson", "cdf", "cdf-inv", "pdf")

_HARD2SOFT = {
    1: {1: "3/10 t^2", 2: "-2/5"},
    2: {1: "9/175 + 32/175 t^3", 2: "-32/175 t + 9/200 t^4", 3: "-3/25 t^2", 4: "2/25"},
    3: {1: "268/7875 t + 1037/7875 t^4", 2: "-33/350 t^2 + 48/875 t^5",
        3: "-578/7875 - 16/125 t^3 + 9/2000 t^6", 4: "64/875 t - 9/500 t^4",
        5: "3/125 t^2", 6: "-4/375"},
}

_POISSON = {
    1: {1: "-1/60 t^2", 2: "-1/5"},
    2: {1: "9/700 + 2/1575 t^3", 2: "11/525 t + 1/7200 t^4", 3: "1/300 t^2", 4: "1/50"},
    3: {1: "-34/7875 t - 41/283500 t^4", 2: "-13/3600 t^2 - 1/47250 t^5",
        3: "-289/31500 - 19/31500 t^3 - 1/1296000 t^6", 4: "-11/2625 t - 1/36000 t^4",
        5: "-1/3000 t^2", 6: "-1/750"},
}

_CDF_FPF = {
    1: {1: "-1/60 t^2", 2: "-6/5"},
    2: {1: "-551/700 + 2/1575 t^3", 2: "-43/175 t + 1/7200 t^4", 3: "1/50 t^2", 4: "18/25"},
    3: {1: "-1144/7875 t - 41/283500 t^4", 2: "11/1680 t^2 - 1/47250 t^5",
        3: "20413/15750 + 9/3500 t^3 - 1/1296000 t^6", 4: "258/875 t - 1/6000 t^4",
        5: "-3/250 t^2", 6: "-36/125"},
}

_CDF_INV = {
    1: {},
    2: {1: "-1/60 t^2", 2: "-6/5"},
    3: {1: "1/6 t"},
    4: {1: "-363/350 + 2/1575 t^3", 2: "-43/175 t + 1/7200 t^4", 3: "1/50 t^2", 4: "18/25"},
    5: {1: "-1/90 t^2", 2: "1/10 - 1/360 t^3", 3: "-1/5 t"},
    6: {1: "-323/2625 t - 41/283500 t^4", 2: "31/1260 t^2 - 1/47250 t^5",
        3: "12569/7875 + 9/3500 t^3 - 1/1296000 t^6", 4: "258/875 t - 1/6000 t^4",
        5: "-3/250 t^2", 6: "-36/125"},
    7: {1: "117/1400 + 1/675 t^3", 2: "-171/700 t + 1/2520 t^4", 3: "-41/1400 t^2 + 1/43200 t^5",
        4: "-3/25 + 1/300 t^3", 5: "3/25 t"},
}

_PDF = {
    "incr-fpf": {
        1: {1: "-1/30 t", 2: "-1/60 t^2", 3: "-139/120"},
        2: {1: "2/525 t^2", 2: "-8711/8400 + 23/12600 t^3", 3: "-1763/8400 t + 1/7200 t^4",
            4: "139/7200 t^2", 5: "6437/9600"},
        3: {1: "-761/5250 - 41/70875 t^3", 2: "-1573/12000 t - 71/283500 t^4",
            3: "837/56000 t^2 - 13/504000 t^5", 4: "514831/336000 + 613/302400 t^3 - 1/1296000 t^6",
            5: "535313/2016000 t - 139/864000 t^4", 6: "-6437/576000 t^2", 7: "-2085527/8064000"},
    },
    "decr-fpf": {
        1: {1: "-1/30 t", 2: "-1/60 t^2", 3: "-31/30"},
        2: {1: "2/525 t^2", 2: "-551/525 + 23/12600 t^3", 3: "-467/2100 t + 1/7200 t^4",
            4: "31/1800 t^2", 5: "317/600"},
        3: {1: "-18/125 - 41/70875 t^3", 2: "-671/5250 t - 71/283500 t^4",
            3: "17/1000 t^2 - 13/504000 t^5", 4: "7109/5250 + 181/75600 t^3 - 1/1296000 t^6",
            5: "31313/126000 t - 31/216000 t^4", 6: "-317/36000 t^2", 7: "-22403/126000"},
    },
    "inv": {
        1: {},
        2: {1: "-1/30 t", 2: "-1/60 t^2", 3: "-139/120"},
        3: {1: "1/6", 2: "1/6 t"},
        4: {1: "2/525 t^2", 2: "-10811/8400 + 23/12600 t^3", 3: "-1763/8400 t + 1/7200 t^4",
            4: "139/7200 t^2", 5: "6437/9600"},
        5: {1: "-1/45 t", 2: "-7/360 t^2", 3: "-19/240 - 1/360 t^3", 4: "-139/720 t"},
        6: {1: "-1933/15750 - 41/70875 t^3", 2: "-291/4000 t - 71/283500 t^4",
            3: "16633/504000 t^2 - 13/504000 t^5", 4: "612131/336000 + 613/302400 t^3 - 1/1296000 t^6",
            5: "535313/2016000 t - 139/864000 t^4", 6: "-6437/576000 t^2", 7: "-2085527/8064000"},
        7: {1: "1/225 t^2", 2: "-331/2016 + 29/9450 t^3", 3: "-15509/50400 t + 31/60480 t^4",
            4: "-6287/302400 t^2 + 1/43200 t^5", 5: "-47/2304 + 139/43200 t^3", 6: "6437/57600 t"},
    },
}

# headings for the transcription audit listing
_SOURCES = {
    "hard2soft": "hard-to-soft transition terms E_{beta,j}",
    "poisson": "Poissonized terms F_{beta,j}",
    "cdf": "fixed-point-free CDF terms F_{o,j}",
    "cdf-inv": "involution CDF terms F_{inv,j}",
    "pdf": "density terms F*_{o,j}",
}


@dataclass(frozen=True)
class TermTable:
    """All reference terms of one kind (and case, for densities): j -> DiffExpr."""
    kind: str
    case: str | None
    entries: Mapping[int, DiffExpr]

    @property
    def max_j(self) -> int:
        return max(self.entries)

    def __getitem__(self, j: int) -> DiffExpr:
        if j == 0:
            return DiffExpr.derivative_of_F(1 if self.kind == "pdf" else 0)
        if j not in self.entries:
            raise KeyError(f"{self.kind} term j={j} is not transcribed (available 1..{self.max_j})")
        return self.entries[j]


def _resolve(kind: str, which) -> tuple[dict, str | None]:
    if kind not in TERM_KINDS:
        raise ValueError(f"kind must be one of {TERM_KINDS}")
    if kind in ("hard2soft", "poisson"):
        beta = which.beta if isinstance(which, ProblemCase) else which
        if isinstance(beta, str):
            beta = get_case(beta).beta
        if beta not in (1, 4):
            raise ValueError("beta must be 1 or 4")
        return (_HARD2SOFT if kind == "hard2soft" else _POISSON), None
    case = get_case(which)
    if kind == "cdf":
        if case.tag == "inv":
            return _CDF_INV, case.tag
        return _CDF_FPF, None
    if kind == "cdf-inv":
        return _CDF_INV, "inv"
    return _PDF[case.tag], case.tag


_RAW = {"hard2soft": _HARD2SOFT, "poisson": _POISSON, "cdf": _CDF_FPF, "cdf-inv": _CDF_INV}


@functools.lru_cache(maxsize=None)
def _parsed(kind: str, case: str | None) -> TermTable:
    raw = _PDF[case] if kind == "pdf" else _RAW[kind]
    return TermTable(kind, case, {j: DiffExpr.of(spec) for j, spec in raw.items()})


def term_table(kind: str, which=None) -> TermTable:
    _, case = _resolve(kind, which)
    if kind == "cdf" and case == "inv":
        kind = "cdf-inv"
    return _parsed(kind, case if kind == "pdf" else None)


def term_polynomials(kind: str, which, j: int) -> DiffExpr:
    """The reference term of order j; ``which`` is beta (hard2soft/poisson) or a case."""
    if j < 1:
        raise KeyError("terms start at j = 1")
    return term_table(kind, which)[j]


def apply_terms(expr: DiffExpr, t, jets: np.ndarray):
    return expr(t, jets)


def transcription_audit() -> str:
    """Plain-text listing of every stored term, for review against the source."""
    lines = []
    tables = [("hard2soft", 1), ("poisson", 1), ("cdf", "incr-fpf"), ("cdf-inv", "inv"),
              ("pdf", "incr-fpf"), ("pdf", "decr-fpf"), ("pdf", "inv")]
    for kind, which in tables:
        tab = term_table(kind, which)
        head = _SOURCES[kind] + (f" [{tab.case}]" if kind == "pdf" else "")
        lines.append(head)
        for j, e in sorted(tab.entries.items()):
            lines.append(f"  j={j}: {e!r}")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------ re-derivation of the tables

def derived_cdf_terms(j: int) -> DiffExpr:
    """Fixed-point-free CDF terms obtained from the Poissonized ones.

    The de-Poissonization shift (Jasz expansion at r = n) turns the Poissonized terms
    into the fixed-n ones through the combinations below.
    """
    P = term_table("poisson", 1)
    Fk = DiffExpr.derivative_of_F
    t = Poly([0, 1])
    if j == 1:
        return P[1] - Fk(2)
    if j == 2:
        return (P[2] - Fk(1) * F(5, 6) - Fk(2) * (t * F(1, 3)) - P[1].D(2) + Fk(4) * F(1, 2))
    if j == 3:
        return (P[3] - Fk(1) * (t * F(7, 36)) - P[1].D() * F(3, 2) - Fk(2) * (t * t * F(1, 36))
                - P[1].D(2) * (t * F(1, 3)) - P[2].D(2) + Fk(3) * F(7, 6) + Fk(4) * (t * F(1, 3))
                + P[1].D(4) * F(1, 2) - Fk(6) * F(1, 6))
    raise KeyError("derivation available for j = 1..3")


def derived_pdf_terms(case, j: int) -> DiffExpr:
    """Density terms from CDF terms by central differencing around the midpoint.

    F(t + h/2) - F(t - h/2) = sum_i h^(2i+1) / (4^i (2i+1)!) F^(2i+1)(t); the step h
    relates to the expansion parameter as h^2 = c^2 (2n)^(-1/3) (c = 1 incr, 2 decr), and
    as h = n^(-1/6) for involutions.
    """
    case = get_case(case)
    cdf = term_table("cdf", case)
    out = DiffExpr()
    if case.tag == "inv":
        for i in range(0, j // 2 + 1):
            w = F(1, 4 ** i * math.factorial(2 * i + 1))
            out = out + cdf[j - 2 * i].D(2 * i + 1) * w
        return out
    c2 = 1 if case.tag == "incr-fpf" else 4
    for i in range(0, j + 1):
        w = F(c2 ** i, 4 ** i * math.factorial(2 * i + 1))
        out = out + cdf[j - i].D(2 * i + 1) * w
    return out


# ------------------------------------------------------------ scaling variable

def scaled_variable(nu, r):
    """t_nu(r) = (nu - 2 sqrt(r)) / r^(1/6)."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("r must be positive")
    t = (np.asarray(nu, dtype=float) - 2.0 * np.sqrt(r)) / r ** (1 / 6)
    return float(t) if t.ndim == 0 else t


def scaled_variable_slope(nu, r):
    """d/dr t_nu(r) = -r^(-2/3) - t_nu(r) / (6r)."""
    return -float(r) ** (-2 / 3) - scaled_variable(nu, r) / (6.0 * r)


def _jets(beta: int, t, order: int):
    from .edge import tw_jets
    return tw_jets(beta, t, order)


def _order_needed(table: TermTable, m: int) -> int:
    return max([table[j].max_order for j in range(0, m + 1)] + [0])


def poissonized_expansion(case, r: float, l, m: int = 3):
    """F_beta(t) + sum_{j<=m} F_{beta,j}(t) r_o^(-j/3) at t = t_{l_o}(r_o)."""
    case = get_case(case)
    tab = term_table("poisson", case.beta)
    if not 0 <= m <= tab.max_j:
        raise KeyError(f"m must lie in 0..{tab.max_j}")
    rc = case.r_circ(r)
    t = scaled_variable(case.l_circ(np.asarray(l, dtype=float)), rc)
    jets = _jets(case.beta, t, _order_needed(tab, m))
    return sum(tab[j](t, jets) * rc ** (-j / 3) for j in range(m + 1))


def cdf_evaluation_point(case, n, l):
    case = get_case(case)
    return scaled_variable(case.l_star(np.asarray(l, dtype=float)), case.gamma * n)


def cdf_expansion(case, n: int, l, m: int = 3):
    """Approximation of p(n; l) = P(L <= l) (P(L <= 2l) for decr-fpf).

    fixed-point-free: F_beta(t) + sum F_{o,j}(t) (2n)^(-j/3) at t = t_{l_o}(2n), m <= 3;
    involutions:      F_1(t) + sum F_{inv,j}(t) n^(-j/6) at t = t_{l+1}(n), m <= 7.
    """
    case = get_case(case)
    tab = term_table("cdf", case)
    if not 0 <= m <= tab.max_j:
        raise KeyError(f"m must lie in 0..{tab.max_j}")
    t = cdf_evaluation_point(case, n, l)
    jets = _jets(case.beta, t, _order_needed(tab, m))
    step = (case.gamma * n) ** (-case.gamma / 6)
    return sum(tab[j](t, jets) * step ** j for j in range(m + 1))


def pdf_evaluation_point(case, n, l):
    case = get_case(case)
    return scaled_variable(case.l_star(np.asarray(l, dtype=float) - 0.5), case.gamma * n)


def pdf_expansion(case, n: int, l, m: int = 2):
    """Approximation of p(n; l) - p(n; l-1) divided by the spacing h_o (a density in t).

    Evaluated at the midpoint t = t_{l*(l - 1/2)}(gamma n).
    """
    case = get_case(case)
    tab = term_table("pdf", case)
    if not 0 <= m <= tab.max_j:
        raise KeyError(f"m must lie in 0..{tab.max_j}")
    t = pdf_evaluation_point(case, n, l)
    jets = _jets(case.beta, t, _order_needed(tab, m))
    step = (case.gamma * n) ** (-case.gamma / 6)
    return sum(tab[j](t, jets) * step ** j for j in range(m + 1))


# ------------------------------------------------------------ mean and variance

class MomentPoly(dict):
    """Polynomial in M_1, M_2, ... with rational coefficients; keys are sorted index tuples.

    M_0 = 1 is folded into the constant term.
    """

    @classmethod
    def var(cls, i: int) -> "MomentPoly":
        return cls({(): F(1)} if i == 0 else {(i,): F(1)})

    @classmethod
    def const(cls, c) -> "MomentPoly":
        return cls({(): F(c)})

    @classmethod
    def of(cls, spec: Mapping) -> "MomentPoly":
        return cls({tuple(sorted(k)): F(v) for k, v in spec.items()})

    def _clean(self):
        return MomentPoly({k: v for k, v in self.items() if v != 0})

    def __add__(self, other):
        out = MomentPoly(self)
        for k, v in other.items():
            out[k] = out.get(k, F(0)) + v
        return out._clean()

    def __neg__(self):
        return MomentPoly({k: -v for k, v in self.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, MomentPoly):
            return MomentPoly({k: v * F(other) for k, v in self.items()})._clean()
        out = MomentPoly()
        for k1, v1 in self.items():
            for k2, v2 in other.items():
                k = tuple(sorted(k1 + k2))
                out[k] = out.get(k, F(0)) + v1 * v2
        return out._clean()

    __rmul__ = __mul__

    def __eq__(self, other):
        return dict(self._clean()) == dict(MomentPoly(other)._clean())

    __hash__ = None

    def evaluate(self, moments: Mapping[int, float]) -> float:
        total = 0.0
        for k, v in self.items():
            term = float(v)
            for i in k:
                term *= moments[i]
            total += term
        return total


def _mp(spec):
    return MomentPoly.of(spec)


# reference coefficient formulas; keys are moment index tuples, () the constant
_MU_FPF = {
    0: {(1,): 1},
    1: {(2,): F(1, 60)},
    2: {(): F(351, 700), (3,): F(-1, 1400)},
    3: {(1,): F(8753, 63000), (4,): F(281, 4536000)},
}
_NU_FPF = {
    0: {(1, 1): -1, (2,): 1},
    1: {(): None, (1, 2): F(-1, 30), (3,): F(1, 30)},
    2: {(1,): F(-114, 175), (1, 3): F(1, 700), (2, 2): F(-1, 3600), (4,): F(-29, 25200)},
    3: {(1, 1): F(-8753, 31500), (1, 4): F(-281, 2268000), (2,): F(7289, 31500),
        (2, 3): F(1, 42000), (5,): F(227, 2268000)},
}
_NU1_CONST = {"incr-fpf": F(-139, 60), "decr-fpf": F(-31, 15)}
_MU_INV = {
    0: {(1,): 1},
    1: {},
    2: {(2,): F(1, 60)},
    3: {(1,): F(-1, 6)},
    4: {(): F(263, 350), (3,): F(-1, 1400)},
    5: {(2,): F(1, 360)},
    6: {(1,): F(2407, 15750), (4,): F(281, 4536000)},
    7: {(): F(-349, 1400), (3,): F(-1, 2800)},
}
_NU_INV = {
    0: {(1, 1): -1, (2,): 1},
    1: {},
    2: {(): F(-139, 60), (1, 2): F(-1, 30), (3,): F(1, 30)},
    3: {(1, 1): F(1, 3), (2,): F(-1, 3)},
    4: {(1,): F(-114, 175), (1, 3): F(1, 700), (2, 2): F(-1, 3600), (4,): F(-29, 25200)},
    5: {(): 1},
    6: {(1, 1): F(-1167, 3500), (1, 4): F(-281, 2268000), (2,): F(3013, 10500),
        (2, 3): F(1, 42000), (5,): F(227, 2268000)},
    7: {(1,): F(61, 525), (1, 3): F(1, 2100), (2, 2): F(-1, 10800), (4,): F(-29, 75600)},
}

# tabulated values, j = 0..7 (fixed-point-free formulas are transcribed only up to j = 3)
REFERENCE_MU = {
    "incr-fpf": (-3.26242790285517575465, 0.19464805438122286179, 0.53334519465880589845,
                 -0.44209473415818890204, -0.03369113588834637655, 0.03852721978119157824,
                 0.05153763595612910159, 0.00772236117763788596),
    "decr-fpf": (-1.20653357458202481442, 0.05105840501958399259, 0.50641259723997166236,
                 -0.16630234119205228837, -0.00981199524978779659, 0.05746299409186081619,
                 0.02332128911864687049, 0.00472408006029518940),
    "inv": (-1.20653357458202481442, 0.0, 0.05105840501958399259, 0.20108892909700413573,
            0.75641259723997166236, 0.00850973416993066543, -0.18305975195013596634,
            -0.24679370138001416881),
}
REFERENCE_NU = {
    "incr-fpf": (1.03544744154535161669, -2.53605859637806238245, 2.08799846229828100943,
                 -0.27084678289839209134, -0.52590530295863802379, -0.03597950253313240447,
                 0.21324061355810700045, 0.27770220515077968026),
    "decr-fpf": (1.60778103458136112010, -2.17604717802387329698, 0.77069799237144991015,
                 0.30092295773973386828, -0.49703337617067386818, -0.00633411029504826528,
                 0.02666337235665013943, 0.24693235831708674356),
    "inv": (1.60778103458136112010, 0.0, -2.42604717802387329698, -0.53592701152712037336,
            0.77069799237144991015, 1.0, 0.39024412632758726384, -0.14527852740352496809),
}


def mu_nu_expressions(case, j: int) -> tuple[MomentPoly, MomentPoly]:
    """Reference (mu_j, nu_j) as polynomials in the moments of the limit law."""
    case = get_case(case)
    if case.tag == "inv":
        if not 0 <= j <= 7:
            raise KeyError("involution coefficients are transcribed for j = 0..7")
        return _mp(_MU_INV[j]), _mp(_NU_INV[j])
    if not 0 <= j <= 3:
        raise KeyError("fixed-point-free coefficients are transcribed for j = 0..3")
    nu = dict(_NU_FPF[j])
    if j == 1:
        nu[()] = _NU1_CONST[case.tag]
    return _mp(_MU_FPF[j]), _mp(nu)


def derived_mu_nu(case, j: int) -> tuple[MomentPoly, MomentPoly]:
    """(mu_j, nu_j) recomputed from the density terms by integration by parts.

    mu_j = int t F*_j, sigma_j = int t^2 F*_j, nu_k = sigma_k - sum_{a+b=k} mu_a mu_b.
    """
    tab = term_table("pdf", case)
    mu = [tab[i].moment(1) for i in range(j + 1)]
    sigma = tab[j].moment(2)
    nu = sigma
    for a in range(j + 1):
        nu = nu - mu[a] * mu[j - a]
    return mu[j], nu


def _beta_moments(beta: int) -> dict[int, float]:
    from .edge import tw_moment
    return {i: tw_moment(beta, i) for i in range(1, 6)}


def mu_nu_coefficients(case, j: int, moments: Mapping[int, float] | None = None):
    """(mu_j, nu_j, mu expression, nu expression) with numeric values from the moments."""
    case = get_case(case)
    mu_e, nu_e = mu_nu_expressions(case, j)
    M = _beta_moments(case.beta) if moments is None else moments
    return mu_e.evaluate(M), nu_e.evaluate(M), mu_e, nu_e


def mean_variance_expansion(case, n: float, m: int, moments=None) -> tuple[float, float]:
    """Truncated expansions of E(L) and Var(L) (L the length itself, even for decr-fpf)."""
    case = get_case(case)
    g = case.gamma
    N = g * n
    mean = 2 * math.sqrt(N) + float(case.delta)
    var = 0.0
    M = _beta_moments(case.beta) if moments is None else moments
    for j in range(m + 1):
        mu, nu, _, _ = mu_nu_coefficients(case, j, M)
        mean += mu * N ** ((1 - g * j) / 6)
        var += nu * N ** ((2 - g * j) / 6)
    return mean, var


# -------------------------------------------------------------- Jasz expansion

# c_j(n; r*) for involution numbers, as coefficients of n^0, n^-1/2, n^-1, n^-3/2
JASZ_INVOLUTION_SERIES = {
    1: (F(0), F(3, 8), F(-1, 8), F(-1, 128)),
    2: (F(-1, 4), F(1, 8), F(1, 128), None),
    3: (F(0), F(-5, 96), F(5, 64), F(-167, 3072)),
    4: (F(1, 32), F(-1, 32), F(11, 512), None),
    5: (F(0), F(1, 768), F(-1, 96), F(159, 10240)),
    6: (F(-1, 384), F(1, 256), F(-175, 36864), None),
}


def _coefficient_ratios(generator: str, n: int, j: int) -> list[Fraction]:
    """a_{n-k}/a_n for k = 0..j."""
    if generator == "exp":
        return [F(math.perm(n, k)) for k in range(j + 1)]
    if generator == "involution-egf":
        from .exact_series import involution_numbers
        I = involution_numbers(n)
        return [F(I[n - k] * math.perm(n, k), I[n]) for k in range(j + 1)]
    raise ValueError("generator must be 'exp' or 'involution-egf'")


def jasz_coefficients(generator: str, j: int, n: int, r=None, dps: int = 60):
    """c_j(n; r) = (1/j!) sum_k C(j,k) (a_{n-k}/a_n) (-r)^(j-k), default r = r*_n.

    r*_n = n for the exponential generator and sqrt(n) - 1/2 for the involution one.
    Returned as an mpmath number (the sum cancels heavily).
    """
    if j < 0 or j > n:
        raise ValueError("need 0 <= j <= n")
    ratios = _coefficient_ratios(generator, n, j)
    with mpmath.workdps(dps):
        if r is None:
            r = mpmath.mpf(n) if generator == "exp" else mpmath.sqrt(n) - mpmath.mpf(1) / 2
        r = mpmath.mpf(r)
        s = mpmath.mpf(0)
        for k in range(j + 1):
            s += math.comb(j, k) * mpmath.mpf(ratios[k].numerator) / ratios[k].denominator * (-r) ** (j - k)
        return +(s / math.factorial(j))


# --------------------------------------------------------- de-Poissonization

def _log_f(case: ProblemCase, r):
    return r + r * r / 2 if case.tag == "inv" else r


def _saddle(case: ProblemCase, n: int) -> float:
    return math.sqrt(n + 0.25) - 0.5 if case.tag == "inv" else float(n)


def depoisson_gap(case, n: int, r: float) -> float:
    """Delta_n(r) = (r / r_n)^n f(r_n) / f(r)."""
    case = get_case(case)
    rn = _saddle(case, n)
    return math.exp(n * math.log(r / rn) + _log_f(case, rn) - _log_f(case, r))


def depoisson_intensities(case, n: int, alpha: float) -> tuple[float, float]:
    case = get_case(case)
    if n < 2:
        raise ValueError("need n >= 2")
    if case.tag == "inv":
        c, w = math.sqrt(n) - 0.5, math.sqrt(alpha * math.log(n))
    else:
        c, w = float(n), math.sqrt(2 * alpha * n * math.log(n))
    return c - w, c + w


def poissonized_probability(case, r: float, l: int) -> float:
    """P_o(r; l) through the hard-edge determinant it equals."""
    from .edge import hard_edge_gap
    case = get_case(case)
    if case.tag == "incr-fpf":
        return hard_edge_gap(4, 8 * r, l)
    if case.tag == "decr-fpf":
        return hard_edge_gap(1, 8 * r, l)
    return hard_edge_gap(1, 4 * r * r, (l - 1) / 2)


def depoisson_sandwich(case, n: int, l: int, alpha: float = 1.0) -> tuple[float, float]:
    """Lower and upper bound for p(n; l): P(r+) - Delta(r+) <= p <= P(r-) + Delta(r-)."""
    case = get_case(case)
    r_minus, r_plus = depoisson_intensities(case, n, alpha)
    lower = poissonized_probability(case, r_plus, l) - depoisson_gap(case, n, r_plus)
    upper = poissonized_probability(case, r_minus, l) + depoisson_gap(case, n, r_minus)
    return lower, upper


# ------------------------------------------------------ involution numbers

_I_SERIES = (F(1), F(7, 24), F(-119, 1152), F(-7933, 414720))
_A_SERIES = (F(1), F(7, 24), F(-215, 1152), F(-18013, 414720))


def involution_asymptotics(n, order: int = 3, variant: str = "count", dps: int = 30):
    """Truncated large-n series for I_n ("count") or a_n = I_n / n! ("egf"), as mpmath numbers.

    I_n ~ e^(sqrt(n) - 1/4) / sqrt(2) (n/e)^(n/2) (1 + 7/24 n^-1/2 - 119/1152 n^-1 - ...)
    """
    if not 0 <= order <= 3:
        raise ValueError("order must lie in 0..3")
    if n < 1:
        raise ValueError("n must be >= 1")
    with mpmath.workdps(dps):
        x = mpmath.mpf(n)
        series = _I_SERIES if variant == "count" else _A_SERIES
        corr = sum(mpmath.mpf(c.numerator) / c.denominator * x ** (-mpmath.mpf(i) / 2)
                   for i, c in enumerate(series[:order + 1]))
        if variant == "count":
            lead = mpmath.exp(mpmath.sqrt(x) - mpmath.mpf(1) / 4) / mpmath.sqrt(2) * (x / mpmath.e) ** (x / 2)
        elif variant == "egf":
            lead = (mpmath.exp(mpmath.sqrt(x) - mpmath.mpf(1) / 4) / (2 * mpmath.sqrt(mpmath.pi * x))
                    * (mpmath.e / x) ** (x / 2))
        else:
            raise ValueError("variant must be 'count' or 'egf'")
        return +(lead * corr)


def log_involution_number(n: int) -> float:
    from .exact_series import involution_numbers
    I = involution_numbers(n)[n]
    return math.log(I)


# ------------------------------------------------------------------ fits

@dataclass
class FitResult:
    case: str
    quantity: str
    rows: tuple[int, ...]
    coefficients: list      # mpmath numbers, model order
    labels: list[str]
    max_residual: float


def _fit_design(case: ProblemCase, quantity: str):
    """(basis functions of n, labels, known part) for the least-squares models."""
    g = case.gamma
    if case.tag == "incr-fpf":
        J = 13 if quantity == "mean" else 12
    elif case.tag == "decr-fpf":
        J = 5 if quantity == "mean" else 4
    else:
        J = 8
    if case.tag != "inv":
        if quantity == "mean":
            basis = [lambda n, j=j: (g * n) ** (mpmath.mpf(1 - g * j) / 6) for j in range(J + 1)]
            labels = [f"c{j}" for j in range(J + 1)]
            known = lambda n: 2 * mpmath.sqrt(g * n) + mpmath.mpf(case.delta.numerator) / case.delta.denominator
        else:
            basis = [lambda n, j=j: (g * n) ** (mpmath.mpf(1) / 3) * (g * n) ** (-mpmath.mpf(j) / 3)
                     for j in range(J + 1)]
            labels = [f"d{j}" for j in range(J + 1)]
            known = lambda n: 0
        return basis, labels, known
    if quantity == "mean":
        basis = [lambda n: n ** (mpmath.mpf(1) / 6)] + [lambda n, j=j: n ** (-mpmath.mpf(j) / 6)
                                                          for j in range(1, J + 1)]
        labels = ["c0"] + [f"c{j + 1}" for j in range(1, J + 1)]
        known = lambda n: 2 * mpmath.sqrt(n) - mpmath.mpf(1) / 2
    else:
        basis = [lambda n: n ** (mpmath.mpf(1) / 3)] + [lambda n, j=j: n ** (-mpmath.mpf(j) / 6)
                                                          for j in range(0, J + 1)]
        labels = ["d0"] + [f"d{j + 2}" for j in range(0, J + 1)]
        known = lambda n: 0
    return basis, labels, known


def fit_mean_variance(case, quantity: str, data: Mapping[int, Fraction], dps: int = 120) -> FitResult:
    """Least-squares fit of exact means or variances to the finite-size model of the case.

    ``data`` maps n to the exact value (a Fraction). Solved by QR in extended precision:
    over 700 <= n <= 1000 the fourteen model columns are nearly collinear, and 50 digits
    are not enough for the Householder step.
    """
    case = get_case(case)
    if quantity not in ("mean", "variance"):
        raise ValueError("quantity must be 'mean' or 'variance'")
    rows = sorted(data)
    with mpmath.workdps(dps):
        basis, labels, known = _fit_design(case, quantity)
        if len(rows) < len(basis):
            raise ValueError("not enough data points for the model")
        A = mpmath.matrix(len(rows), len(basis))
        b = mpmath.matrix(len(rows), 1)
        for i, n in enumerate(rows):
            nn = mpmath.mpf(n)
            for k, f in enumerate(basis):
                A[i, k] = f(nn)
            v = data[n]
            b[i] = mpmath.mpf(v.numerator) / v.denominator - known(nn)
        x, res = mpmath.qr_solve(A, b)
        coeffs = [x[k] for k in range(len(basis))]
        fitted = A * x
        worst = max(abs(fitted[i] - b[i]) for i in range(len(rows)))
    return FitResult(case.tag, quantity, tuple(rows), coeffs, labels, float(worst))
