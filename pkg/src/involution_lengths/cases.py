"""The three symmetry classes and every scaling map that depends on them.

Conventions used throughout the package:

* ``incr-fpf``: longest increasing subsequence of a fixed-point-free involution of
  2n elements (n = number of 2-cycles). Limit law F_4.
* ``decr-fpf``: longest decreasing subsequence of the same objects. The length is
  always even, and tables index it by ``l = length / 2``. Limit law F_1.
* ``inv``: longest increasing subsequence of an involution of n elements. Limit law F_1.

``p(n; l)`` always means the cumulative probability P(L <= l) (P(L <= 2l) for decr-fpf).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import math

__all__ = ["ProblemCase", "CASES", "get_case", "INCR_FPF", "DECR_FPF", "INV"]


@dataclass(frozen=True)
class ProblemCase:
    tag: str

    def __post_init__(self):
        if self.tag not in ("incr-fpf", "decr-fpf", "inv"):
            raise ValueError(f"unknown case {self.tag!r}")

    @property
    def fixed_point_free(self) -> bool:
        return self.tag != "inv"

    @property
    def beta(self) -> int:
        """Symmetry index of the limit law."""
        return 4 if self.tag == "incr-fpf" else 1

    @property
    def gamma(self) -> int:
        return 1 if self.tag == "inv" else 2

    @property
    def delta(self) -> Fraction:
        """Constant shift of the mean."""
        return {"incr-fpf": Fraction(3, 2), "decr-fpf": Fraction(0), "inv": Fraction(-1, 2)}[self.tag]

    def l_circ(self, l):
        """Bessel order matched to the bound l (valid for real l as well)."""
        if self.tag == "incr-fpf":
            return l - 1
        if self.tag == "decr-fpf":
            return 2 * l + 1
        return l

    def l_star(self, l):
        """Evaluation order used by the finite-n expansions."""
        if self.tag == "incr-fpf":
            return l - 1
        if self.tag == "decr-fpf":
            return 2 * l + 1
        return l + 1

    def r_circ(self, r):
        """Intensity seen by the hard-edge law after Poissonization."""
        return r * r if self.tag == "inv" else 2 * r

    def h(self, n) -> float:
        """Spacing in t between consecutive table values of l."""
        if self.tag == "incr-fpf":
            return (2 * n) ** (-1 / 6)
        if self.tag == "decr-fpf":
            return 2 * (2 * n) ** (-1 / 6)
        return n ** (-1 / 6)

    def gap_index(self, l):
        """Parameter a of E_beta^hard(s; a) matching the bound l."""
        if self.tag == "inv":
            return Fraction(l - 1, 2)
        return l

    def length_of(self, l: int) -> int:
        """Actual subsequence length represented by table index l."""
        return 2 * l if self.tag == "decr-fpf" else l

    def total(self, n: int) -> int:
        """Number of objects of size n (I_n or (2n-1)!!)."""
        if self.fixed_point_free:
            return math.prod(range(1, 2 * n, 2))
        a, b = 1, 1
        for k in range(1, n):
            a, b = b, b + k * a
        return b if n >= 1 else 1

    def __str__(self):
        return self.tag


INCR_FPF = ProblemCase("incr-fpf")
DECR_FPF = ProblemCase("decr-fpf")
INV = ProblemCase("inv")
CASES = {c.tag: c for c in (INCR_FPF, DECR_FPF, INV)}

_ALIASES = {"incr": "incr-fpf", "decr": "decr-fpf", "involution": "inv", "inv": "inv",
            "incr-fpf": "incr-fpf", "decr-fpf": "decr-fpf"}


def get_case(case) -> ProblemCase:
    if isinstance(case, ProblemCase):
        return case
    try:
        return CASES[_ALIASES[str(case).lower()]]
    except KeyError:
        raise ValueError(f"unknown case {case!r}; expected one of {sorted(CASES)}") from None
