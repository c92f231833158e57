"""Re-plot data for the five comparison figures, as lists of row dicts.

Each figure sets an exact quantity (a hard-edge determinant or an exact table entry)
against the truncated expansion, scaled so that the first omitted term is what shows:

1. hard-to-soft: (E_hard - F - E_1 h - E_2 h^2) / h^3 against E_3, nu in {100, 800}
2. Poissonized: r (E_hard(4r) - F - F_1 r^-1/3 - F_2 r^-2/3) against F_3
3. fixed-point-free CDF: 2n (p - F - F_1 (2n)^-1/3 - F_2 (2n)^-2/3) against F_{o,3}
4. involution CDF: n^(5/6) (p - F - sum_{j<=4}) against sum_{j=5..m} F_{inv,j} n^((5-j)/6)
5. densities: exact (p(l) - p(l-1)) / h against the expansion at the midpoint
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable

import numpy as np

from .cases import get_case
from .edge import JET_ORDER, hard_edge_gap, hard_to_soft_probe, hard_to_soft_scale, tw_jets
from .exact_series import ExactTable, windowed_table
from .expansions import (apply_terms, cdf_evaluation_point, cdf_expansion, pdf_evaluation_point,
                         pdf_expansion, scaled_variable, term_polynomials)

__all__ = [
    "FIGURE_T_RANGE", "FIGURE5_ORDER", "figure_rows", "hard_to_soft_rows", "poissonized_rows",
    "fpf_cdf_rows", "inv_cdf_rows", "density_rows", "exact_table_for", "sup_relative_deviation",
]

FIGURE_T_RANGE = {1: (-6.0, 2.0), 2: (-6.0, 2.0), 3: (-6.0, 2.0), 4: (-6.0, 2.0)}
FIGURE5_ORDER = {"incr-fpf": 2, "decr-fpf": 2, "inv": 5}
FIGURE_ROWS = (250, 500, 1000)


def _grid(lo: float, hi: float, step: float) -> np.ndarray:
    return np.round(np.arange(lo, hi + step / 2, step), 12)


def hard_to_soft_rows(nu: float, betas: Iterable[int] = (1, 4), step: float = 0.25) -> list[dict]:
    rows = []
    h = hard_to_soft_scale(nu)
    for beta in betas:
        E3 = term_polynomials("hard2soft", beta, 3)
        for t in _grid(*FIGURE_T_RANGE[1], step):
            jets = tw_jets(beta, t, JET_ORDER)
            rows.append({"beta": beta, "nu": nu, "t": float(t),
                         "scaled_residual": hard_to_soft_probe(beta, nu, t, m=2) / h ** 3,
                         "term3": float(apply_terms(E3, t, jets))})
    return rows


def poissonized_rows(r: float, betas: Iterable[int] = (1, 4), step: float = 0.25) -> list[dict]:
    """The Poissonized hard-edge law E_hard(4r; nu_beta) at the real order nu = 2 sqrt(r) + t r^(1/6)."""
    rows = []
    for beta in betas:
        terms = [term_polynomials("poisson", beta, j) for j in (1, 2, 3)]
        for t in _grid(*FIGURE_T_RANGE[2], step):
            nu = 2 * math.sqrt(r) + t * r ** (1 / 6)
            a = (nu - 1) / 2 if beta == 1 else nu + 1
            jets = tw_jets(beta, t, JET_ORDER)
            exact = hard_edge_gap(beta, 4 * r, a)
            approx = jets[0] + sum(apply_terms(terms[j - 1], t, jets) * r ** (-j / 3) for j in (1, 2))
            rows.append({"beta": beta, "r": r, "nu": nu, "t": float(t), "exact": exact,
                         "scaled_residual": r * (exact - approx),
                         "term3": float(apply_terms(terms[2], t, jets))})
    return rows


def exact_table_for(case, rows: Iterable[int] = FIGURE_ROWS) -> ExactTable:
    return windowed_table(case, rows)


def _bounds_in_range(case, n: int, tab: ExactTable, t_range, point) -> list[int]:
    lo, hi = tab.window(n)
    return [l for l in range(lo, hi + 1) if t_range[0] <= point(case, n, l) <= t_range[1]]


def fpf_cdf_rows(case, n: int, table: ExactTable | None = None) -> list[dict]:
    case = get_case(case)
    if not case.fixed_point_free:
        raise ValueError("figure 3 covers the fixed-point-free cases")
    tab = table or exact_table_for(case, [n])
    F3 = term_polynomials("cdf", case, 3)
    rows = []
    for l in _bounds_in_range(case, n, tab, FIGURE_T_RANGE[3], cdf_evaluation_point):
        t = cdf_evaluation_point(case, n, l)
        exact = float(tab.cdf(n, l))
        partial = [cdf_expansion(case, n, l, m) for m in range(4)]
        jets = tw_jets(case.beta, t, JET_ORDER)
        row = {"case": case.tag, "n": n, "l": l, "t": t, "exact": exact}
        row.update({f"expansion_m{m}": float(v) for m, v in enumerate(partial)})
        row["scaled_residual"] = 2 * n * (exact - float(partial[2]))
        row["term3"] = float(apply_terms(F3, t, jets))
        rows.append(row)
    return rows


def inv_cdf_rows(n: int = 1000, table: ExactTable | None = None) -> list[dict]:
    case = get_case("inv")
    tab = table or exact_table_for(case, [n])
    terms = {j: term_polynomials("cdf", case, j) for j in (5, 6, 7)}
    rows = []
    for l in _bounds_in_range(case, n, tab, FIGURE_T_RANGE[4], cdf_evaluation_point):
        t = cdf_evaluation_point(case, n, l)
        exact = float(tab.cdf(n, l))
        jets = tw_jets(1, t, JET_ORDER)
        row = {"case": "inv", "n": n, "l": l, "t": t, "exact": exact,
               "scaled_residual": n ** (5 / 6) * (exact - float(cdf_expansion(case, n, l, 4)))}
        acc = 0.0
        for j in (5, 6, 7):
            acc += float(apply_terms(terms[j], t, jets)) * n ** ((5 - j) / 6)
            row[f"partial_sum_m{j}"] = acc
        rows.append(row)
    return rows


def density_rows(case, n: int = 1000, table: ExactTable | None = None,
                 orders: Iterable[int] | None = None) -> list[dict]:
    """Bars (exact differences over the spacing h) and expansions at their midpoints."""
    case = get_case(case)
    orders = sorted(set(orders or (0, FIGURE5_ORDER[case.tag])))
    tab = table or exact_table_for(case, [n])
    lo, hi = tab.window(n)
    h = case.h(n)
    rows = []
    for l in range(lo + 1, hi + 1):
        exact = float(Fraction(tab.count(n, l), tab.total(n))) / h
        row = {"case": case.tag, "n": n, "l": l, "t": pdf_evaluation_point(case, n, l), "exact": exact}
        row.update({f"expansion_m{m}": float(pdf_expansion(case, n, l, m)) for m in orders})
        rows.append(row)
    return rows


def sup_relative_deviation(rows: list[dict], approx: str, reference: str) -> float:
    """max |approx - reference| / max |reference| over the rows."""
    dev = max(abs(r[approx] - r[reference]) for r in rows)
    scale = max(abs(r[reference]) for r in rows)
    return dev / scale


def figure_rows(figure: int, size: int) -> list[dict]:
    """All rows for one figure; ``size`` is nu (figure 1), r (figure 2) or n (figures 3 to 5)."""
    if figure == 1:
        return hard_to_soft_rows(size)
    if figure == 2:
        return poissonized_rows(size)
    if figure == 3:
        return fpf_cdf_rows("incr-fpf", size) + fpf_cdf_rows("decr-fpf", size)
    if figure == 4:
        return inv_cdf_rows(size)
    if figure == 5:
        return [r for c in ("incr-fpf", "decr-fpf", "inv") for r in density_rows(c, size)]
    raise ValueError("figure must be one of 1..5")
