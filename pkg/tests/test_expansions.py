import math
from fractions import Fraction

import mpmath
import pytest

from involution_lengths.cases import get_case
from involution_lengths.expansions import (
    JASZ_INVOLUTION_SERIES, REFERENCE_MU, REFERENCE_NU, DiffExpr, Poly, cdf_expansion, depoisson_gap,
    depoisson_intensities, depoisson_sandwich, derived_cdf_terms, derived_mu_nu, derived_pdf_terms,
    involution_asymptotics, jasz_coefficients, mean_variance_expansion, mu_nu_coefficients,
    mu_nu_expressions, parse_poly, pdf_expansion, poissonized_expansion, poissonized_probability,
    scaled_variable, scaled_variable_slope, term_polynomials, term_table, transcription_audit)
from involution_lengths.edge import REFERENCE_MOMENTS, tracy_widom_cdf
from involution_lengths.exact_series import involution_numbers, windowed_table


def test_poly_parsing():
    p = parse_poly("9/175 + 32/175 t^3")
    assert p == Poly([Fraction(9, 175), 0, 0, Fraction(32, 175)])
    assert parse_poly("-t") == Poly([0, -1])


def test_term_lookup():
    assert term_polynomials("poisson", 1, 1) == DiffExpr.of({1: "-1/60 t^2", 2: "-1/5"})
    assert term_polynomials("cdf", "inv", 1) == DiffExpr()
    assert term_polynomials("hard2soft", 4, 1) == DiffExpr.of({1: "3/10 t^2", 2: "-2/5"})
    assert term_polynomials("pdf", "inv", 1) == DiffExpr()
    assert term_table("pdf", "inv")[0] == DiffExpr.derivative_of_F(1)
    with pytest.raises(KeyError):
        term_polynomials("cdf", "decr-fpf", 4)
    assert "density terms" in transcription_audit()


@pytest.mark.parametrize("j", [1, 2, 3])
def test_cdf_terms_follow_from_poissonized_terms(j):
    assert derived_cdf_terms(j) == term_polynomials("cdf", "incr-fpf", j)


@pytest.mark.parametrize("case", ["incr-fpf", "decr-fpf", "inv"])
def test_density_terms_follow_from_cdf_terms(case):
    tab = term_table("pdf", case)
    for j in range(1, tab.max_j + 1):
        assert derived_pdf_terms(case, j) == tab[j]


@pytest.mark.parametrize("case", ["incr-fpf", "decr-fpf", "inv"])
def test_mean_variance_formulas_by_parts(case):
    for j in range(0, 8 if case == "inv" else 4):
        mu, nu = mu_nu_expressions(case, j)
        dmu, dnu = derived_mu_nu(case, j)
        assert mu == dmu and nu == dnu


def test_tabulated_coefficients():
    ref = {1: dict(enumerate(REFERENCE_MOMENTS[1], 1)), 4: dict(enumerate(REFERENCE_MOMENTS[4], 1))}
    for case in ("incr-fpf", "decr-fpf", "inv"):
        M = ref[get_case(case).beta]
        for j in range(0, 8 if case == "inv" else 4):
            mu, nu, _, _ = mu_nu_coefficients(case, j, M)
            assert abs(mu - REFERENCE_MU[case][j]) < 1e-12
            assert abs(nu - REFERENCE_NU[case][j]) < 1e-12
    assert REFERENCE_MU["inv"][1] == 0.0 and REFERENCE_NU["inv"][5] == 1.0
    mu3, _, _, _ = mu_nu_coefficients("inv", 3, ref[1])
    # mu_3 of the involution case is -M_1/6
    assert abs(mu3 + ref[1][1] / 6) < 1e-15
    assert abs(mu_nu_coefficients("incr-fpf", 0)[0] + 3.2624279028551757) < 1e-8
    assert abs(mu_nu_coefficients("decr-fpf", 1)[1] + 2.1760471780238733) < 1e-6


def test_scaled_variable():
    assert scaled_variable(2 * math.sqrt(50.0), 50.0) == 0.0
    r, h = 40.0, 1e-4
    fd = (scaled_variable(17.0, r + h) - scaled_variable(17.0, r - h)) / (2 * h)
    assert abs(fd - scaled_variable_slope(17.0, r)) < 1e-6
    assert get_case("decr-fpf").l_circ(5) == 11


def test_poissonized_expansion_improves_with_order():
    r = 50.0
    l = round(2 * math.sqrt(2 * r))
    exact = poissonized_probability("incr-fpf", r, l)
    errs = [abs(poissonized_expansion("incr-fpf", r, l, m) - exact) for m in range(4)]
    assert errs[0] > errs[1] > errs[3]
    t = scaled_variable(get_case("incr-fpf").l_circ(l), 2 * r)
    assert poissonized_expansion("incr-fpf", r, l, 0) == pytest.approx(tracy_widom_cdf(4, t), abs=1e-15)
    l = round(2 * r)
    exact = poissonized_probability("inv", r, l)
    errs = [abs(poissonized_expansion("inv", r, l, m) - exact) for m in range(4)]
    assert errs[0] > errs[3]


def test_first_order_cdf_term():
    n, l = 1000, 86
    case = get_case("incr-fpf")
    t = scaled_variable(case.l_circ(l), 2 * n)
    from involution_lengths.edge import tw_jets
    F = tw_jets(4, t, 2)
    first = F[0] - (t * t / 60 * F[1] + 6 / 5 * F[2]) * (2 * n) ** (-1 / 3)
    assert cdf_expansion(case, n, l, 1) == pytest.approx(first, abs=1e-13)


def test_density_expansion_rate():
    # max deviation from exact bars should shrink by about 2^{-(m+1)/3} per doubling of n
    tab = windowed_table("decr-fpf", [100, 400])
    case = get_case("decr-fpf")
    dev = {}
    for n in (100, 400):
        lo, hi = tab.window(n)
        h = case.h(n)
        dev[n] = max(abs(float(Fraction(tab.count(n, l), tab.total(n))) / h - pdf_expansion(case, n, l, 1))
                     for l in range(lo + 1, hi + 1))
    rate = math.log(dev[100] / dev[400]) / math.log(4)
    assert 2 / 3 * 0.7 < rate < 2 / 3 * 1.5


def test_mean_expansion_against_table():
    tab = windowed_table("incr-fpf", [300])
    mean, var = (float(x) for x in tab.moments(300))
    m0, v0 = mean_variance_expansion("incr-fpf", 300, 0)
    m3, v3 = mean_variance_expansion("incr-fpf", 300, 3)
    assert abs(m3 - mean) < abs(m0 - mean) / 10 and abs(m3 - mean) < 5e-3
    assert abs(v3 - var) < abs(v0 - var) / 5 and abs(v3 - var) < 5e-2


def test_jasz_coefficients():
    n = 50
    assert jasz_coefficients("exp", 0, n) == 1
    I = involution_numbers(n)
    r = mpmath.mpf(7)
    c1 = jasz_coefficients("involution-egf", 1, n, r)
    exact = Fraction(I[n - 1] * n, I[n]) - 7
    with mpmath.workdps(60):
        assert abs(c1 - mpmath.mpf(exact.numerator) / exact.denominator) < mpmath.mpf(10) ** -40
    n = 10 ** 4
    c2 = jasz_coefficients("involution-egf", 2, n)
    series = JASZ_INVOLUTION_SERIES[2]
    approx = sum(float(c) * n ** (-k / 2) for k, c in enumerate(series) if c is not None)
    assert abs(float(c2) - approx) * n ** 1.5 < 1


def test_involution_asymptotics():
    I = involution_numbers(1000)
    rel0 = float(involution_asymptotics(100, 0) / I[100] - 1)
    assert abs(rel0) < 3e-2
    for n in (100, 400, 1000):
        assert abs(float(involution_asymptotics(n, 3) / I[n] - 1)) * n * n < 5
    from involution_lengths.expansions import _I_SERIES
    assert _I_SERIES[1:] == (Fraction(7, 24), Fraction(-119, 1152), Fraction(-7933, 414720))


def test_depoissonization_gap():
    for case in ("inv", "incr-fpf"):
        vals = []
        for n in (100, 1000, 10000):
            lo, hi = depoisson_intensities(case, n, 1.0)
            vals.append(max(depoisson_gap(case, n, lo), depoisson_gap(case, n, hi)) * n)
        assert abs(vals[-1] - 1) < abs(vals[0] - 1) + 1e-12
        assert abs(vals[-1] - 1) < 0.3


def test_sandwich_contains_exact_value():
    tab = windowed_table("inv", [400])
    lo, hi = tab.window(400)
    mode = max(range(lo + 1, hi + 1), key=lambda l: tab.count(400, l))
    low, up = depoisson_sandwich("inv", 400, mode, 1.0)
    assert low <= float(tab.cdf(400, mode)) <= up
    low2, up2 = depoisson_sandwich("inv", 400, mode, 2.0)
    assert up2 - low2 < 2.5 * (up - low)
