import math

import mpmath
import numpy as np
import pytest

from involution_lengths.operators import (
    ConvergenceError, DiscretizedKernel, QuadratureRule, airy_derivatives, airy_kernel_jet,
    airy_nodes, airy_pair, airy_upper_limit, bessel_j, det_expansion_terms, determinant_jet,
    fredholm_det, resolvent_trace)


def _airy_series(x, dps=60):
    """Ai and Ai' from their Maclaurin series in extended precision."""
    with mpmath.workdps(dps):
        x = mpmath.mpf(x)
        c1 = 1 / (mpmath.cbrt(9) * mpmath.gamma(mpmath.mpf(2) / 3))
        c2 = 1 / (mpmath.cbrt(3) * mpmath.gamma(mpmath.mpf(1) / 3))
        f, g, fp, gp = mpmath.mpf(1), x, mpmath.mpf(0), mpmath.mpf(1)
        tf, tg = mpmath.mpf(1), x
        k = 0
        while True:
            tf *= x ** 3 / ((3 * k + 2) * (3 * k + 3))
            tg *= x ** 3 / ((3 * k + 3) * (3 * k + 4))
            f += tf
            g += tg
            fp += tf * (3 * k + 3) / x
            gp += tg * (3 * k + 4) / x
            k += 1
            if abs(tf) + abs(tg) < mpmath.mpf(10) ** (-dps + 5) and k > 5:
                break
        return float(c1 * f - c2 * g), float(c1 * fp - c2 * gp)


def test_airy_values_at_zero():
    ai, aip = airy_pair(0.0)
    assert abs(ai - 0.3550280538878172) < 1e-16
    assert abs(aip + 0.2588194037928068) < 1e-16


@pytest.mark.parametrize("x", [-12.0, -5.5, -1.0, 0.7, 3.0, 8.0])
def test_airy_against_series(x):
    ai, aip = airy_pair(x)
    ref_ai, ref_aip = _airy_series(x)
    scale = max(1.0, abs(x)) ** 0.25
    assert abs(ai - ref_ai) < 1e-14 * scale + 1e-13 * abs(ref_ai)
    assert abs(aip - ref_aip) < 1e-14 * scale * max(1.0, abs(x)) ** 0.5 + 1e-13 * abs(ref_aip)


def test_airy_equation_and_decay():
    x, h = 1.3, 1e-3
    second = (airy_pair(x + h)[0] - 2 * airy_pair(x)[0] + airy_pair(x - h)[0]) / h ** 2
    assert abs(second - x * airy_pair(x)[0]) < 1e-7
    d = airy_derivatives(np.array([x]), 3)
    assert abs(d[2, 0] - x * d[0, 0]) < 1e-15
    assert abs(d[3, 0] - (d[0, 0] + x * d[1, 0])) < 1e-15
    assert airy_pair(10.0)[0] < 1e-9
    with pytest.raises(ValueError):
        airy_pair(-25.0)


def test_bessel_against_extended_precision():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(200):
        nu = float(rng.uniform(0, 150))
        x = float(rng.uniform(0.3, 2.5) * max(nu, 1.0))
        ref = mpmath.besselj(nu, x)
        # relative to |J| where it is monotone, to the local amplitude where it oscillates
        scale = abs(ref) if x < nu else mpmath.hypot(ref, mpmath.bessely(nu, x))
        worst = max(worst, abs(bessel_j(nu, x) - float(ref)) / float(scale))
    assert worst < 1e-12


def test_bessel_special_values():
    for x in (1.0, 2.0, 5.0):
        assert abs(bessel_j(0.5, x) - math.sqrt(2 / (math.pi * x)) * math.sin(x)) < 1e-14
    assert bessel_j(0.0, 0.0) == 1.0 and bessel_j(3.2, 0.0) == 0.0
    assert abs(bessel_j(0.0, 2.404825557695773)) < 1e-12
    with pytest.raises(ValueError):
        bessel_j(-1.0, 1.0)


def test_quadrature_is_exact_for_polynomials():
    rule = QuadratureRule.gauss_legendre(-1.0, 3.0, 10)
    assert abs(rule.integrate(lambda x: x ** 19) - (3.0 ** 20 - 1.0) / 20) < 1e-4
    assert abs(rule.integrate(np.exp) - (math.exp(3) - math.exp(-1))) < 1e-13


def test_determinant_basics():
    rule = QuadratureRule.gauss_legendre(0.0, 1.0, 20)
    zero = DiscretizedKernel.assemble(lambda x, y: 0 * x * y, rule)
    assert fredholm_det(zero, 1.0) == 1.0
    rank_one = DiscretizedKernel.assemble(lambda x, y: x * y, rule)
    # det(I - z K) = 1 - z int x^2 = 1 - z/3 for the rank-one kernel xy on (0,1)
    assert abs(fredholm_det(rank_one, 0.6) - 0.8) < 1e-14
    assert fredholm_det(rank_one, 0.0) == 1.0
    assert rank_one.is_symmetric()
    with pytest.raises(ValueError):
        fredholm_det(rank_one, 1.5)


def _airy_v(t):
    rule = QuadratureRule.gauss_legendre(t, airy_upper_limit(t), airy_nodes(t))
    return DiscretizedKernel.assemble(lambda x, y: 0.5 * airy_pair(np.clip(0.5 * (x + y), -20, 40))[0], rule)


def test_airy_determinant_tail_and_refinement():
    assert abs(fredholm_det(_airy_v(12.0), 1.0) - 1.0) < 1e-12
    # at t = 8 the gap is still 1 - 8e-9, matching the upper-tail asymptotics
    tail = math.exp(-2 / 3 * 8 ** 1.5) / (4 * math.sqrt(math.pi) * 8 ** 0.75)
    assert abs((1 - fredholm_det(_airy_v(8.0), 1.0)) / tail - 1) < 0.05
    rule = QuadratureRule.gauss_legendre(-3.0, airy_upper_limit(-3.0), airy_nodes(-3.0))
    K = DiscretizedKernel.assemble(lambda x, y: 0.5 * airy_pair(np.clip(0.5 * (x + y), -20, 40))[0], rule)
    assert abs(fredholm_det(K, 1.0) - fredholm_det(K.refined(), 1.0)) < 1e-10
    fredholm_det(K, 1.0, tol=1e-10)
    coarse = DiscretizedKernel.assemble(K.kernel, QuadratureRule.gauss_legendre(-3.0, 22.0, 8))
    with pytest.raises(ConvergenceError):
        fredholm_det(coarse, 1.0, tol=1e-12)


def test_determinant_identity_for_plus_and_minus():
    # det(I - V) det(I + V) = det(I - V^2)
    rule = QuadratureRule.gauss_legendre(-2.0, airy_upper_limit(-2.0), 80)
    V = DiscretizedKernel.assemble(lambda x, y: 0.5 * airy_pair(np.clip(0.5 * (x + y), -20, 40))[0], rule)
    lhs = fredholm_det(V, 1.0) * fredholm_det(V, -1.0)
    rhs = np.linalg.det(np.eye(V.m) - V.matrix @ V.matrix)
    assert abs(lhs - rhs) < 1e-13


def _perturbed(rule, h):
    k0 = lambda x, y: 0.3 * np.exp(-(x - y) ** 2)
    k1 = lambda x, y: np.cos(x + y)
    k2 = lambda x, y: x * y
    K0 = DiscretizedKernel.assemble(k0, rule)
    K1 = DiscretizedKernel.assemble(k1, rule)
    K2 = DiscretizedKernel.assemble(k2, rule)
    Kh = DiscretizedKernel.assemble(lambda x, y: k0(x, y) + h * k1(x, y) + h * h * k2(x, y), rule)
    return K0, K1, K2, Kh


def test_expansion_terms_against_finite_differences():
    rule = QuadratureRule.gauss_legendre(0.0, 1.5, 24)
    z = 0.7
    K0, K1, K2, _ = _perturbed(rule, 0.0)
    d1, d2 = det_expansion_terms(K0, [K1, K2], z)
    base = fredholm_det(K0, z)
    h = 1e-4
    slope = (fredholm_det(_perturbed(rule, h)[3], z) - fredholm_det(_perturbed(rule, -h)[3], z)) / (2 * h) / base
    assert abs(slope - d1) < 1e-3 * abs(d1)
    # second order: Richardson on the symmetric second difference
    g = lambda h: (fredholm_det(_perturbed(rule, h)[3], z) + fredholm_det(_perturbed(rule, -h)[3], z)
                   - 2 * base) / (2 * h * h) / base
    rich = (4 * g(1e-3) - g(2e-3)) / 3
    assert abs(rich - d2) < 1e-5 * max(1.0, abs(d2))
    zero = DiscretizedKernel.assemble(lambda x, y: 0 * x * y, rule)
    assert det_expansion_terms(K0, [zero, zero, zero], z) == [0.0, 0.0, 0.0]


def test_third_order_term_against_the_jet():
    rule = QuadratureRule.gauss_legendre(0.0, 1.5, 24)
    z = -0.4
    K0, K1, K2, _ = _perturbed(rule, 0.0)
    K3 = DiscretizedKernel.assemble(lambda x, y: np.sin(x) * np.sin(y), rule)
    d = det_expansion_terms(K0, [K1, K2, K3], z)
    jet = determinant_jet([z * K.matrix for K in (K0, K1, K2, K3)])
    assert np.allclose(np.array(d), jet[1:] / jet[0], rtol=1e-11, atol=1e-13)


def test_traces():
    rule = QuadratureRule.gauss_legendre(0.0, airy_upper_limit(0.0), 80)
    V = DiscretizedKernel.assemble(lambda x, y: 0.5 * airy_pair(np.clip(0.5 * (x + y), -20, 40))[0], rule)
    # tr V = int_0^inf Ai(x)/2 dx = 1/6
    assert abs(np.trace(V.matrix) - 1 / 6) < 1e-10
    zero = DiscretizedKernel.assemble(lambda x, y: 0 * x * y, rule)
    assert resolvent_trace(zero, [zero], 1.0) == 0.0
    W = DiscretizedKernel.assemble(lambda x, y: np.cos(x - 2 * y) * np.exp(-x - y), rule)
    assert abs(resolvent_trace(zero, [V, W]) - resolvent_trace(zero, [W, V])) < 1e-12


@pytest.mark.parametrize("t,z", [(-1.0, 1.0), (2.0, -1.0), (-6.0, 1.0), (-9.0, -1.0)])
def test_jet_methods_agree(t, z):
    a = airy_kernel_jet(t, z, 6, method="contour")
    b = airy_kernel_jet(t, z, 6, method="contour", m=int(1.5 * airy_nodes(t - 1)))
    assert np.allclose(a, b, rtol=1e-9, atol=1e-12)
    if t > -2:
        c = airy_kernel_jet(t, z, 6, method="series")
        assert np.allclose(a, c, rtol=1e-9, atol=1e-12)


def test_jet_matches_finite_differences():
    j = airy_kernel_jet(-1.5, 1.0, 2)
    h = 1e-3
    f = lambda t: airy_kernel_jet(t, 1.0, 0)[0]
    assert abs((f(-1.5 + h) - f(-1.5 - h)) / (2 * h) - j[1]) < 1e-6
    assert abs((f(-1.5 + h) - 2 * j[0] + f(-1.5 - h)) / h ** 2 - j[2]) < 1e-5
