import math

import numpy as np
import pytest

from involution_lengths.edge import (
    REFERENCE_MOMENTS, TW_INTERVAL, bessel_gap_det, chebyshev_points, hard_edge_gap, hard_edge_order,
    hard_to_soft_probe, soft_edge_jets, soft_edge_representation, tracy_widom_cdf, tw_derivative,
    tw_jets, tw_moment, tw_moment_by_parts)
from involution_lengths.operators import airy_kernel_jet


def test_upper_tail():
    for beta in (2, 4):
        assert abs(tracy_widom_cdf(beta, 8.0) - 1) < 1e-10
    # beta = 1 still misses 1 by the tail mass e^{-2/3 t^{3/2}} / (4 sqrt(pi) t^{3/4}) ~ 8e-9
    tail = math.exp(-2 / 3 * 8 ** 1.5) / (4 * math.sqrt(math.pi) * 8 ** 0.75)
    assert abs((1 - tracy_widom_cdf(1, 8.0)) / tail - 1) < 0.05


def test_symmetry_class_assembly():
    t = np.linspace(-6, 4, 11)
    plus, minus = soft_edge_jets(t, 1.0, 3), soft_edge_jets(t, -1.0, 3)
    assert np.array_equal(tw_jets(4, t, 3), 0.5 * (plus + minus))
    assert np.allclose(tw_jets(2, t, 0)[:, 0], plus[:, 0] * minus[:, 0], rtol=1e-15)


def test_representation_matches_direct_jets():
    for t in (-7.3, -2.2, 0.4, 4.1):
        direct = airy_kernel_jet(t, 1.0, 7)
        assert np.allclose(soft_edge_jets(t, 1.0, 7), direct, rtol=1e-9, atol=1e-11)
    rep = soft_edge_representation(-1.0)
    assert rep.contains(0.0) and not rep.contains(6.0)
    x = chebyshev_points(*TW_INTERVAL, 5)
    assert np.all(np.diff(x) > 0) and TW_INTERVAL[0] < x[0] and x[-1] < TW_INTERVAL[1]


def test_density_and_finite_differences():
    t = np.linspace(-7, 4, 45)
    for beta in (1, 2, 4):
        assert np.all(tw_derivative(beta, 1, t) >= -1e-15)
        h = 1e-4
        fd = (tracy_widom_cdf(beta, t + h) - tracy_widom_cdf(beta, t - h)) / (2 * h)
        assert np.max(np.abs(fd - tw_derivative(beta, 1, t))) < 1e-6
    with pytest.raises(ValueError):
        tw_derivative(1, 2, 4.8)
    with pytest.raises(ValueError):
        tw_derivative(1, 8, 0.0)


def test_moments():
    assert abs(tw_moment(1, 0) - 1) < 1e-8
    assert abs(tw_moment(4, 0) - 1) < 1e-8
    assert abs(tw_moment(1, 1) - REFERENCE_MOMENTS[1][0]) < 1e-8
    assert abs(tw_moment(4, 2) - REFERENCE_MOMENTS[4][1]) < 1e-8
    for j in (1, 2, 3):
        assert abs(tw_moment_by_parts(1, j) - tw_moment(1, j)) < 1e-8
    with pytest.raises(ValueError):
        tw_moment(3, 1)


def test_hard_edge_closed_forms():
    assert hard_edge_gap(1, 0.0, 2.0) == 1.0
    for s in (0.5, 1.0, 2.0):
        assert abs(hard_edge_gap(4, 4 * s * s, 1) - math.exp(-s * s / 2) * math.cosh(s)) < 1e-10
    assert abs(hard_edge_gap(1, 4.0, -0.5) - math.exp(-1.5)) < 1e-10
    assert abs(bessel_gap_det(hard_edge_order(1, -0.5), 4.0) - math.exp(-1.5)) < 1e-10


def test_hard_edge_orders():
    assert hard_edge_order(1, 0.5) == 2.0
    assert hard_edge_order(4, 3) == 2
    with pytest.raises(ValueError):
        hard_edge_gap(2, 1.0, 1.0)


@pytest.mark.parametrize("nu,s", [(10.0, 40.0), (100.0, 9000.0), (400.0, 150000.0)])
def test_bessel_determinant_refinement(nu, s):
    coarse = bessel_gap_det(nu, s)
    fine = bessel_gap_det(nu, s, m=2 * 120)
    assert abs(coarse - fine) < 1e-10


def test_hard_to_soft_limit():
    r = [abs(hard_to_soft_probe(1, nu, -1.0, 0)) for nu in (50, 200, 800)]
    assert r[0] > r[1] > r[2]
    with pytest.raises(ValueError):
        hard_to_soft_probe(1, 10, 0.0)
