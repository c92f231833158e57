import itertools
import math

import pytest

from involution_lengths.exact_series import involution_numbers, length_counts_table
from involution_lengths.oracle import (
    enumeration_histogram,
    enumerate_involutions, goulden_count, is_involution, lis_quadratic, monotone_subseq_length,
    partitions, regev_estimate, rsk_count, syt_count)


def test_small_enumerations():
    assert sorted(enumerate_involutions(3)) == [(1, 2, 3), (1, 3, 2), (2, 1, 3), (3, 2, 1)]
    assert list(enumerate_involutions(2, fixed_point_free=True)) == [(2, 1)]
    assert sum(1 for _ in enumerate_involutions(4)) == 10
    assert list(enumerate_involutions(0)) == [()]


def test_enumeration_counts_and_validity():
    for n in range(1, 9):
        invs = list(enumerate_involutions(n))
        assert len(invs) == involution_numbers(n)[n] == len(set(invs))
        assert all(is_involution(p) for p in invs)
    assert sum(1 for _ in enumerate_involutions(10, True)) == 945


def test_enumeration_guards():
    with pytest.raises(ValueError):
        list(enumerate_involutions(15))
    with pytest.raises(ValueError):
        list(enumerate_involutions(5, fixed_point_free=True))


def test_patience_sorting():
    assert monotone_subseq_length((3, 2, 1)) == 1
    assert monotone_subseq_length((1, 2, 3, 4, 5)) == 5
    assert monotone_subseq_length((2, 1, 4, 5, 3)) == 3
    assert monotone_subseq_length((2, 1, 4, 5, 3), "decr") == 2
    for p in itertools.permutations(range(1, 7)):
        assert monotone_subseq_length(p) == lis_quadratic(p)


def test_hook_lengths():
    assert syt_count((5,)) == 1
    assert syt_count((2, 1)) == 2
    assert syt_count((2, 2)) == 2
    assert syt_count((3, 2, 1)) == 16
    # sum of squares of dimensions is n!
    assert sum(syt_count(l) ** 2 for l in partitions(7)) == math.factorial(7)
    # sum of dimensions counts involutions
    assert sum(syt_count(l) for l in partitions(9)) == involution_numbers(9)[9]
    with pytest.raises(ValueError):
        syt_count((1, 2))


def test_partition_stream():
    assert sum(1 for _ in partitions(20)) == 627
    assert list(partitions(4, max_part=2)) == [(2, 2), (2, 1, 1), (1, 1, 1, 1)]


def test_tableau_sums():
    assert rsk_count("inv", 3, 2) == 2
    assert rsk_count("incr-fpf", 1, 1) == 1
    for n in range(1, 7):
        # decreasing length 2n forces the reversal: one tableau of shape (2n)
        assert rsk_count("decr-fpf", n, n) == syt_count([2 * n]) == 1
        assert rsk_count("decr-fpf", n, n) == enumeration_histogram("decr-fpf", n)[n]
        assert rsk_count("decr-fpf", n, n) == length_counts_table("decr-fpf", n, cache=False).count(n, n)


def test_closed_formula():
    assert all(goulden_count(n, n) == 1 for n in range(1, 15))
    assert goulden_count(5, 3) == length_counts_table("inv", 5, cache=False).count(5, 3)
    assert goulden_count(8, 4) == rsk_count("inv", 8, 4)
    with pytest.raises(ValueError):
        goulden_count(10, 3)


def test_leading_order_estimate():
    assert all(abs(regev_estimate("inv", n, 1) - 1) < 1e-12 for n in (5, 50, 500))
    # the fixed-point-free constants carry an extra factor 2
    tab = length_counts_table("inv", 300, rows=[300], bounds=[3], cache=False)
    assert abs(regev_estimate("inv", 300, 3) / tab.cumulative(300, 3) - 1) < 0.1
    tab = length_counts_table("incr-fpf", 200, rows=[200], bounds=[3], cache=False)
    assert abs(regev_estimate("incr-fpf", 200, 3) / tab.cumulative(200, 3) - 1) < 0.1
