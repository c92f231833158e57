import math
from fractions import Fraction

import pytest

from involution_lengths.cases import get_case
from involution_lengths.exact_series import (
    CountCache, ExactTable, TruncatedSeries, chazy_coefficients, chazy_reference,
    cumulative_counts, double_factorial, generating_series, group_series, involution_numbers,
    length_counts_table, windowed_table)
from involution_lengths.oracle import enumeration_histogram


def test_involution_numbers_start():
    assert involution_numbers(9) == [1, 1, 2, 4, 10, 26, 76, 232, 764, 2620]


def test_double_factorial():
    assert [double_factorial(k) for k in (-1, 1, 3, 5, 7)] == [1, 1, 3, 15, 105]


@pytest.mark.parametrize("l,sign", [(1, 1), (1, -1), (2, 1), (3, -1), (5, 1)])
def test_fast_chazy_matches_literal_loop(l, sign):
    N = 40
    assert list(chazy_coefficients(l, sign, N)) == chazy_reference(l, sign, N)


def test_chazy_leading_behaviour():
    # v = x^2 + sign x^(l+1)/l! + ...
    for l in (2, 3, 4):
        for sign in (1, -1):
            v = chazy_coefficients(l, sign, l + 2)
            assert v[2] == 1 + (sign if l == 1 else 0)
            assert v[l + 1] == Fraction(sign, math.factorial(l))


def test_group_integral_of_trivial_groups():
    # O(1) = {+1, -1}: the two components integrate to exp(x) and exp(-x)
    N = 20
    assert list(group_series(0, 1, N)) == [Fraction(1, math.factorial(k)) for k in range(N + 1)]
    assert list(group_series(0, -1, N)) == [Fraction((-1) ** k, math.factorial(k)) for k in range(N + 1)]


def test_series_arithmetic():
    x = TruncatedSeries([0, 1], order=8)
    e = x.exp()
    assert list(e) == [Fraction(1, math.factorial(k)) for k in range(9)]
    assert e.log() == x
    assert (e * (-x).exp()) == TruncatedSeries([1], order=8)


@pytest.mark.parametrize("case", ["incr-fpf", "decr-fpf", "inv"])
def test_counts_match_enumeration(case):
    c = get_case(case)
    top = 5 if c.fixed_point_free else 8
    tab = length_counts_table(case, top, cache=False)
    for n in range(1, top + 1):
        hist = enumeration_histogram(case, n)
        assert {l: k for l, k in tab.row(n).items() if k} == hist


@pytest.mark.parametrize("case", ["incr-fpf", "decr-fpf", "inv"])
def test_top_bound_counts_everything(case):
    c = get_case(case)
    counts = cumulative_counts(case, 40, 40)
    assert counts[40] == c.total(40)
    assert all(a <= b for a, b in zip(cumulative_counts(case, 7, 40), counts))


def test_rows_and_full_list_agree():
    full = cumulative_counts("inv", 9, 60)
    picked = cumulative_counts("inv", 9, 60, rows=[3, 17, 60])
    assert picked == {3: full[3], 17: full[17], 60: full[60]}


def test_incr_bound_one_is_cosh():
    f = generating_series("incr-fpf", 1, 12)
    assert list(f) == [Fraction(1, math.factorial(k)) if k % 2 == 0 else 0 for k in range(13)]


def test_exact_table_csv_round_trip(tmp_path):
    tab = length_counts_table("decr-fpf", 9, cache=False)
    path = tmp_path / "t.csv"
    meta = tab.to_csv(path)
    assert meta["n_max"] == 9
    back = ExactTable.from_csv(path)
    for n in range(1, 10):
        assert back.row(n) == tab.row(n)
    path.write_text(path.read_text().replace("decr-fpf,9,9,1", "decr-fpf,9,9,2"))
    with pytest.raises(ValueError, match="checksum"):
        ExactTable.from_csv(path)


def test_table_probabilities_and_moments():
    tab = length_counts_table("inv", 6, cache=False)
    assert sum(tab.pmf(6, l) for l in range(1, 7)) == 1
    mean, var = tab.moments(6)
    exact_mean = Fraction(sum(l * c for l, c in tab.row(6).items()), 76)
    assert mean == exact_mean
    assert var == Fraction(sum(l * l * c for l, c in tab.row(6).items()), 76) - exact_mean ** 2


def test_decr_moments_refer_to_the_length():
    tab = length_counts_table("decr-fpf", 4, cache=False)
    hist = tab.row(4)
    mean = Fraction(sum(2 * l * c for l, c in hist.items()), 105)
    assert tab.moments(4)[0] == mean


def test_missing_bound_is_an_error():
    tab = length_counts_table("inv", 10, rows=[10], bounds=[3, 4, 5], cache=False)
    with pytest.raises(KeyError):
        tab.cumulative(10, 7)


def test_cache_round_trip(private_cache):
    cache = CountCache(private_cache / "c.sqlite")
    cache.put("inv", 3, {5: 2 ** 90 + 1, 6: 7})
    assert cache.get("inv", 3, [5, 6, 9]) == {5: 2 ** 90 + 1, 6: 7}
    t1 = length_counts_table("inv", 30, rows=[30], bounds=[6, 7], cache=cache)
    t2 = length_counts_table("inv", 30, rows=[30], bounds=[6, 7], cache=cache)
    assert t1.cumulative(30, 7) == t2.cumulative(30, 7)
    # every row below the requested one is kept as well
    assert cache.get("inv", 6, [12])[12] == cumulative_counts("inv", 6, 12)[12]


def test_window_tails_are_small(private_cache):
    tab = windowed_table("inv", [200], tail=1e-30)
    lo, hi = tab.tail_mass(200)
    assert lo < 1e-30 and hi < 1e-30


def test_bad_arguments():
    with pytest.raises(ValueError):
        cumulative_counts("inv", -1, 5)
    with pytest.raises(ValueError):
        get_case("unknown")
