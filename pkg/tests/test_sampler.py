import itertools
from collections import Counter

import numpy as np
import pytest
from scipy.stats import chisquare

from involution_lengths.exact_series import length_counts_table
from involution_lengths.sampler import (
    Histogram, RngStream, fixed_point_ratios, patience_length, sample_fpf_involution,
    sample_involution, simulate_lengths)


def _is_involution(p):
    return all(p[p[i] - 1] == i + 1 for i in range(len(p)))


def _lis(p, decreasing=False):
    best = 0
    for k in range(1, len(p) + 1):
        for idx in itertools.combinations(range(len(p)), k):
            vals = [p[i] for i in idx]
            if all((a > b) if decreasing else (a < b) for a, b in zip(vals, vals[1:])):
                best = k
                break
    return best


def test_small_sizes():
    assert sample_involution(0, RngStream(1)) == ()
    assert sample_involution(1, RngStream(1)) == (1,)
    assert sample_fpf_involution(1, RngStream(3)) == (2, 1)
    with pytest.raises(ValueError):
        RngStream(-1)
    with pytest.raises(ValueError):
        sample_involution(-2, RngStream(0))


def test_fixed_point_ratios():
    r = fixed_point_ratios(30)
    I = [1, 1, 2, 4, 10, 26]
    assert all(abs(r[k] - I[k - 1] / I[k]) < 1e-16 for k in range(1, 6))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_involutions_uniform(n):
    draws = Counter(sample_involution(n, RngStream(11, i)) for i in range(6000))
    assert all(_is_involution(p) for p in draws)
    n_inv = {2: 2, 3: 4, 4: 10}[n]
    assert len(draws) == n_inv
    assert chisquare(list(draws.values())).pvalue > 1e-4


def test_matchings_uniform():
    draws = Counter(sample_fpf_involution(2, RngStream(7, i)) for i in range(3000))
    assert len(draws) == 3 and all(_is_involution(p) and all(p[i] != i + 1 for i in range(4)) for p in draws)
    assert chisquare(list(draws.values())).pvalue > 1e-4


def test_patience_matches_brute_force():
    rng = np.random.default_rng(3)
    for _ in range(60):
        p = list(rng.permutation(8) + 1)
        assert patience_length(p) == _lis(p)
        assert patience_length(p, decreasing=True) == _lis(p, decreasing=True)


def test_reproducible_and_thread_independent():
    a = simulate_lengths("inv", 200, 2000, seed=9, threads=1)
    b = simulate_lengths("inv", 200, 2000, seed=9, threads=2)
    assert a.counts == b.counts
    one = simulate_lengths("inv", 200, 1, seed=9)
    assert one.samples == 1 and sum(one.counts.values()) == 1
    split = simulate_lengths("inv", 200, 1000, seed=9).merged(
        simulate_lengths("inv", 200, 1000, seed=9, first_stream=1000))
    assert split.counts == a.counts


def test_decreasing_fpf_lengths_are_even():
    h = simulate_lengths("decr-fpf", 30, 500, seed=2)
    assert all(l % 2 == 0 for l in h.counts)
    assert set(h.by_table_index()) == {l // 2 for l in h.counts}


def test_histogram_matches_exact_distribution():
    n = 12
    tab = length_counts_table("inv", n, cache=False)
    exact = tab.row(n)
    h = simulate_lengths("inv", n, 20000, seed=4)
    obs = [h.counts.get(l, 0) for l in range(1, n + 1)]
    exp = [20000 * exact[l] / tab.total(n) for l in range(1, n + 1)]
    keep = [i for i, e in enumerate(exp) if e >= 5]
    o = [obs[i] for i in keep]
    e = [exp[i] for i in keep]
    e = [x * sum(o) / sum(e) for x in e]
    assert chisquare(o, e).pvalue > 1e-4


def test_histogram_csv(tmp_path):
    h = Histogram("inv", 5, {2: 3, 3: 1}, 4, 8)
    h.to_csv(tmp_path / "h.csv")
    assert (tmp_path / "h.csv").read_text().splitlines() == [
        "case,n,l,count,samples,seed", "inv,5,2,3,4,8", "inv,5,3,1,4,8"]
    assert h.mean() == 2.25
    with pytest.raises(ValueError):
        Histogram("inv", 5, {2: 3}, 4, 8)
