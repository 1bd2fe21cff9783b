from __future__ import annotations

import itertools
from fractions import Fraction

import pytest

from daffine.group import alpha_power, delta, identity, multiply
from daffine.metric import ResourceLimitError, s0_letters, s1_letters
from daffine.tree import ORIGIN, Vertex, ball, ball_size
from daffine.walk import (
    biased_s1,
    confinement_lower_bound,
    confinement_probability,
    from_weights,
    lazify,
    return_counts_mc,
    return_probability_exact,
    return_probability_mc,
    uniform_s0,
    uniform_s1,
    wilson_interval,
)
from daffine.walk.returns import confinement_region_size

from oracles import oracle_act


def _word_oracle(letters, q, k):
    """Fraction of words of length ``k`` acting trivially on a ball that holds every support."""
    verts = ball(k + 1, q)
    hits = 0
    for word in itertools.product(letters, repeat=k):
        if all(oracle_act(v, word) == v for v in verts):
            hits += 1
    return Fraction(hits, len(letters) ** k)


def _fraction_convolution(mu, k):
    dist = {identity(mu.q): Fraction(1)}
    for _ in range(k):
        new = {}
        for g, p in dist.items():
            for h, w in mu.atoms:
                gh = multiply(g, h)
                new[gh] = new.get(gh, 0) + p * w
        dist = new
    return dist.get(identity(mu.q), Fraction(0))


def test_known_values_uniform_s1():
    table = return_probability_exact(uniform_s1(2), 4)
    assert [r.probability for r in table.rows] == [
        1, Fraction(1, 8), Fraction(7, 128), Fraction(29, 1024), Fraction(131, 8192)]
    assert table.exact and table.support_sizes[0] == 1 and table.support_sizes[1] == 8


def test_exact_matches_word_enumeration():
    # the label-array action never touches portraits
    table = return_probability_exact(uniform_s1(2), 2)
    letters = list(s1_letters(2).values())
    assert table.probability(1) == _word_oracle(letters, 2, 2)
    assert table.probability(2) == _word_oracle(letters, 2, 4)
    table = return_probability_exact(uniform_s0(2), 3)
    letters = list(s0_letters(2).values())
    for n in (1, 2, 3):
        assert table.probability(n) == _word_oracle(letters, 2, 2 * n)


def test_exact_matches_fraction_convolution():
    for mu in (uniform_s0(3), biased_s1(2, Fraction(1, 3)), lazify(uniform_s0(2))):
        table = return_probability_exact(mu, 2)
        for n in (1, 2):
            assert table.probability(n) == _fraction_convolution(mu, 2 * n)


def test_mu2_is_sum_of_squares_for_symmetric_mu():
    for mu in (uniform_s1(2), uniform_s0(3), lazify(uniform_s1(2))):
        assert mu.is_symmetric
        table = return_probability_exact(mu, 1)
        assert table.probability(0) == 1
        assert table.probability(1) == sum(p * p for p in mu.probabilities)


def test_log_convexity():
    for mu in (uniform_s1(2), uniform_s0(2)):
        p = [r.probability for r in return_probability_exact(mu, 4).rows]
        for n in range(len(p) - 2):
            assert p[n] * p[n + 2] >= p[n + 1] ** 2
        assert p == sorted(p, reverse=True)


def test_floor_marks_inexact_and_cap_raises():
    table = return_probability_exact(uniform_s1(2), 3, floor=Fraction(1, 1000))
    assert not table.exact
    exact = return_probability_exact(uniform_s1(2), 3)
    assert table.probability(3) <= exact.probability(3)
    with pytest.raises(ResourceLimitError):
        return_probability_exact(uniform_s1(2), 3, max_support=100)


def test_wilson_interval():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0 < hi < 0.1
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi and abs((lo + hi) / 2 - 0.5) < 1e-12
    with pytest.raises(ValueError):
        wilson_interval(0, 0)


def test_mc_agrees_with_exact():
    mu = uniform_s0(2)
    exact = return_probability_exact(mu, 3)
    # small runs get a z=4 band; the z=3 check at 10^5 trials is in the acceptance suite
    for seed in (0, 1):
        for est in return_counts_mc(mu, 3, 20_000, seed):
            assert est.contains(exact.probability(est.n), z=4)


def test_mc_estimates_decrease_and_match_single_n():
    mu = uniform_s1(2)
    ests = return_counts_mc(mu, 3, 20_000, 4)
    vals = [e.estimate for e in ests]
    assert vals == sorted(vals, reverse=True)
    single = return_probability_mc(mu, 3, 20_000, 4)
    assert single.successes == ests[-1].successes


def test_mc_rejects_degenerate_input():
    with pytest.raises(ValueError):
        return_probability_mc(uniform_s1(2), 2, 0, 1)
    with pytest.raises(ValueError):
        return_counts_mc(uniform_s1(2), 0, 10, 1)


def test_confinement_probability():
    mu = uniform_s1(2)
    for n in range(5):
        assert confinement_probability(mu, n * mu.radius, n) == 1
    assert confinement_probability(mu, 0, 1) == 0
    # S_0: alpha^{+-1} with 1/4 each, stay put with 1/2
    assert confinement_probability(uniform_s0(2), 0, 3) == Fraction(1, 8)
    assert confinement_probability(uniform_s0(2), 1, 2) == Fraction(7, 8)


def test_confinement_bound_below_exact():
    for mu in (uniform_s1(2), uniform_s0(2), lazify(uniform_s0(2))):
        exact = return_probability_exact(mu, 3)
        for n in range(4):
            for r in range(4):
                b = confinement_lower_bound(mu, r, n)
                assert 0 <= b.bound <= exact.probability(n)
                assert b.confinement == confinement_probability(mu, r, n)


def test_confinement_region_size():
    # S_0 atoms only write at the orbit: levels -1..1 below omega(1)
    assert confinement_region_size(uniform_s0(2), 1) == 1 + 2 + 4
    assert confinement_region_size(uniform_s1(2), 1) == 1 + 2 + 4
    # a switch at o1 writes off the orbit, so the region widens by R = 1: levels -2..2 below omega(2)
    mu = from_weights([(delta(Vertex(1, "1"), (1, 0)), Fraction(1, 2)),
                       (alpha_power(1, 2), Fraction(1, 4)), (alpha_power(-1, 2), Fraction(1, 4))], 2)
    assert confinement_region_size(mu, 1) == 1 + 2 + 4 + 8 + 16


def test_confinement_requires_symmetry():
    with pytest.raises(ValueError):
        confinement_lower_bound(biased_s1(2, Fraction(1, 3)), 1, 1)
    with pytest.raises(ValueError):
        confinement_lower_bound(uniform_s1(2), -1, 1)


def test_ball_size_counts():
    for q in (2, 3):
        for r in range(7):
            assert ball_size(r, q) == len(ball(r, q, ORIGIN))


def test_trivial_measure_always_returns():
    mu = from_weights([(identity(2), 1)], 2)
    table = return_probability_exact(mu, 3)
    assert all(r.probability == 1 for r in table.rows)
    assert all(e.successes == e.trials for e in return_counts_mc(mu, 2, 50, 0))
