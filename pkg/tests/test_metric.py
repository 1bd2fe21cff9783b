from __future__ import annotations

import random

import pytest

from daffine.group import act, alpha_power, delta, evaluate_word, identity, inverse, s0_elements
from daffine.metric import (
    ResourceLimitError,
    cayley_ball,
    s0_letters,
    s1_letters,
    schreier_ball,
    sphere_sizes,
    support,
    to_csv_edges,
    to_dot,
    witness_word,
    word_length,
)
from daffine.tree import ORIGIN, Vertex, distance

from oracles import random_s1_word

SWAP = (1, 0)
O0 = Vertex(1, "")


@pytest.fixture(scope="module")
def ball6():
    return cayley_ball(s1_letters(2), 6)


def test_support_examples():
    assert support(identity(2)) == frozenset()
    assert support(alpha_power(5, 2)) == frozenset()
    assert support(delta(O0, SWAP)) == {O0}


def test_word_length_examples():
    assert word_length(delta(ORIGIN, SWAP)) == 2
    assert word_length(identity(2)) == 0
    for m in range(-6, 7):
        assert word_length(alpha_power(m, 2)) == abs(m)
    assert word_length(delta(O0, SWAP)) == 2
    assert word_length(delta(ORIGIN, (1, 2, 0))) == 2


def test_generating_set_sizes():
    assert len(s1_letters(2)) == 8
    assert len(s1_letters(3)) == 72
    assert len(s0_elements(2)) == 4
    assert len(s0_letters(3)) == 2 + 6


def test_cayley_ball_small_radii():
    assert cayley_ball(s1_letters(2), 0) == {identity(2): 0}
    d1 = cayley_ball(s1_letters(2), 1)
    assert all(d == 1 for g, d in d1.items() if not g.is_identity())
    assert len(d1) == 9


def test_cayley_ball_rejects_asymmetric_and_caps():
    with pytest.raises(ValueError):
        cayley_ball([alpha_power(1, 2)], 2)
    with pytest.raises(ResourceLimitError):
        cayley_ball(s1_letters(2), 6, max_elements=500)


def test_word_length_equals_bfs_q2(ball6):
    assert sphere_sizes(ball6) == [1, 8, 25, 72, 212, 624, 1810]
    for g, d in ball6.items():
        assert word_length(g) == d


def test_word_length_equals_bfs_q3_small():
    for g, d in cayley_ball(s1_letters(3), 3).items():
        assert word_length(g) == d


def test_word_length_symmetric_and_subadditive(ball6):
    els = sorted(ball6, key=str)
    rng = random.Random(1)
    for _ in range(2000):
        g, h = rng.choice(els), rng.choice(els)
        assert word_length(inverse(g)) == word_length(g)
        assert word_length(g * h) <= word_length(g) + word_length(h)


def test_witness_examples():
    assert witness_word(identity(2)) == []
    w = witness_word(delta(ORIGIN, SWAP))
    assert len(w) == 2 and evaluate_word(w, 2) == delta(ORIGIN, SWAP)


def test_witness_round_trip_on_ball(ball6):
    for g in ball6:
        w = witness_word(g)
        assert len(w) == word_length(g)
        assert evaluate_word(w, 2) == g


def test_witness_round_trip_random_long_words():
    rng = random.Random(8)
    for q in (2, 3):
        for _ in range(300):
            g = evaluate_word(random_s1_word(rng, q, rng.randint(0, 20)), q)
            w = witness_word(g)
            assert len(w) == word_length(g)
            assert evaluate_word(w, q) == g


def test_witness_is_deterministic():
    g = evaluate_word(random_s1_word(random.Random(2), 2, 12), 2)
    assert witness_word(g) == witness_word(g)


def test_schreier_examples_and_bounds():
    sg = schreier_ball(6, 2)
    assert sg.dist[ORIGIN] == 0
    assert sg.dist[O0] == 1
    assert not sg.bound_violations()
    assert len(sg.dist) == len(sg.vertices)
    for v in sg.vertices:
        assert distance(ORIGIN, v) <= sg.dist[v] <= 2 * distance(ORIGIN, v)


def test_schreier_edges_are_actions():
    sg = schreier_ball(3, 3)
    gens = {"a": alpha_power(1, 3), "A": alpha_power(-1, 3)}
    for g, letter in s0_letters(3).items():
        gens[str(letter)] = g
    inside = set(sg.vertices)
    for u, v, label in sg.edges:
        assert u != v and v in inside
        assert act(u, gens[label]) == v
    assert len(sg.edges) == sum(act(u, g) != u and act(u, g) in inside
                                for u in sg.vertices for name, g in gens.items()
                                if name != "d012")


def test_exports():
    sg = schreier_ball(2, 2)
    dot = to_dot(sg.vertices, sg.edges)
    assert dot.startswith("digraph") and '"0|" -> "1|" [label="a"]' in dot
    csv_text = to_csv_edges(sg.edges)
    assert csv_text.splitlines()[0] == "source,target,label"
    assert len(csv_text.splitlines()) == len(sg.edges) + 1
