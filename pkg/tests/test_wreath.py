from __future__ import annotations

import random

import pytest

from daffine.group import evaluate_word, identity
from daffine.metric import cayley_ball, s1_letters
from daffine.tree import ORIGIN, ball, distance, neighbors, parent
from daffine.wreath import (
    WreathElement,
    edge_colour,
    embed,
    format_wreath,
    fp_inverse,
    fp_multiply,
    iota,
    iota_inv,
    is_reduced,
    isometry_check,
    parse_wreath,
    switch_walk_switch,
    wreath_identity,
    wreath_inverse,
    wreath_multiply,
    wreath_word_length,
)

from oracles import random_s1_word


def _random_reduced(rng, q, n):
    out = ""
    for _ in range(n):
        c = str(rng.randint(0, q))
        if out and out[-1] == c:
            continue
        out += c
    return out


def test_free_product_examples():
    assert fp_multiply("01", "10") == ""
    assert fp_multiply("012", "21") == "0"
    assert fp_multiply("0", "1") == "01"
    assert fp_inverse("012") == "210"
    assert is_reduced("0120", 2) and not is_reduced("011", 2) and not is_reduced("3", 2)


def test_free_product_axioms():
    rng = random.Random(1)
    for _ in range(500):
        a, b, c = (_random_reduced(rng, 2, 6) for _ in range(3))
        assert fp_multiply(fp_multiply(a, b), c) == fp_multiply(a, fp_multiply(b, c))
        assert fp_multiply(a, fp_inverse(a)) == ""
        assert is_reduced(fp_multiply(a, b), 2)


def test_colouring_is_proper():
    for q in (2, 3):
        for v in ball(4, q):
            cols = [edge_colour(v, q)] + [edge_colour(c, q) for c in neighbors(v, q)[1:]]
            assert sorted(cols) == list(range(q + 1))


def test_iota_is_a_graph_isomorphism():
    for q in (2, 3):
        words = {""}
        frontier = [""]
        for _ in range(4):
            nxt = []
            for w in frontier:
                for c in map(str, range(q + 1)):
                    u = fp_multiply(w, c)
                    if u not in words:
                        words.add(u)
                        nxt.append(u)
            frontier = nxt
        images = {w: iota(w, q) for w in words}
        assert len(set(images.values())) == len(words)
        for w, v in images.items():
            assert iota_inv(v, q) == w
            assert distance(ORIGIN, v) == len(w)
            for c in map(str, range(q + 1)):
                u = fp_multiply(w, c)
                if u in images:
                    assert distance(v, images[u]) == 1


def test_iota_inverse_on_tree_ball():
    for v in ball(5, 2):
        assert iota(iota_inv(v, 2), 2) == v


def test_wreath_group_axioms():
    rng = random.Random(3)
    gens = switch_walk_switch(2)
    els = []
    for _ in range(200):
        g = wreath_identity(2)
        for _ in range(rng.randint(0, 6)):
            g = wreath_multiply(g, rng.choice(gens))
        els.append(g)
    e = wreath_identity(2)
    for _ in range(300):
        a, b, c = rng.sample(els, 3)
        assert wreath_multiply(wreath_multiply(a, b), c) == wreath_multiply(a, wreath_multiply(b, c))
        assert wreath_multiply(a, wreath_inverse(a)) == e
        assert wreath_multiply(e, a) == a


def test_switch_walk_switch_count():
    assert len(switch_walk_switch(2)) == 12
    assert len(switch_walk_switch(3)) == 4 * 36


def test_wreath_word_length_equals_bfs():
    q = 2
    gens = switch_walk_switch(q)
    dist = {wreath_identity(q): 0}
    frontier = list(dist)
    for r in range(1, 5):
        nxt = []
        for g in frontier:
            for s in gens:
                h = wreath_multiply(g, s)
                if h not in dist:
                    dist[h] = r
                    nxt.append(h)
        frontier = nxt
    for g, d in dist.items():
        assert wreath_word_length(g) == d


def test_embed_identity_and_basepoint():
    assert embed(identity(2)) == wreath_identity(2)
    g = evaluate_word(random_s1_word(random.Random(5), 2, 7), 2)
    assert iota(embed(g).pos, 2) == g.origin_preimage


def test_isometry_on_ball_pairs():
    els = sorted(cayley_ball(s1_letters(2), 4), key=str)
    rng = random.Random(6)
    for g in els:
        assert isometry_check(g, g)
    for _ in range(3000):
        assert isometry_check(rng.choice(els), rng.choice(els))


def test_isometry_random_words_q3():
    rng = random.Random(7)
    for _ in range(300):
        x = evaluate_word(random_s1_word(rng, 3, rng.randint(0, 10)), 3)
        y = evaluate_word(random_s1_word(rng, 3, rng.randint(0, 10)), 3)
        assert isometry_check(x, y)


def test_wreath_text_round_trip():
    rng = random.Random(8)
    for _ in range(100):
        g = embed(evaluate_word(random_s1_word(rng, 2, rng.randint(0, 8)), 2))
        assert parse_wreath(format_wreath(g), 2) == g
    with pytest.raises(ValueError):
        parse_wreath("0;0=01", 2)
    with pytest.raises(ValueError):
        WreathElement(2, {}, "00")


def test_edge_colour_matches_parent_step():
    for v in ball(3, 2):
        w = iota_inv(v, 2)
        if w:
            # the last letter of the reduced word is the colour of the final edge
            u = iota(w[:-1], 2)
            assert distance(u, v) == 1
            edge_child = v if parent(v) == u else u
            assert edge_colour(edge_child, 2) == int(w[-1])
