"""A quick invariant sweep used by ``daffine selftest``."""
from __future__ import annotations

import random
from fractions import Fraction

from .group import act, evaluate_word, identity, inverse, multiply
from .metric import cayley_ball, s1_letters, schreier_ball, witness_word, word_length
from .tree import ball, distance, tsp_length
from .walk import (
    biased_s1,
    return_counts_mc,
    return_probability_exact,
    sample_path,
    uniform_s0,
    uniform_s1,
)
from .wreath import isometry_check


def _random_element(rng: random.Random, gens, length: int):
    g = identity(gens[0].q)
    for _ in range(length):
        g = multiply(g, rng.choice(gens))
    return g


def _group_axioms(q, rng):
    gens = list(s1_letters(q))
    e = identity(q)
    for _ in range(200):
        a, b, c = (_random_element(rng, gens, rng.randint(0, 6)) for _ in range(3))
        if (a * b) * c != a * (b * c) or a * e != a or a * inverse(a) != e:
            return False
        if inverse(a * b) != inverse(b) * inverse(a):
            return False
    return True


def _action(q, rng):
    gens = list(s1_letters(q))
    verts = ball(3, q)
    for _ in range(50):
        g = _random_element(rng, gens, rng.randint(0, 6))
        h = _random_element(rng, gens, rng.randint(0, 6))
        gh = g * h
        for v in verts:
            if act(v, gh) != act(act(v, g), h):
                return False
            if act(v, g).busemann - v.busemann != g.shift:
                return False
    return True


def _metric(q, rng):
    dist = cayley_ball(s1_letters(q), 4 if q == 2 else 3)
    if any(word_length(g) != d for g, d in dist.items()):
        return False
    for g in rng.sample(sorted(dist, key=str), 300):
        w = witness_word(g)
        if len(w) != word_length(g) or evaluate_word(w, q) != g:
            return False
    return True


def _schreier(q, rng):
    return not schreier_ball(4, q).bound_violations()


def _isometry(q, rng):
    els = sorted(cayley_ball(s1_letters(q), 3), key=str)
    return all(isometry_check(rng.choice(els), rng.choice(els)) for _ in range(500))


def _tsp(q, rng):
    verts = ball(2, q)
    for _ in range(100):
        a, b, c = (rng.choice(verts) for _ in range(3))
        if tsp_length([c], a, b) != distance(a, c) + distance(c, b):
            return False
    return True


def _engine(q, rng):
    mu = uniform_s0(q)
    tr = sample_path(mu, 600, 11)
    w = evaluate_word([mu.elements[i] for i in tr.increments.tolist()], q)
    return tr.state.element() == w and tr.orbit_vertex(600) == w.origin_preimage


def _returns(q, rng):
    mu = uniform_s1(q)
    tab = return_probability_exact(mu, 2)
    est = return_counts_mc(mu, 2, 20_000, 5)
    return all(e.contains(tab.probability(e.n)) for e in est)


def _drift(q, rng):
    mu = biased_s1(q, Fraction(2, 3))
    return mu.drift == Fraction(-1, 3) and mu.radius == 1


CHECKS = [
    ("group axioms", _group_axioms),
    ("right action and Busemann cocycle", _action),
    ("word length vs Cayley BFS, witness words", _metric),
    ("Schreier distance bounds", _schreier),
    ("wreath isometry", _isometry),
    ("tree TSP through one target", _tsp),
    ("incremental walk vs multiplication", _engine),
    ("exact vs Monte Carlo return probability", _returns),
    ("measure drift and radius", _drift),
]


def run_selftest(q: int = 2, seed: int = 0) -> list[tuple[str, bool]]:
    rng = random.Random(seed)
    return [(name, bool(fn(q, rng))) for name, fn in CHECKS]
