"""Word metric for the switch-walk-switch generators S_1, with oracles.

``word_length`` is the closed form ``2*ell(g) - d(o, o.g^-1)`` where
``ell(g)`` counts the edges of the smallest subtree spanning the support,
``o`` and ``o.g^-1``.  ``witness_word`` builds an S_1 word of exactly that
length.  ``cayley_ball`` and ``schreier_ball`` are brute-force BFS used as
ground truth.
"""
from __future__ import annotations

import csv
import io
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from .group import (
    ALPHA,
    ALPHA_INV,
    Element,
    S0Letter,
    S1Letter,
    act,
    all_perms,
    alpha_power,
    delta,
    format_perm,
    identity,
    identity_perm,
    is_identity,
    letter_element,
    multiply,
    perm_compose,
    perm_inverse,
    serialize,
    transposition,
)
from .tree import ORIGIN, Vertex, ball, distance, format_vertex, parent, steiner, tsp_path


class ResourceLimitError(RuntimeError):
    """A configured enumeration budget was exceeded."""


def support(g: Element) -> frozenset:
    return g.support


def _is_root_switch(g: Element) -> bool:
    return g.shift == 0 and g.support == {ORIGIN}


def word_length(g: Element) -> int:
    if g.is_identity():
        return 0
    if _is_root_switch(g):
        return 2
    end = g.origin_preimage
    ell = steiner([ORIGIN, end, *g.support]).edge_count
    return 2 * ell - distance(ORIGIN, end)


def witness_word(g: Element) -> list[S1Letter]:
    """An S_1 word evaluating to ``g`` with ``word_length(g)`` letters.

    The inverted orbit of the word follows the deterministic TSP path of the
    support.  At the last visit of a vertex the portrait entry is set to its
    final value; at earlier visits the switch steers the next descent.
    """
    q = g.q
    ident = identity_perm(q)
    if g.is_identity():
        return []
    if _is_root_switch(g):
        return [S1Letter(g[ORIGIN], 1, ident), S1Letter(ident, -1, ident)]

    path = tsp_path(g.support, ORIGIN, g.origin_preimage)
    last = {v: i for i, v in enumerate(path)}
    w = identity(q)
    switches = []
    steps = []
    for i, (p, nxt) in enumerate(zip(path, path[1:])):
        if last[p] == i:
            c = perm_compose(perm_inverse(w[p]), g[p])
        elif nxt == parent(p):
            c = ident
        else:
            # the alpha^-1 move lands on digit 0.(w[p] c)^-1; steer it to nxt
            t = int(nxt.digits[-1]) if nxt.digits else 0
            c = transposition(0, w[p][t], q)
        step = 1 if nxt == parent(p) else -1
        w = multiply(multiply(w, delta(ORIGIN, c)), alpha_power(step, q))
        switches.append(c)
        steps.append(step)
    final = perm_compose(perm_inverse(w[path[-1]]), g[path[-1]])
    letters = [S1Letter(c, s, ident) for c, s in zip(switches, steps)]
    letters[-1] = S1Letter(letters[-1].before, letters[-1].step, final)
    return letters


def s1_letters(q: int) -> dict[Element, S1Letter]:
    """Distinct elements of S_1 with one representative letter each."""
    out: dict[Element, S1Letter] = {}
    for step in (1, -1):
        for a in all_perms(q):
            for b in all_perms(q):
                letter = S1Letter(a, step, b)
                out.setdefault(letter_element(letter, q), letter)
    return out


def s0_letters(q: int) -> dict[Element, S0Letter]:
    out = {alpha_power(1, q): ALPHA, alpha_power(-1, q): ALPHA_INV}
    for s in all_perms(q):
        out.setdefault(delta(ORIGIN, s), S0Letter(0, s))
    return out


def cayley_ball(gens: Iterable[Element], radius: int, *,
                max_elements: int = 2_000_000) -> dict[Element, int]:
    """BFS distances from the identity in the Cayley graph of ``gens``."""
    gens = list(dict.fromkeys(gens))
    if not gens:
        raise ValueError("empty generating set")
    gset = set(gens)
    for s in gens:
        if s.inverse() not in gset:
            raise ValueError(f"generating set is not symmetric: {serialize(s)}")
    e = identity(gens[0].q)
    dist = {e: 0}
    frontier = [e]
    for r in range(1, radius + 1):
        nxt = []
        for g in frontier:
            for s in gens:
                h = multiply(g, s)
                if h not in dist:
                    dist[h] = r
                    nxt.append(h)
        if len(dist) > max_elements:
            raise ResourceLimitError(
                f"Cayley ball exceeded {max_elements} elements at radius {r}")
        frontier = nxt
    return dist


def sphere_sizes(dist: dict) -> list[int]:
    out = [0] * (max(dist.values()) + 1)
    for d in dist.values():
        out[d] += 1
    return out


# -- Schreier graph ----------------------------------------------------------

@dataclass
class SchreierGraph:
    q: int
    radius: int
    vertices: list
    edges: list  # (u, v, label), u != v, both inside the ball
    dist: dict = field(default_factory=dict)  # d_G(o, v)

    def tree_distance(self, v: Vertex) -> int:
        return distance(ORIGIN, v)

    def bound_violations(self) -> list:
        bad = []
        for v in self.vertices:
            dt = distance(ORIGIN, v)
            dg = self.dist.get(v)
            if dg is None or not dt <= dg <= 2 * dt:
                bad.append((v, dt, dg))
        return bad


def _s0_action_labels(q: int):
    out = [("a", alpha_power(1, q)), ("A", alpha_power(-1, q))]
    for s in all_perms(q):
        if not is_identity(s):
            out.append(("d" + format_perm(s), delta(ORIGIN, s)))
    return out


def schreier_ball(radius: int, q: int) -> SchreierGraph:
    """Schreier graph of the S_0 action on the tree, restricted to a ball.

    BFS runs in the full (unrestricted) graph up to depth ``2 * radius``,
    so every distance it reports is exact.  A ball vertex it does not reach
    has ``d_G > 2 * radius`` and is reported by ``bound_violations``.
    """
    labels = _s0_action_labels(q)
    verts = ball(radius, q)
    inside = set(verts)
    dist = {ORIGIN: 0}
    frontier = [ORIGIN]
    depth = 0
    while frontier and depth < 2 * radius:
        depth += 1
        nxt = []
        for v in frontier:
            for _, s in labels:
                w = act(v, s)
                if w not in dist:
                    dist[w] = depth
                    nxt.append(w)
        frontier = nxt
    edges = []
    for v in verts:
        for name, s in labels:
            w = act(v, s)
            if w != v and w in inside:
                edges.append((v, w, name))
    return SchreierGraph(q, radius, verts, edges,
                         {v: dist[v] for v in verts if v in dist})


# -- exports -----------------------------------------------------------------

def to_dot(vertices: Iterable, edges: Iterable, name: str = "G") -> str:
    lines = [f"digraph {name} {{"]
    for v in vertices:
        lines.append(f'  "{_node_name(v)}";')
    for u, v, label in edges:
        lines.append(f'  "{_node_name(u)}" -> "{_node_name(v)}" [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_csv_edges(edges: Iterable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["source", "target", "label"])
    for u, v, label in edges:
        w.writerow([_node_name(u), _node_name(v), label])
    return buf.getvalue()


def _node_name(x) -> str:
    if isinstance(x, Vertex):
        return format_vertex(x)
    if isinstance(x, Element):
        return serialize(x)
    return str(x)


def cayley_edges(dist: dict[Element, int], gens: dict[Element, object]) -> list:
    out = []
    for g in sorted(dist, key=lambda x: (dist[x], serialize(x))):
        for s, label in gens.items():
            h = multiply(g, s)
            if h in dist:
                out.append((g, h, str(label)))
    return out
