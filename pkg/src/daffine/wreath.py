"""The lamplighter group S_q wr F_{q+1} and the isometric embedding of DA(T).

``F_{q+1}`` is the free product of ``q+1`` copies of Z/2; reduced words are
strings over the colours ``'0'..str(q)`` with no letter repeated twice in a
row.  Its Cayley tree is identified with T by a proper edge colouring:

* the ray edge ``omega(n) -- omega(n+1)`` has colour ``n % 2``;
* below a vertex whose parent edge has colour ``c``, the children in
  ascending digit order take the colours of ``{0..q} - {c}`` in ascending
  order.

Both rules agree along the ray, so every vertex sees ``q+1`` distinct
colours.
"""
from __future__ import annotations

import re
from typing import Mapping

from .group import (
    Element,
    Perm,
    all_perms,
    check_perm,
    format_perm,
    identity_perm,
    inverse,
    parse_perm,
    perm_compose,
    perm_inverse,
)
from .metric import word_length
from .tree import ORIGIN, Vertex, check_q, child, parent, path_from_origin, tsp_length

FreeWord = str


def is_reduced(u: str, q: int) -> bool:
    return all(c.isdigit() and int(c) <= q for c in u) and all(a != b for a, b in zip(u, u[1:]))


def fp_multiply(u: FreeWord, v: FreeWord) -> FreeWord:
    i = 0
    n = min(len(u), len(v))
    while i < n and u[len(u) - 1 - i] == v[i]:
        i += 1
    return u[:len(u) - i] + v[i:]


def fp_inverse(u: FreeWord) -> FreeWord:
    return u[::-1]


# -- identification of the Cayley tree with T ---------------------------------

def _child_colours(c: int, q: int) -> list[int]:
    return [x for x in range(q + 1) if x != c]


def edge_colour(v: Vertex, q: int) -> int:
    """Colour of the edge from ``v`` to its parent."""
    k, word = path_from_origin(v)
    if not word:
        return k % 2
    c = k % 2
    for t in word:
        c = _child_colours(c, q)[int(t)]
    return c


def iota(u: FreeWord, q: int) -> Vertex:
    check_q(q)
    v = ORIGIN
    c = 0  # parent-edge colour of the current vertex
    for letter in u:
        x = int(letter)
        if x == c:
            v = parent(v)
            c = edge_colour(v, q)
        else:
            v = child(v, _child_colours(c, q).index(x))
            c = x
    return v


def iota_inv(v: Vertex, q: int) -> FreeWord:
    k, word = path_from_origin(v)
    up = "".join(str(j % 2) for j in range(k))
    c = k % 2
    down = []
    for t in word:
        c = _child_colours(c, q)[int(t)]
        down.append(str(c))
    return up + "".join(down)


# -- wreath elements ---------------------------------------------------------

class WreathElement:
    """``(config, pos)`` with ``config`` a finitely supported lamp map."""

    __slots__ = ("q", "config", "pos", "_hash")

    def __init__(self, q: int, config: Mapping[FreeWord, Perm] | None = None,
                 pos: FreeWord = ""):
        check_q(q)
        ident = identity_perm(q)
        if not is_reduced(pos, q):
            raise ValueError(f"position {pos!r} is not a reduced word")
        cfg = {}
        for w, p in (config or {}).items():
            if not is_reduced(w, q):
                raise ValueError(f"site {w!r} is not a reduced word")
            p = check_perm(p, q)
            if p != ident:
                cfg[w] = p
        self.q = q
        self.config = cfg
        self.pos = pos
        self._hash = None

    def __eq__(self, other) -> bool:
        if not isinstance(other, WreathElement):
            return NotImplemented
        return self.q == other.q and self.pos == other.pos and self.config == other.config

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.q, self.pos, frozenset(self.config.items())))
        return self._hash

    def __mul__(self, other: WreathElement) -> WreathElement:
        return wreath_multiply(self, other)

    def __repr__(self) -> str:
        return f"WreathElement(q={self.q}, {format_wreath(self)!r})"


def _raw(q, cfg, pos) -> WreathElement:
    g = WreathElement.__new__(WreathElement)
    g.q, g.config, g.pos, g._hash = q, cfg, pos, None
    return g


def wreath_identity(q: int) -> WreathElement:
    return _raw(check_q(q), {}, "")


def wreath_multiply(a: WreathElement, b: WreathElement) -> WreathElement:
    if a.q != b.q:
        raise ValueError("mismatched q")
    ident = identity_perm(a.q)
    cfg = dict(a.config)
    for w, p in b.config.items():
        site = fp_multiply(a.pos, w)
        s = cfg.get(site)
        new = p if s is None else perm_compose(s, p)
        if new == ident:
            del cfg[site]
        else:
            cfg[site] = new
    return _raw(a.q, cfg, fp_multiply(a.pos, b.pos))


def wreath_inverse(a: WreathElement) -> WreathElement:
    back = fp_inverse(a.pos)
    cfg = {fp_multiply(back, w): perm_inverse(p) for w, p in a.config.items()}
    return _raw(a.q, cfg, back)


def switch_walk_switch(q: int) -> list[WreathElement]:
    """The generators ``(delta_e^h1, e)(1, s)(delta_e^h2, e)`` as distinct elements."""
    out = {}
    for s in range(q + 1):
        for h1 in all_perms(q):
            for h2 in all_perms(q):
                g = wreath_multiply(
                    wreath_multiply(WreathElement(q, {"": h1}), WreathElement(q, {}, str(s))),
                    WreathElement(q, {"": h2}))
                out.setdefault(g, None)
    return list(out)


def wreath_word_length(a: WreathElement) -> int:
    if not a.config and not a.pos:
        return 0
    if not a.pos and set(a.config) == {""}:
        return 2
    q = a.q
    return tsp_length([iota(w, q) for w in a.config], ORIGIN, iota(a.pos, q))


def embed(g: Element) -> WreathElement:
    """``g -> ({g[v]}, o.g^-1)`` transported to F_{q+1}.

    This is a metric map, not a group homomorphism.
    """
    q = g.q
    cfg = {iota_inv(v, q): p for v, p in g.portrait.items()}
    return _raw(q, cfg, iota_inv(g.origin_preimage, q))


def isometry_check(x: Element, y: Element) -> bool:
    lhs = wreath_word_length(wreath_multiply(wreath_inverse(embed(x)), embed(y)))
    rhs = word_length(inverse(x) * y)
    return lhs == rhs


# -- text format -------------------------------------------------------------

def format_wreath(a: WreathElement) -> str:
    entries = ",".join(f"{w}={format_perm(p)}"
                       for w, p in sorted(a.config.items(), key=lambda kv: (len(kv[0]), kv[0])))
    return f"{a.pos};{entries}"


def parse_wreath(text: str, q: int) -> WreathElement:
    pos, sep, body = text.strip().partition(";")
    if not sep:
        raise ValueError(f"malformed wreath element {text!r}")
    cfg: dict = {}
    keys = []
    for entry in body.split(",") if body else []:
        w, eq, p = entry.partition("=")
        if not eq or not re.fullmatch(r"[0-9]*", w):
            raise ValueError(f"malformed entry {entry!r}")
        perm = parse_perm(p, q)
        if perm == identity_perm(q) or w in cfg:
            raise ValueError(f"non-canonical entry {entry!r}")
        cfg[w] = perm
        keys.append(w)
    if keys != sorted(keys, key=lambda w: (len(w), w)):
        raise ValueError("lamp entries must be sorted")
    return WreathElement(q, cfg, pos)

