"""Elements of the discrete affine group DA(T).

An element is a pair ``(portrait, shift)`` written ``gamma * alpha**shift``
where the portrait is a finitely supported map from vertices to
permutations of the digit alphabet.  Everything is a *right* action:
``v.(g*h) == (v.g).h`` and permutations compose left to right.

Acting on vertices is local: once ``o.g`` and ``o.g^-1`` are known (they are
computed once and cached), pushing or pulling a vertex at distance ``d``
from ``o`` costs ``O(d)`` lookups.
"""
from __future__ import annotations

import itertools
import re
from functools import lru_cache, reduce
from types import MappingProxyType
from typing import Iterable, Mapping, NamedTuple, Sequence

from .tree import (
    ORIGIN,
    Vertex,
    ancestor,
    check_q,
    child,
    format_vertex,
    parse_vertex,
    path_from_origin,
)

Perm = tuple


# -- permutations ------------------------------------------------------------

@lru_cache(maxsize=None)
def identity_perm(q: int) -> Perm:
    return tuple(range(q))


def is_identity(p: Perm) -> bool:
    return p == identity_perm(len(p))


def check_perm(p, q: int) -> Perm:
    p = tuple(p)
    if len(p) != q or sorted(p) != list(range(q)):
        raise ValueError(f"{p!r} is not a permutation of range({q})")
    return p


def perm_compose(s: Perm, t: Perm) -> Perm:
    """``s`` then ``t``: maps ``x`` to ``t[s[x]]``."""
    if len(s) != len(t):
        raise ValueError("permutations act on different alphabets")
    return tuple(t[x] for x in s)


@lru_cache(maxsize=4096)
def perm_inverse(p: Perm) -> Perm:
    inv = [0] * len(p)
    for i, x in enumerate(p):
        inv[x] = i
    return tuple(inv)


def transposition(a: int, b: int, q: int) -> Perm:
    p = list(range(q))
    p[a], p[b] = p[b], p[a]
    return tuple(p)


@lru_cache(maxsize=None)
def all_perms(q: int) -> tuple:
    return tuple(itertools.permutations(range(q)))


def format_perm(p: Perm) -> str:
    return "".join(map(str, p))


def parse_perm(text: str, q: int) -> Perm:
    if not re.fullmatch(r"[0-9]+", text):
        raise ValueError(f"malformed permutation {text!r}")
    return check_perm((int(c) for c in text), q)


# -- elements ----------------------------------------------------------------

class Element:
    """An element ``gamma * alpha**shift`` of DA(T) for a fixed ``q``."""

    __slots__ = ("q", "shift", "_portrait", "_hash", "_pre", "_img")

    def __init__(self, q: int, shift: int = 0, portrait: Mapping | None = None):
        check_q(q)
        ident = identity_perm(q)
        port = {}
        for v, p in (portrait or {}).items():
            if not isinstance(v, Vertex):
                v = Vertex(*v)
            p = check_perm(p, q)
            if p != ident:
                port[v] = p
        self._init(q, int(shift), port)

    def _init(self, q, shift, port, pre=None, img=None):
        self.q = q
        self.shift = shift
        self._portrait = port
        self._hash = None
        self._pre = pre
        self._img = img

    @classmethod
    def _raw(cls, q, shift, port, pre=None, img=None) -> Element:
        g = cls.__new__(cls)
        g._init(q, shift, port, pre, img)
        return g

    @property
    def portrait(self) -> Mapping[Vertex, Perm]:
        return MappingProxyType(self._portrait)

    def __getitem__(self, v: Vertex) -> Perm:
        return self._portrait.get(v, identity_perm(self.q))

    @property
    def support(self) -> frozenset:
        return frozenset(self._portrait)

    @property
    def phi(self) -> int:
        return self.shift

    def is_identity(self) -> bool:
        return self.shift == 0 and not self._portrait

    def __eq__(self, other) -> bool:
        if not isinstance(other, Element):
            return NotImplemented
        return (self.q == other.q and self.shift == other.shift
                and self._portrait == other._portrait)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.q, self.shift, frozenset(self._portrait.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"Element(q={self.q}, {serialize(self)!r})"

    def __str__(self) -> str:
        return serialize(self)

    def __mul__(self, other: Element) -> Element:
        return multiply(self, other)

    def __pow__(self, n: int) -> Element:
        base = self if n >= 0 else inverse(self)
        out = identity(self.q)
        for _ in range(abs(n)):
            out = multiply(out, base)
        return out

    def inverse(self) -> Element:
        return inverse(self)

    @property
    def origin_image(self) -> Vertex:
        """``o.g``"""
        if self._img is None:
            self._img = _descend_image(self)
        return self._img

    @property
    def origin_preimage(self) -> Vertex:
        """``o.g^-1``, the current point of the inverted orbit."""
        if self._pre is None:
            self._pre = _descend_preimage(self)
        return self._pre


def identity(q: int) -> Element:
    return Element._raw(check_q(q), 0, {}, ORIGIN, ORIGIN)


def alpha_power(m: int, q: int) -> Element:
    check_q(q)
    return Element._raw(q, m, {}, Vertex(-m, ""), Vertex(m, ""))


def delta(v: Vertex, sigma: Perm) -> Element:
    q = len(sigma)
    sigma = check_perm(sigma, q)
    port = {} if is_identity(sigma) else {v: sigma}
    return Element._raw(check_q(q), 0, port)


def _top_level(g: Element, *levels: int) -> int:
    lo = min(levels) if levels else 0
    for v in g._portrait:
        if v.busemann < lo:
            lo = v.busemann
    return min(lo, 0)


def _descend_image(g: Element) -> Vertex:
    # o = omega(-L) followed by zeros; omega(-L) is fixed once L <= every support level
    port = g._portrait
    top = _top_level(g)
    src = img = Vertex(top, "")
    for _ in range(-top):
        s = port.get(src)
        img = child(img, s[0] if s else 0)
        src = child(src, 0)
    return Vertex(img.busemann + g.shift, img.digits)


def _descend_preimage(g: Element) -> Vertex:
    # o.g^-1 = (o.alpha^-m).gamma^-1 and o.alpha^-m = Vertex(-m, "")
    port = g._portrait
    target = -g.shift
    top = _top_level(g, target)
    img = Vertex(top, "")
    for _ in range(target - top):
        s = port.get(img)
        img = child(img, perm_inverse(s)[0] if s else 0)
    return img


def pull(u: Vertex, g: Element) -> Vertex:
    """``u.g^-1``"""
    k, word = path_from_origin(u)
    a = ancestor(g.origin_preimage, k)
    port = g._portrait
    for c in word:
        t = int(c)
        s = port.get(a)
        if s is not None:
            t = perm_inverse(s)[t]
        a = child(a, t)
    return a


def act(v: Vertex, g: Element) -> Vertex:
    """``v.g``"""
    k, word = path_from_origin(v)
    src = ancestor(ORIGIN, k)
    img = ancestor(g.origin_image, k)
    port = g._portrait
    for c in word:
        t = int(c)
        s = port.get(src)
        img = child(img, s[t] if s is not None else t)
        src = child(src, t)
    return img


def multiply(g: Element, h: Element) -> Element:
    if g.q != h.q:
        raise ValueError("elements belong to groups with different q")
    if not g._portrait and not h._portrait:
        return alpha_power(g.shift + h.shift, g.q)
    port = dict(g._portrait)
    ident = identity_perm(g.q)
    for u, tau in h._portrait.items():
        v = pull(u, g)
        s = port.get(v)
        new = tau if s is None else perm_compose(s, tau)
        if new == ident:
            del port[v]
        else:
            port[v] = new
    pre = pull(h.origin_preimage, g)
    return Element._raw(g.q, g.shift + h.shift, port, pre)


def inverse(g: Element) -> Element:
    port = {act(v, g): perm_inverse(s) for v, s in g._portrait.items()}
    return Element._raw(g.q, -g.shift, port, g.origin_image, g.origin_preimage)


def phi(g: Element) -> int:
    return g.shift


# -- generators and words ----------------------------------------------------

class S0Letter(NamedTuple):
    """``alpha`` (step=+1), ``alpha^-1`` (step=-1) or ``delta_o^perm`` (step=0)."""

    step: int
    perm: Perm | None = None

    def __str__(self) -> str:
        if self.step == 1:
            return "a"
        if self.step == -1:
            return "A"
        return "d" + format_perm(self.perm)


class S1Letter(NamedTuple):
    """Switch-walk-switch letter ``delta_o^before * alpha^step * delta_o^after``."""

    before: Perm
    step: int
    after: Perm

    def __str__(self) -> str:
        return f"{format_perm(self.before)}{'+' if self.step > 0 else '-'}{format_perm(self.after)}"

    def s0_expansion(self) -> list[S0Letter]:
        out = []
        if not is_identity(self.before):
            out.append(S0Letter(0, self.before))
        out.append(S0Letter(self.step))
        if not is_identity(self.after):
            out.append(S0Letter(0, self.after))
        return out


ALPHA = S0Letter(1)
ALPHA_INV = S0Letter(-1)


def letter_element(letter, q: int) -> Element:
    if isinstance(letter, Element):
        return letter
    if isinstance(letter, S1Letter):
        if letter.step not in (1, -1):
            raise ValueError("S1 letters step by alpha^{+1} or alpha^{-1}")
        return multiply(multiply(delta(ORIGIN, check_perm(letter.before, q)),
                                 alpha_power(letter.step, q)),
                        delta(ORIGIN, check_perm(letter.after, q)))
    if isinstance(letter, S0Letter):
        if letter.step == 0:
            return delta(ORIGIN, check_perm(letter.perm, q))
        if letter.step in (1, -1):
            return alpha_power(letter.step, q)
    raise ValueError(f"not a generator letter: {letter!r}")


def evaluate_word(letters: Iterable, q: int) -> Element:
    """Product of the letters, leftmost first."""
    return reduce(multiply, (letter_element(x, q) for x in letters), identity(q))


def s0_elements(q: int) -> list[Element]:
    """The generating set S_0 as distinct elements (contains the identity)."""
    out = [alpha_power(1, q), alpha_power(-1, q)]
    out += [delta(ORIGIN, s) for s in all_perms(q)]
    return list(dict.fromkeys(out))


# -- text format -------------------------------------------------------------

def serialize(g: Element) -> str:
    entries = ",".join(f"{format_vertex(v)}={format_perm(p)}"
                       for v, p in sorted(g._portrait.items()))
    return f"{g.shift};{entries}"


def parse(text: str, q: int) -> Element:
    check_q(q)
    head, sep, body = text.strip().partition(";")
    if not sep or not re.fullmatch(r"-?(?:0|[1-9][0-9]*)", head) or head == "-0":
        raise ValueError(f"malformed element {text!r}")
    port: dict = {}
    keys = []
    if body:
        for entry in body.split(","):
            vs, eq, ps = entry.partition("=")
            if not eq:
                raise ValueError(f"malformed entry {entry!r}")
            v = parse_vertex(vs, q)
            p = parse_perm(ps, q)
            if is_identity(p):
                raise ValueError(f"identity entry at {vs} is not canonical")
            if v in port:
                raise ValueError(f"duplicate vertex {vs}")
            port[v] = p
            keys.append(v)
    if keys != sorted(keys):
        raise ValueError("portrait entries must be sorted")
    return Element._raw(q, int(head), port)


def parse_word(text: str, q: int) -> list:
    """Parse whitespace separated letters: ``a``, ``A``, ``d<perm>`` or ``<perm>[+-]<perm>``."""
    out: list = []
    for tok in text.split():
        if tok == "a":
            out.append(ALPHA)
        elif tok == "A":
            out.append(ALPHA_INV)
        elif tok.startswith("d"):
            out.append(S0Letter(0, parse_perm(tok[1:], q)))
        else:
            m = re.fullmatch(r"([0-9]+)([+-])([0-9]+)", tok)
            if not m:
                raise ValueError(f"bad letter {tok!r}")
            out.append(S1Letter(parse_perm(m.group(1), q), 1 if m.group(2) == "+" else -1,
                                parse_perm(m.group(3), q)))
    return out


def format_word(letters: Sequence) -> str:
    return " ".join(map(str, letters))
