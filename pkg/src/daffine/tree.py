"""Labelled affine (q+1)-regular tree.

A vertex at Busemann level ``b`` is a sequence of digits indexed by
``]-inf, b]`` that vanishes far to the left.  We store only the non-zero
tail: ``Vertex(b, digits)`` where ``digits`` is empty or starts with a
non-zero letter and its last letter sits at index ``b``.  The all-zero
sequences are the ray vertices ``omega(n) = Vertex(-n, "")`` for ``n >= 0``
and their zero-descendants ``Vertex(b, "")`` for ``b > 0`` (so ``o0`` is
``Vertex(1, "")``).

Digits are single characters ``'0'..'8'`` which caps ``q`` at 9.
"""
from __future__ import annotations

import re
from typing import Iterable, NamedTuple

MAX_Q = 9


class Vertex(NamedTuple):
    busemann: int
    digits: str = ""

    def __str__(self) -> str:
        return format_vertex(self)

    @property
    def start(self) -> int:
        """Index of the first non-zero digit (``busemann + 1`` if none)."""
        return self.busemann - len(self.digits) + 1


ORIGIN = Vertex(0, "")


class SteinerResult(NamedTuple):
    edge_count: int
    edges: frozenset
    vertices: frozenset
    top: Vertex


def check_q(q: int) -> int:
    if not isinstance(q, int) or not 2 <= q <= MAX_Q:
        raise ValueError(f"q must be an integer in [2, {MAX_Q}], got {q!r}")
    return q


def is_canonical(v, q: int | None = None) -> bool:
    if not isinstance(v, Vertex) or not isinstance(v.busemann, int):
        return False
    d = v.digits
    if not isinstance(d, str):
        return False
    if d and d[0] == "0":
        return False
    hi = str(q - 1) if q is not None else "9"
    return all("0" <= c <= hi for c in d)


def ray_vertex(n: int) -> Vertex:
    if n < 0:
        raise ValueError("ray index must be non-negative")
    return Vertex(-n, "")


def parent(v: Vertex) -> Vertex:
    # truncating a canonical tail never exposes a leading zero
    return Vertex(v.busemann - 1, v.digits[:-1])


def ancestor(v: Vertex, k: int) -> Vertex:
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0:
        return v
    d = v.digits
    return Vertex(v.busemann - k, d[:-k] if k < len(d) else "")


def child(v: Vertex, t: int, q: int | None = None) -> Vertex:
    if q is not None and not 0 <= t < q:
        raise ValueError(f"digit {t} out of range for q={q}")
    if not v.digits and t == 0:
        return Vertex(v.busemann + 1, "")
    return Vertex(v.busemann + 1, v.digits + str(t))


def children(v: Vertex, q: int) -> list[Vertex]:
    return [child(v, t) for t in range(q)]


def neighbors(v: Vertex, q: int) -> list[Vertex]:
    return [parent(v)] + children(v, q)


def last_digit(v: Vertex) -> int:
    """Digit of ``v`` at its own level (the edge label to its parent)."""
    return int(v.digits[-1]) if v.digits else 0


def label_digit(v: Vertex, i: int) -> str:
    """Letter of the labelling sequence of ``v`` at index ``i <= busemann``."""
    s = v.start
    if s <= i <= v.busemann:
        return v.digits[i - s]
    return "0"


def path_from_origin(v: Vertex) -> tuple[int, str]:
    """Return ``(k, word)``: climb ``k`` edges from ``o`` then descend along ``word``."""
    c = min(0, v.busemann, v.start - 1)
    if v.digits:
        word = "0" * (v.start - c - 1) + v.digits
    else:
        word = "0" * (v.busemann - c)
    return -c, word


def deepest_common_ancestor(u: Vertex, v: Vertex) -> Vertex:
    top = min(u.busemann, v.busemann)
    lo = min(u.start, v.start)
    c = top
    for i in range(lo, top + 1):
        if label_digit(u, i) != label_digit(v, i):
            c = i - 1
            break
    return ancestor(u, u.busemann - c)


dca = deepest_common_ancestor


def distance(u: Vertex, v: Vertex) -> int:
    c = deepest_common_ancestor(u, v).busemann
    return u.busemann + v.busemann - 2 * c


def ball(radius: int, q: int, center: Vertex = ORIGIN) -> list[Vertex]:
    """All vertices within ``radius`` of ``center`` in BFS order."""
    check_q(q)
    seen = {center}
    frontier = [center]
    out = [center]
    for _ in range(radius):
        nxt = []
        for x in frontier:
            for y in neighbors(x, q):
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        out.extend(nxt)
        frontier = nxt
    return out


def ball_size(radius: int, q: int) -> int:
    if radius < 0:
        return 0
    return 1 + (q + 1) * sum(q ** j for j in range(radius))


def _chain(v: Vertex, top: Vertex, acc: set) -> None:
    while v != top and v not in acc:
        acc.add(v)
        v = parent(v)


def steiner(points: Iterable[Vertex]) -> SteinerResult:
    pts = list(points)
    if not pts:
        raise ValueError("steiner needs at least one point")
    top = pts[0]
    for p in pts[1:]:
        top = deepest_common_ancestor(top, p)
    below: set = set()
    for p in pts:
        _chain(p, top, below)
    edges = frozenset((parent(x), x) for x in below)
    return SteinerResult(len(below), edges, frozenset(below | {top}), top)


def tsp_length(targets: Iterable[Vertex], start: Vertex, end: Vertex) -> int:
    ell = steiner([start, end, *targets]).edge_count
    return 2 * ell - distance(start, end)


def geodesic(u: Vertex, v: Vertex) -> list[Vertex]:
    c = deepest_common_ancestor(u, v)
    up = [ancestor(u, k) for k in range(u.busemann - c.busemann + 1)]
    down = [ancestor(v, k) for k in range(v.busemann - c.busemann)]
    return up + down[::-1]


def tsp_path(targets: Iterable[Vertex], start: Vertex, end: Vertex) -> list[Vertex]:
    """Deterministic shortest walk from ``start`` to ``end`` through ``targets``.

    At every vertex the walk first tours the side branches of the Steiner
    tree (the parent side, then children by ascending digit) and takes the
    branch leading to ``end`` last.
    """
    st = steiner([start, end, *targets])
    kids: dict[Vertex, list[Vertex]] = {}
    for x in st.vertices:
        if x != st.top:
            kids.setdefault(parent(x), []).append(x)
    for lst in kids.values():
        lst.sort(key=last_digit)

    def nbrs(x: Vertex) -> list[Vertex]:
        out = [parent(x)] if x != st.top else []
        return out + kids.get(x, [])

    geo = geodesic(start, end)
    nxt = dict(zip(geo, geo[1:]))

    path = [start]

    def tour(root: Vertex, came_from: Vertex) -> None:
        stack = [(root, iter([y for y in nbrs(root) if y != came_from]))]
        while stack:
            x, it = stack[-1]
            y = next(it, None)
            if y is None:
                stack.pop()
                if stack:
                    path.append(stack[-1][0])
                continue
            path.append(y)
            stack.append((y, iter([z for z in nbrs(y) if z != x])))

    cur, prev = start, None
    while True:
        for y in nbrs(cur):
            if y == prev or y == nxt.get(cur):
                continue
            path.append(y)
            tour(y, cur)
            path.append(cur)
        if cur == end:
            return path
        prev, cur = cur, nxt[cur]
        path.append(cur)


_VERTEX_RE = re.compile(r"(-?(?:0|[1-9][0-9]*))\|((?:[1-9][0-9]*)?)\Z")


def format_vertex(v: Vertex) -> str:
    return f"{v.busemann}|{v.digits}"


def parse_vertex(text: str, q: int | None = None) -> Vertex:
    m = _VERTEX_RE.match(text)
    if not m or m.group(1) == "-0":
        raise ValueError(f"malformed vertex {text!r}")
    v = Vertex(int(m.group(1)), m.group(2))
    if not is_canonical(v, q):
        raise ValueError(f"digit out of range in {text!r}")
    return v
