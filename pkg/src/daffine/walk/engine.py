"""Incremental simulation of the right random walk ``w_n = x_1 ... x_n``.

The walk state keeps the portrait of ``w_n`` and the inverted-orbit point
``o.w_n^-1`` on a pool of interned tree nodes, so that one step costs
``O(|supp x| * R)`` pointer moves instead of a full group multiplication.
The update mirrors ``multiply``: the entries of ``x`` are pulled back
through ``w_{n-1}``, which only touches vertices near ``o.w_{n-1}^-1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..group import Element, identity_perm, perm_compose, perm_inverse
from ..tree import Vertex, ball, path_from_origin
from .measures import StepDistribution

CHECKPOINT_EVERY = 1024


class Node:
    """A tree vertex in a :class:`NodePool`; compared by identity."""

    __slots__ = ("up", "digit", "level", "join", "kids", "ray")

    def __init__(self, up, digit, level, join, q, ray=-1):
        self.up = up
        self.digit = digit
        self.level = level
        self.join = join  # index n of the ray vertex omega(n) where the path to omega leaves
        self.kids = [None] * q
        self.ray = ray


class NodePool:
    def __init__(self, q: int):
        self.q = q
        self.origin = Node(None, 0, 0, 0, q, ray=0)
        self.top = self.origin

    def extend_ray(self) -> Node:
        old = self.top
        n = old.ray + 1
        new = Node(None, 0, -n, n, self.q, ray=n)
        new.kids[0] = old
        old.up = new
        self.top = new
        return new

    def parent(self, a: Node) -> Node:
        return a.up if a.up is not None else self.extend_ray()

    def child(self, a: Node, t: int) -> Node:
        c = a.kids[t]
        if c is None:
            c = a.kids[t] = Node(a, t, a.level + 1, a.join, self.q)
        return c

    def ray_node(self, n: int) -> Node:
        while self.top.ray < n:
            self.extend_ray()
        a = self.top
        while a.ray > n:
            a = a.kids[0]
        return a

    def node(self, v: Vertex) -> Node:
        k, word = path_from_origin(v)
        a = self.ray_node(k)
        for c in word:
            a = self.child(a, int(c))
        return a

    def vertex(self, a: Node) -> Vertex:
        level = a.level
        digits = []
        while a.ray < 0:
            digits.append(str(a.digit))
            a = a.up
        return Vertex(level, "".join(reversed(digits)).lstrip("0"))

    def distance(self, a: Node, b: Node) -> int:
        d = 0
        while a.level > b.level:
            a = a.up
            d += 1
        while b.level > a.level:
            b = b.up
            d += 1
        while a is not b:
            a = self.parent(a)
            b = self.parent(b)
            d += 2
        return d

    def dca(self, a: Node, b: Node) -> Node:
        while a.level > b.level:
            a = a.up
        while b.level > a.level:
            b = b.up
        while a is not b:
            a = self.parent(a)
            b = self.parent(b)
        return a

    @staticmethod
    def origin_distance(a: Node) -> int:
        return a.level + 2 * a.join


@dataclass
class _Atom:
    support: tuple  # ((k, digits, tau), ...) for each portrait entry of x
    orbit: tuple  # (k, digits) of o.x^-1
    dphi: int  # Phi(x^-1)


def _compile(g: Element) -> _Atom:
    sup = []
    for v, tau in sorted(g.portrait.items()):
        k, word = path_from_origin(v)
        sup.append((k, tuple(int(c) for c in word), tau))
    k, word = path_from_origin(g.origin_preimage)
    return _Atom(tuple(sup), (k, tuple(int(c) for c in word)), -g.shift)


class WalkState:
    """Portrait of ``w_n`` and the point ``o.w_n^-1``, updated one increment at a time.

    ``watch`` is an optional collection of vertices whose modifications are
    logged; each logged modification is checked against the locality bound
    ``d(v, o.w_{n-1}^-1) <= R``.
    """

    def __init__(self, mu: StepDistribution, watch=None):
        self.mu = mu
        self.q = mu.q
        self.R = mu.radius
        self.pool = NodePool(self.q)
        self._atoms = [_compile(g) for g in mu.elements]
        self._ident = identity_perm(self.q)
        self.portrait: dict[Node, tuple] = {}
        self.p = self.pool.origin
        self.phi_hat = 0
        self.n = 0
        self.watch: dict[Node, Vertex] = {}
        for v in watch or ():
            self.watch[self.pool.node(v)] = v
        self.last_modified: dict[Vertex, int] = {}
        self.changes: list[tuple[int, Vertex]] = []

    def _pull(self, a: Node, k: int, word) -> Node:
        pool = self.pool
        for _ in range(k):
            a = a.up if a.up is not None else pool.extend_ray()
        port = self.portrait
        for t in word:
            s = port.get(a)
            if s is not None:
                t = perm_inverse(s)[t]
            c = a.kids[t]
            if c is None:
                c = pool.child(a, t)
            a = c
        return a

    def step(self, index: int) -> bool:
        """Multiply by atom ``index`` on the right; return whether a watched vertex changed."""
        atom = self._atoms[index]
        p = self.p
        targets = [(self._pull(p, k, word), tau) for k, word, tau in atom.support]
        newp = self._pull(p, *atom.orbit)
        self.n += 1
        self.phi_hat += atom.dphi
        if newp.level != self.phi_hat:
            raise AssertionError(f"orbit level {newp.level} != Phi {self.phi_hat} at step {self.n}")
        port = self.portrait
        ident = self._ident
        changed = False
        for v, tau in targets:
            s = port.get(v)
            new = tau if s is None else perm_compose(s, tau)
            if new == ident:
                del port[v]
            else:
                port[v] = new
            if v in self.watch:
                if self.pool.distance(v, p) > self.R:
                    raise AssertionError(f"portrait changed outside the R-ball at step {self.n}")
                vert = self.watch[v]
                self.last_modified[vert] = self.n
                self.changes.append((self.n, vert))
                changed = True
        self.p = newp
        return changed

    # -- read-out ----------------------------------------------------------

    def orbit_vertex(self) -> Vertex:
        return self.pool.vertex(self.p)

    def element(self) -> Element:
        """The current product ``w_n`` as a full :class:`Element`."""
        vert = self.pool.vertex
        port = {vert(a): s for a, s in self.portrait.items()}
        return Element._raw(self.q, -self.phi_hat, port, vert(self.p))

    def value(self, v: Vertex):
        return self.portrait.get(self.pool.node(v), self._ident)

    def word_length(self) -> int:
        """``|w_n|_{S_1}`` from the closed form, evaluated on the node pool."""
        port = self.portrait
        origin = self.pool.origin
        if self.phi_hat == 0 and not port:
            return 0
        if self.phi_hat == 0 and len(port) == 1 and origin in port:
            return 2
        seen = set()
        off_ray = 0
        top = 0
        for a in (self.p, *port):
            while a.ray < 0 and a not in seen:
                seen.add(a)
                off_ray += 1
                a = a.up
            top = max(top, a.join)
        return 2 * (off_ray + top) - NodePool.origin_distance(self.p)


@dataclass
class FinalConfigurationWindow:
    """Portrait values of ``w_n`` on the ball ``B(o, radius)`` after ``n_steps``.

    ``frozen`` lists vertices the orbit has left behind: at the final step
    they are farther than ``R + margin`` from ``o.w_n^-1``.  This is a
    heuristic flag, the walk could still come back.
    """

    radius: int
    R: int
    n_steps: int
    values: dict
    last_modified: dict
    changes: list
    frozen: frozenset = frozenset()

    def max_last_modified(self, horizon: int | None = None) -> int:
        times = [n for n, _ in self.changes if horizon is None or n <= horizon]
        return max(times, default=0)

    def changed_steps(self) -> list[int]:
        return sorted({n for n, _ in self.changes})


@dataclass(frozen=True)
class Checkpoint:
    n: int
    phi_hat: int
    orbit: Node
    support_size: int


@dataclass
class Trajectory:
    mu: StepDistribution
    seed: int
    chain: int
    increments: np.ndarray
    phi_hat: np.ndarray  # Phi(w_n^-1) for n = 0..n_steps
    orbit: list | None  # nodes o.w_n^-1 in the state's pool
    state: WalkState
    checkpoints: dict = field(default_factory=dict)
    window: FinalConfigurationWindow | None = None

    @property
    def n_steps(self) -> int:
        return len(self.increments)

    @property
    def pool(self) -> NodePool:
        return self.state.pool

    def orbit_vertex(self, n: int) -> Vertex:
        return self.pool.vertex(self.orbit[n])

    def element_at(self, n: int) -> Element:
        """``w_n`` rebuilt by replaying the first ``n`` increments."""
        state = WalkState(self.mu)
        for x in self.increments[:n].tolist():
            state.step(x)
        return state.element()

    def phi(self, n: int) -> int:
        """``Phi(w_n)``"""
        return -int(self.phi_hat[n])


def chain_rng(seed: int, chain: int = 0) -> np.random.Generator:
    """Stream for chain ``chain`` of master seed ``seed``.

    Streams are ``SeedSequence(seed, spawn_key=(chain,))``, so chain ``c``
    is identical whether it runs alone or as part of a batch.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chain,)))


def sample_increments(mu: StepDistribution, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` i.i.d. atom indices; a prefix of a longer draw equals the shorter draw."""
    cum = np.cumsum([float(p) for p in mu.probabilities])
    cum[-1] = 1.0
    return np.searchsorted(cum, rng.random(n), side="right").astype(np.int64)


def phi_steps(mu: StepDistribution) -> np.ndarray:
    """``Phi(x^-1)`` for every atom, aligned with the increment indices."""
    return np.array([-g.shift for g in mu.elements], dtype=np.int64)


def sample_path(mu: StepDistribution, n_steps: int, seed: int, *, chain: int = 0,
                window: int | None = None, checkpoint_every: int | None = CHECKPOINT_EVERY,
                keep_orbit: bool = True, frozen_margin: int | None = None) -> Trajectory:
    if n_steps < 0:
        raise ValueError("n_steps must be non-negative")
    incs = sample_increments(mu, n_steps, chain_rng(seed, chain))
    watch = ball(window, mu.q) if window is not None else None
    state = WalkState(mu, watch)
    phi_hat = np.empty(n_steps + 1, dtype=np.int64)
    phi_hat[0] = 0
    orbit = [state.p] if keep_orbit else None
    checkpoints = {0: Checkpoint(0, 0, state.p, 0)} if checkpoint_every else {}
    step = state.step
    for i, x in enumerate(incs.tolist(), 1):
        step(x)
        phi_hat[i] = state.phi_hat
        if keep_orbit:
            orbit.append(state.p)
        if checkpoint_every and i % checkpoint_every == 0:
            checkpoints[i] = Checkpoint(i, state.phi_hat, state.p, len(state.portrait))
    # Phi of the inverted orbit is the partial sum of Phi(x_i^-1)
    expected = np.concatenate([[0], np.cumsum(phi_steps(mu)[incs])]) if n_steps else phi_hat[:1]
    if not np.array_equal(expected, phi_hat):
        raise AssertionError("Phi track differs from the partial sums of the increments")
    win = None
    if watch is not None:
        margin = mu.radius if frozen_margin is None else frozen_margin
        node = state.pool.node
        frozen = frozenset(v for v in watch
                           if state.pool.distance(node(v), state.p) > mu.radius + margin)
        win = FinalConfigurationWindow(
            window, mu.radius, n_steps,
            {v: state.value(v) for v in watch if state.value(v) != state._ident},
            dict(state.last_modified), list(state.changes), frozen)
    return Trajectory(mu, seed, chain, incs, phi_hat, orbit, state, checkpoints, win)
