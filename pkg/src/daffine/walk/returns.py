"""Return probabilities ``mu^(2n)(e)``: exact convolution, Monte Carlo, confinement bound."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..group import Element, identity, multiply
from ..metric import ResourceLimitError
from ..tree import ORIGIN, ball_size
from .engine import chain_rng, sample_increments
from .measures import StepDistribution


class TransitionCache:
    """Memoized right multiplication ``(g, atom index) -> g * x``."""

    def __init__(self, mu: StepDistribution, max_entries: int = 4_000_000):
        self.mu = mu
        self.atoms = mu.elements
        self.max_entries = max_entries
        self._table: dict = {}

    def step(self, g: Element, i: int) -> Element:
        key = (g, i)
        h = self._table.get(key)
        if h is None:
            h = multiply(g, self.atoms[i])
            if len(self._table) < self.max_entries:
                self._table[key] = h
        return h


@dataclass
class ReturnRow:
    n: int
    probability: Fraction  # mu^(2n)(e)
    support_size: int  # |supp mu^(2n)|


@dataclass
class ReturnTable:
    label: str
    rows: list
    exact: bool = True  # False once a probability floor dropped mass
    floor: Fraction = Fraction(0)
    support_sizes: list = field(default_factory=list)  # |supp mu^(k)| for every k

    def probability(self, n: int) -> Fraction:
        return self.rows[n].probability


def return_probability_exact(mu: StepDistribution, n_max: int, *, floor=0,
                             max_support: int = 2_000_000) -> ReturnTable:
    """``mu^(2n)(e)`` for ``n = 0..n_max`` by exact convolution.

    Masses are integer numerators over ``D^k`` where ``D`` is the common
    denominator of the atoms.  A positive ``floor`` drops elements whose
    mass falls below it; the table is then marked inexact.
    """
    floor = Fraction(floor)
    D = math.lcm(*(p.denominator for p in mu.probabilities))
    weights = [int(p * D) for p in mu.probabilities]
    cache = TransitionCache(mu, max_entries=0)
    e = identity(mu.q)
    dist = {e: 1}
    rows = [ReturnRow(0, Fraction(1), 1)]
    sizes = [1]
    exact = True
    for k in range(1, 2 * n_max + 1):
        new: dict = {}
        for g, c in dist.items():
            for i, w in enumerate(weights):
                h = cache.step(g, i)
                new[h] = new.get(h, 0) + c * w
            if len(new) > max_support:
                raise ResourceLimitError(
                    f"support of mu^({k}) exceeded {max_support} elements")
        if floor > 0:
            scale = D ** k
            kept = {g: c for g, c in new.items() if Fraction(c, scale) >= floor}
            exact = exact and len(kept) == len(new)
            new = kept
        dist = new
        sizes.append(len(dist))
        if k % 2 == 0:
            rows.append(ReturnRow(k // 2, Fraction(dist.get(e, 0), D ** k), len(dist)))
    return ReturnTable(mu.label, rows, exact, floor, sizes)


def wilson_interval(successes: int, trials: int, z: float = 3.0) -> tuple[float, float]:
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = successes / trials
    z2 = z * z
    centre = p + z2 / (2 * trials)
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials))
    den = 1 + z2 / trials
    return (centre - half) / den, (centre + half) / den


@dataclass
class MCEstimate:
    n: int
    trials: int
    successes: int

    @property
    def estimate(self) -> float:
        return self.successes / self.trials

    def interval(self, z: float = 3.0) -> tuple[float, float]:
        return wilson_interval(self.successes, self.trials, z)

    def contains(self, value, z: float = 3.0) -> bool:
        lo, hi = self.interval(z)
        return lo <= float(value) <= hi


def return_counts_mc(mu: StepDistribution, n_max: int, trials: int, seed: int, *,
                     chain: int = 0, cache: TransitionCache | None = None) -> list[MCEstimate]:
    """Monte Carlo estimates of ``mu^(2n)(e)`` for ``n = 1..n_max``.

    Every trial is one walk of length ``2 n_max``; the event ``w_{2n} = e``
    is recorded for all ``n`` along the same walk.
    """
    if trials <= 0:
        raise ValueError("trials must be positive")
    if n_max <= 0:
        raise ValueError("n_max must be positive")
    cache = cache or TransitionCache(mu)
    incs = sample_increments(mu, trials * 2 * n_max, chain_rng(seed, chain))
    incs = incs.reshape(trials, 2 * n_max)
    counts = np.zeros(n_max + 1, dtype=np.int64)
    e = identity(mu.q)
    step = cache.step
    for row in incs.tolist():
        g = e
        for k, i in enumerate(row, 1):
            g = step(g, i)
            if k % 2 == 0 and g.shift == 0 and g.is_identity():
                counts[k // 2] += 1
    return [MCEstimate(n, trials, int(counts[n])) for n in range(1, n_max + 1)]


def return_probability_mc(mu: StepDistribution, n: int, trials: int, seed: int) -> MCEstimate:
    return return_counts_mc(mu, n, trials, seed)[-1]


# -- confinement lower bound ---------------------------------------------------

def confinement_probability(mu: StepDistribution, r: int, n: int) -> Fraction:
    """``P(max_{k <= n} |Phi(w_k^-1)| <= r)``, exactly, by dynamic programming on Z."""
    steps: dict[int, Fraction] = {}
    for g, p in mu.atoms:
        steps[-g.shift] = steps.get(-g.shift, Fraction(0)) + p
    dp = {0: Fraction(1)}
    for _ in range(n):
        new: dict[int, Fraction] = {}
        for x, p in dp.items():
            for s, ps in steps.items():
                y = x + s
                if -r <= y <= r:
                    new[y] = new.get(y, Fraction(0)) + p * ps
        dp = new
    return sum(dp.values(), Fraction(0))


def confinement_region_size(mu: StepDistribution, r: int) -> int:
    """Number of vertices that can carry a portrait entry while ``|Phi| <= r``.

    Consecutive orbit points are at most ``J = mu.jump`` apart, so while the
    orbit stays in the levels ``[-r, r]`` every geodesic between them stays
    below ``omega(r + J // 2)``.  Entries are written within ``R_s`` of the
    orbit, where ``R_s`` bounds the support of the atoms; when every atom is
    supported on ``{o, o.x^-1}`` the entries land on orbit points and no
    extra room is needed.
    """
    q = mu.q
    K = r + mu.jump // 2
    extra = 0
    for g, _ in mu.atoms:
        if not g.support <= {g.origin_preimage, ORIGIN}:
            extra = mu.radius
            break
    top = K + extra
    return sum(q ** (m + top) for m in range(-r - extra, r + extra + 1))


@dataclass
class ConfinementBound:
    r: int
    n: int
    confinement: Fraction  # P(max_{k<=n} |Phi| <= r)
    region_size: int
    bound: Fraction  # rigorous lower bound on mu^(2n)(e)
    heuristic: Fraction  # conf_{2n} / (2r (q!)^{|B(o,r)|})


def confinement_lower_bound(mu: StepDistribution, r: int, n: int) -> ConfinementBound:
    """Lower bound on ``mu^(2n)(e)`` from confinement of the walk.

    While ``|Phi| <= r`` for ``n`` steps, ``w_n`` lies in a set ``A`` of at
    most ``(2r+1) (q!)^{region}`` elements, so by Cauchy-Schwarz and
    symmetry ``mu^(2n)(e) >= sum_a mu^(n)(a)^2 >= conf_n^2 / |A|``.  The
    cruder ``conf_{2n} / (2r (q!)^{|B(o,r)|})`` is reported as a heuristic.
    """
    if not mu.is_symmetric:
        raise ValueError("the confinement bound needs a symmetric measure")
    if r < 0 or n < 0:
        raise ValueError("r and n must be non-negative")
    fact = math.factorial(mu.q)
    conf = confinement_probability(mu, r, n)
    region = confinement_region_size(mu, r)
    bound = conf * conf / ((2 * r + 1) * fact ** region)
    conf2 = confinement_probability(mu, r, 2 * n)
    heuristic = conf2 / (max(2 * r, 1) * fact ** ball_size(r, mu.q))
    return ConfinementBound(r, n, conf, region, bound, heuristic)
