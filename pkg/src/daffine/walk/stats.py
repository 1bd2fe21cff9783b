from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .engine import NodePool, Trajectory, chain_rng, phi_steps, sample_increments, sample_path
from .measures import StepDistribution


def tau_ell(traj: Trajectory, ell: int, sign: int | None = None) -> int | None:
    """First ``n`` with ``Phi(w_n) >= ell`` (sign +1) or ``Phi(w_n) <= -ell`` (sign -1).

    The default sign follows ``E_mu Phi``, with +1 for zero drift.  Returns
    ``None`` when the level is not reached within the trajectory.
    """
    if ell <= 0:
        raise ValueError("ell must be positive")
    if sign is None:
        sign = -1 if traj.mu.mean_phi < 0 else 1
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    phi = -traj.phi_hat
    hits = np.flatnonzero(phi * sign >= ell)
    return int(hits[0]) if hits.size else None


# -- drift and speed ---------------------------------------------------------

@dataclass
class ChainSummary:
    chain: int
    slope: float  # Phi(w_n^-1) / n
    speed: float | None = None  # |w_n|_{S_1} / n
    late_dca_level: int | None = None
    late_dca_join: int | None = None


@dataclass
class DriftReport:
    label: str
    n_steps: int
    seed: int
    exact_drift: object  # Fraction, E_{mu-check} Phi
    chains: list = field(default_factory=list)

    @property
    def slopes(self) -> np.ndarray:
        return np.array([c.slope for c in self.chains])

    @property
    def mean_slope(self) -> float:
        return float(self.slopes.mean())

    def standard_error(self, variance) -> float:
        return math.sqrt(float(variance) / (self.n_steps * len(self.chains)))

    def within(self, variance, k: float = 4.0) -> bool:
        """Mean slope within ``k`` standard errors of the exact drift.

        ``variance`` is the per-step variance of Phi (exact, from the measure).
        """
        return abs(self.mean_slope - float(self.exact_drift)) <= k * self.standard_error(variance)

    @property
    def mean_speed(self) -> float | None:
        vals = [c.speed for c in self.chains if c.speed is not None]
        return float(np.mean(vals)) if vals else None


def late_dca(traj: Trajectory, frac: float = 0.1):
    """Deepest common ancestor of the orbit points ``o.w_k^-1`` with ``k >= (1-frac) n``."""
    n = traj.n_steps
    pool = traj.pool
    start = min(n, int(math.floor((1 - frac) * n)))
    c = traj.orbit[start]
    for a in traj.orbit[start + 1:]:
        c = pool.dca(c, a)
    return c


def _run_chain(args) -> ChainSummary:
    mu, n_steps, seed, chain, speed = args
    if not speed:
        incs = sample_increments(mu, n_steps, chain_rng(seed, chain))
        total = int(phi_steps(mu)[incs].sum())
        return ChainSummary(chain, total / n_steps)
    traj = sample_path(mu, n_steps, seed, chain=chain, checkpoint_every=None)
    c = late_dca(traj)
    return ChainSummary(chain, int(traj.phi_hat[-1]) / n_steps,
                        traj.state.word_length() / n_steps, c.level, c.join)


def drift_stats(mu: StepDistribution, n_steps: int, n_chains: int, seed: int, *,
                speed: bool = False, jobs: int = 1) -> DriftReport:
    if n_steps <= 0 or n_chains <= 0:
        raise ValueError("n_steps and n_chains must be positive")
    tasks = [(mu, n_steps, seed, c, speed) for c in range(n_chains)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            chains = list(ex.map(_run_chain, tasks))
    else:
        chains = [_run_chain(t) for t in tasks]
    return DriftReport(mu.label, n_steps, seed, mu.drift, chains)


# -- stabilization -----------------------------------------------------------

def stabilize_window(traj: Trajectory, rho: int):
    """Final portrait values on ``B(o, rho)`` with last-modification times.

    Reuses the window recorded during sampling when it has the right radius;
    otherwise the (deterministic) trajectory is replayed with a watch on the
    ball.
    """
    if traj.window is not None and traj.window.radius == rho:
        return traj.window
    return sample_path(traj.mu, traj.n_steps, traj.seed, chain=traj.chain, window=rho,
                       checkpoint_every=None, keep_orbit=False).window


@dataclass
class StabilizationRow:
    seed: int
    max_short: int
    max_long: int
    frozen: int = 0  # window vertices farther than 2R from the final orbit point
    window_size: int = 0

    @property
    def ok(self) -> bool:
        return self.max_long == self.max_short or self.max_long < 10 * self.max_short


def stabilization_check(mu: StepDistribution, seeds, rho: int = 3,
                        short: int = 10_000, long: int = 100_000) -> list[StabilizationRow]:
    """Maximum last-modification time in the window at two horizons, per seed.

    Both horizons come from one trajectory of length ``long``; by prefix
    stability this equals running the short horizon separately.
    """
    rows = []
    for s in seeds:
        tr = sample_path(mu, long, s, window=rho, checkpoint_every=None, keep_orbit=False)
        win = tr.window
        rows.append(StabilizationRow(s, win.max_last_modified(short), win.max_last_modified(),
                                     len(win.frozen), len(tr.state.watch)))
    return rows


# -- geodesic tracking -------------------------------------------------------

@dataclass
class TrackingReport:
    drift_sign: int
    ratio_max: float
    argmax: int
    distances: np.ndarray
    target_level: int  # level where the late orbit leaves the estimated geodesic


def _distances_to_segment(pool: NodePool, orbit, c) -> np.ndarray:
    # ancestors of c: its off-ray chain plus every ray vertex omega(m) with m >= c.join
    anc = set()
    a = c
    while a.ray < 0:
        anc.add(a)
        a = a.up
    dc = NodePool.origin_distance(c)
    out = np.empty(len(orbit), dtype=np.int64)
    for i, x in enumerate(orbit):
        a = x
        while a.ray < 0 and a not in anc:
            a = a.up
        if a.ray >= 0 and a.ray < c.join:
            a = pool.ray_node(c.join)
        dxc = x.level + c.level - 2 * a.level
        out[i] = (NodePool.origin_distance(x) + dxc - dc) // 2
    return out


def geodesic_tracking_stats(traj: Trajectory, frac: float = 0.1) -> TrackingReport:
    """``max_k d(o.w_k^-1, xi) / log k`` with ``xi`` estimated from the trajectory.

    For drift < 0 ``xi`` is the ray towards omega.  For drift > 0 it is the
    geodesic from ``o`` to the final orbit point.  That geodesic passes
    through the deepest common ancestor of the last ``frac`` of the orbit
    (reported as ``target_level``) and is a finite stand-in for the limiting
    ray.
    """
    drift = traj.mu.drift
    if drift == 0:
        raise ValueError("geodesic tracking needs a measure with non-zero drift")
    orbit = traj.orbit
    if orbit is None:
        raise ValueError("trajectory was sampled without its orbit")
    if drift < 0:
        d = np.array([x.level + x.join for x in orbit], dtype=np.int64)
        target = -max(x.join for x in orbit)
    else:
        d = _distances_to_segment(traj.pool, orbit, orbit[-1])
        target = late_dca(traj, frac).level
    if len(d) <= 2:
        return TrackingReport(1 if drift > 0 else -1, 0.0, 0, d, target)
    ks = np.arange(2, len(d))
    ratios = d[2:] / np.log(ks)
    i = int(np.argmax(ratios))
    return TrackingReport(1 if drift > 0 else -1, float(ratios[i]), int(ks[i]), d, target)


# -- support profile ---------------------------------------------------------

@dataclass
class SupportProfile:
    levels: list
    depths: list  # max depth of support inside T_omega(l) minus T_omega(l-1), 0 if none
    thresholds: list  # C log l + margin
    exceed_log: int
    exceed_linear: int
    max_join: int
    support_size: int


def support_profile(traj: Trajectory, levels, C: float = 2.0, margin: int = 1) -> SupportProfile:
    """Depth of the portrait support of ``w_n`` below each ray vertex ``omega(l)``.

    A support vertex joining the ray at ``omega(l)`` has depth
    ``beta(v) + l``.  Exceedances count levels whose depth is above
    ``C log l + margin`` and above ``l``.
    """
    by_join: dict[int, int] = {}
    for a in traj.state.portrait:
        depth = a.level + a.join
        if depth > by_join.get(a.join, -1):
            by_join[a.join] = depth
    levels = list(levels)
    depths = [by_join.get(ell, 0) for ell in levels]
    thresholds = [C * math.log(ell) + margin if ell >= 1 else float(margin) for ell in levels]
    return SupportProfile(
        levels, depths, thresholds,
        sum(d > t for d, t in zip(depths, thresholds)),
        sum(d > ell for d, ell in zip(depths, levels)),
        max(by_join, default=0), len(traj.state.portrait))
