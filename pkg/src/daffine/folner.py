"""Følner sets ``U_r`` and their exact boundary ratios.

``U_r = { gamma * alpha**-i : 0 <= i <= r, supp(gamma) in L_r }`` where
``L_r`` is the set of descendants of ``o`` on the horocycles ``H_0..H_r``.
The shift runs over ``-r..0`` so that right multiplication by a root
switch ``delta_o`` moves the support to ``o.alpha**i``, a vertex of
``L_r``; the only exits are through ``alpha**+-1`` at the two ends of the
shift range.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .group import Element, all_perms, identity_perm, inverse, multiply
from .metric import ResourceLimitError
from .tree import ORIGIN, Vertex, check_q, children

DEFAULT_CAP = 2_000_000


def descendant_levels(r: int, q: int) -> list[Vertex]:
    """Descendants of ``o`` with Busemann level in ``0..r``, level by level."""
    out = [ORIGIN]
    layer = [ORIGIN]
    for _ in range(r):
        layer = [c for v in layer for c in children(v, q)]
        out.extend(layer)
    return out


def _below_origin(v: Vertex, r: int) -> bool:
    return 0 <= v.busemann <= r and (not v.digits or v.start >= 1)


class FolnerSet:
    def __init__(self, r: int, q: int, *, cap: int = DEFAULT_CAP):
        check_q(q)
        if r < 0:
            raise ValueError("r must be non-negative")
        self.r = r
        self.q = q
        self.sites = descendant_levels(r, q)
        if len(self) > cap:
            raise ResourceLimitError(f"|U_{r}| = {len(self)} exceeds the cap {cap}")

    @property
    def site_count(self) -> int:
        q, r = self.q, self.r
        return (q ** (r + 1) - 1) // (q - 1)

    def __len__(self) -> int:
        return (self.r + 1) * math.factorial(self.q) ** self.site_count

    def __contains__(self, g: Element) -> bool:
        if g.q != self.q or not -self.r <= g.shift <= 0:
            return False
        return all(_below_origin(v, self.r) for v in g.portrait)

    def __iter__(self):
        q = self.q
        ident = identity_perm(q)
        perms = all_perms(q)
        for i in range(self.r + 1):
            for choice in itertools.product(perms, repeat=len(self.sites)):
                port = {v: p for v, p in zip(self.sites, choice) if p != ident}
                yield Element._raw(q, -i, port)


def folner_set(r: int, q: int, *, cap: int = DEFAULT_CAP) -> FolnerSet:
    return FolnerSet(r, q, cap=cap)


def boundary_ratio(U, mu) -> Fraction:
    """``(1/|U|) sum_{x in U, y} mu(y) 1[xy not in U]``, iterating ``U``."""
    total = Fraction(0)
    count = 0
    for x in U:
        count += 1
        for y, p in mu.atoms:
            if multiply(x, y) not in U:
                total += p
    return total / count


def boundary_ratio_from_boundary(U, mu) -> Fraction:
    """The same quantity summed over the outer boundary ``{z not in U : z y^-1 in U}``."""
    boundary = set()
    for x in U:
        for y, _ in mu.atoms:
            z = multiply(x, y)
            if z not in U:
                boundary.add(z)
    back = [(inverse(y), p) for y, p in mu.atoms]
    total = Fraction(0)
    for z in boundary:
        for yi, p in back:
            if multiply(z, yi) in U:
                total += p
    return total / len(U)


@dataclass
class ProfileRow:
    r: int
    size: int
    ratio: Fraction
    inv_loglog: float  # 1 / log log |U_r|

    @property
    def scaled(self) -> float:
        """``ratio * log log |U_r|``, bounded when the profile is ``1/log log``."""
        return float(self.ratio) / self.inv_loglog


def profile_table(r_max: int, mu, *, r_min: int = 1, cap: int = DEFAULT_CAP,
                  check: bool = False) -> list[ProfileRow]:
    rows = []
    for r in range(r_min, r_max + 1):
        U = folner_set(r, mu.q, cap=cap)
        ratio = boundary_ratio(U, mu)
        if check and ratio != boundary_ratio_from_boundary(U, mu):
            raise AssertionError(f"boundary ratio routes disagree at r={r}")
        size = len(U)
        rows.append(ProfileRow(r, size, ratio, 1 / math.log(math.log(size))))
    return rows


def format_fraction(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def profile_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r", "size", "ratio", "ratio_decimal", "inv_loglog_size", "ratio_times_loglog"])
    for row in rows:
        w.writerow([row.r, row.size, format_fraction(row.ratio), f"{float(row.ratio):.12g}",
                    f"{row.inv_loglog:.12g}", f"{row.scaled:.12g}"])
    return buf.getvalue()
