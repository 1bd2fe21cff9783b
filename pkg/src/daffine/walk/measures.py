from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path

from ..group import Element, identity, inverse, parse, s0_elements
from ..metric import s1_letters
from ..tree import ORIGIN, distance


@dataclass(frozen=True)
class StepDistribution:
    """A finitely supported probability measure on DA(T) with exact weights.

    ``user_asserted`` marks measures whose non-degeneracy (support generating
    the group as a semigroup) was claimed by the caller rather than
    guaranteed by a builder.
    """

    q: int
    atoms: tuple
    label: str = "custom"
    user_asserted: bool = False
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        merged: dict[Element, Fraction] = {}
        for g, p in self.atoms:
            p = Fraction(p)
            if p <= 0:
                raise ValueError("atom probabilities must be positive")
            if g.q != self.q:
                raise ValueError("atom with mismatched q")
            merged[g] = merged.get(g, Fraction(0)) + p
        total = sum(merged.values(), Fraction(0))
        if total != 1:
            raise ValueError(f"probabilities sum to {total}, not 1")
        object.__setattr__(self, "atoms", tuple(merged.items()))

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def elements(self) -> list[Element]:
        return [g for g, _ in self.atoms]

    @property
    def probabilities(self) -> list[Fraction]:
        return [p for _, p in self.atoms]

    def __getitem__(self, g: Element) -> Fraction:
        return dict(self.atoms).get(g, Fraction(0))

    @cached_property
    def radius(self) -> int:
        """Smallest R with |Phi(g)| <= R and supp(g) inside the R-ball for all atoms."""
        R = 0
        for g, _ in self.atoms:
            R = max(R, abs(g.shift), *(distance(ORIGIN, v) for v in g.support))
        return R

    @cached_property
    def jump(self) -> int:
        """Largest displacement ``d(o, o.g^-1)`` of the inverted orbit in one step."""
        return max(distance(ORIGIN, g.origin_preimage) for g, _ in self.atoms)

    @cached_property
    def mean_phi(self) -> Fraction:
        return sum((p * g.shift for g, p in self.atoms), Fraction(0))

    @property
    def drift(self) -> Fraction:
        """E_{mu-check} Phi, the drift of the inverted orbit along horocycles."""
        return -self.mean_phi

    @cached_property
    def phi_variance(self) -> Fraction:
        m = self.mean_phi
        return sum((p * (g.shift - m) ** 2 for g, p in self.atoms), Fraction(0))

    @cached_property
    def is_symmetric(self) -> bool:
        d = dict(self.atoms)
        return all(d.get(inverse(g)) == p for g, p in self.atoms)

    def reflected(self) -> StepDistribution:
        return StepDistribution(self.q, tuple((inverse(g), p) for g, p in self.atoms),
                                f"check({self.label})", self.user_asserted)

    def lazify(self) -> StepDistribution:
        half = Fraction(1, 2)
        atoms = [(g, p * half) for g, p in self.atoms] + [(identity(self.q), half)]
        return StepDistribution(self.q, tuple(atoms), f"lazy({self.label})", self.user_asserted)


def uniform(elements, q: int, label: str) -> StepDistribution:
    els = list(dict.fromkeys(elements))
    p = Fraction(1, len(els))
    return StepDistribution(q, tuple((g, p) for g in els), label)


def uniform_s1(q: int) -> StepDistribution:
    return uniform(s1_letters(q), q, "uniform-s1")


def uniform_s0(q: int) -> StepDistribution:
    return uniform(s0_elements(q), q, "uniform-s0")


def biased_s1(q: int, p_up) -> StepDistribution:
    """S_1 letters with total weight ``p_up`` on the alpha^{+1} letters.

    ``E_mu Phi = 2 p_up - 1``.
    """
    p_up = Fraction(p_up)
    if not 0 < p_up < 1:
        raise ValueError("bias must lie strictly between 0 and 1")
    letters = s1_letters(q)
    up = [g for g, w in letters.items() if w.step == 1]
    down = [g for g, w in letters.items() if w.step == -1]
    atoms = [(g, p_up / len(up)) for g in up] + [(g, (1 - p_up) / len(down)) for g in down]
    return StepDistribution(q, tuple(atoms), f"biased:{p_up}")


def from_weights(pairs, q: int, label: str = "custom") -> StepDistribution:
    return StepDistribution(q, tuple((g, Fraction(w)) for g, w in pairs), label,
                            user_asserted=True)


def load_mu_file(path, q: int) -> StepDistribution:
    """Lines ``<weight> <element>``; weights are exact (``1/3``, ``0.25``)."""
    pairs = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        w, _, text = line.partition(" ")
        pairs.append((parse(text.strip(), q), Fraction(w)))
    if not pairs:
        raise ValueError(f"no atoms in {path}")
    return from_weights(pairs, q, f"file:{path}")


def parse_mu(spec: str, q: int) -> StepDistribution:
    """``uniform-s0 | uniform-s1 | biased:P | file:PATH``, optionally prefixed ``lazy:``."""
    if spec.startswith("lazy:"):
        return parse_mu(spec[5:], q).lazify()
    if spec == "uniform-s0":
        return uniform_s0(q)
    if spec == "uniform-s1":
        return uniform_s1(q)
    if spec.startswith("biased:"):
        return biased_s1(q, Fraction(spec[7:]))
    if spec.startswith("file:"):
        return load_mu_file(spec[5:], q)
    raise ValueError(f"unknown measure {spec!r}")
