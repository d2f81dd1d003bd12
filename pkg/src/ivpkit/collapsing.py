"""Discrete collapsing of finite subsets of imaginary quadratic rings toward a line.

A direction is a primitive lattice vector ``delta``; the lines m are the
lattice lines parallel to ``delta`` and the line l is perpendicular to them.
Along m the lattice points sit at positions u0 + Z, where
u(x) = <x, delta> / <delta, delta> for the trace form, and l is the set
{u = offset}.  Everything is exact rational arithmetic.

Half-planes are closed, so a lattice point on l lies in both H1 and H2.  In
condition (1) "between m & l and x" is taken half-open, [m & l, x), so a
lattice point on l belongs to every nonempty collapsed run on its line.

Offsets are half-integers.  When the reflection in l maps every line m onto
its own lattice points (``reflection_symmetric``), collapsing never increases
|N(E(S))| in all tests, and equality only occurs when the collapsed set is a
translate of S or of its mirror image.  The families k1, k2 for d = 1 mod 4,
d < -3, place the lines m at four or more phases and admit no such l; there
collapsing can increase the energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from .quadring import QElem, QuadRing, embed, norm


def supported_directions(ring: QuadRing) -> dict[str, QElem]:
    """Direction vectors delta of the lines m, keyed by name.

    "horizontal" and "vertical" name the orientation of l itself; k0, k1, k2
    are the three families of the hexagonal case.
    """
    if not ring.is_imaginary:
        raise ValueError("collapsing needs an imaginary quadratic ring")
    w = ring(0, 1)
    if ring.half_theta:
        return {"k0": ring(1), "k1": w, "k2": w - 1}
    return {"vertical": ring(1), "horizontal": w}


@dataclass(frozen=True)
class PlanarEmbedding:
    ring: QuadRing

    def point(self, x: QElem) -> tuple[float, float]:
        z = embed(x)
        return z.real, z.imag

    def inner(self, x: QElem, y: QElem) -> Fraction:
        """Real part of x * conj(y) under the embedding, exactly."""
        (g00, g01), (_, g11), scale = self.ring.gram()
        val = g00 * x.a * y.a + g01 * (x.a * y.b + x.b * y.a) + g11 * x.b * y.b
        return Fraction(val, scale)

    def quadratic_form(self, x: QElem) -> Fraction:
        return self.inner(x, x)


@dataclass(frozen=True)
class CollapseSpec:
    ring: QuadRing
    direction: str
    offset: Fraction = Fraction(1, 2)
    h1: int = 1  # +1: H1 is the side u >= offset

    def __post_init__(self) -> None:
        if self.direction not in supported_directions(self.ring):
            raise ValueError(f"unsupported direction {self.direction!r} for {self.ring}")
        if self.h1 not in (1, -1):
            raise ValueError("h1 must be +1 or -1")
        object.__setattr__(self, "offset", Fraction(self.offset))
        if (2 * self.offset).denominator != 1:
            raise ValueError("offset must be a multiple of 1/2")

    @property
    def delta(self) -> QElem:
        return supported_directions(self.ring)[self.direction]

    def position(self, x: QElem) -> Fraction:
        emb = PlanarEmbedding(self.ring)
        d = self.delta
        return emb.inner(x, d) / emb.inner(d, d)

    def line_id(self, x: QElem) -> QElem:
        """The point of x's line m with position in [0, 1)."""
        return x - self.delta * math.floor(self.position(x))

    def phases(self) -> set[Fraction]:
        """Positions mod 1 of the lattice points: the subgroup of Q/Z generated by u(1), u(w)."""
        p1, pw = self.position(self.ring(1)), self.position(self.ring(0, 1))
        den = math.lcm(p1.denominator, pw.denominator)
        step = math.gcd(int(p1 * den), int(pw * den), den)
        return {Fraction(k * step, den) for k in range(den // step)}

    @property
    def reflection_symmetric(self) -> bool:
        """The reflection in l maps each line m onto its own lattice points."""
        return all((2 * self.offset - 2 * ph).denominator == 1 for ph in self.phases())

    def reflect(self, x: QElem) -> QElem:
        t = 2 * (self.offset - self.position(x))
        if t.denominator != 1:
            raise ValueError(f"{x} has no lattice mirror image in l")
        return x + self.delta * int(t)

    def side(self, x: QElem) -> int:
        """+1 strictly inside H1, -1 strictly inside H2, 0 on l."""
        r = self.position(x) - self.offset
        return 0 if r == 0 else (self.h1 if r > 0 else -self.h1)


def _group_by_line(S: Iterable[QElem], spec: CollapseSpec) -> dict[QElem, list[QElem]]:
    lines: dict[QElem, list[QElem]] = {}
    for x in S:
        lines.setdefault(spec.line_id(x), []).append(x)
    return lines


def packing_order(base: QElem, spec: CollapseSpec, count: int) -> list[QElem]:
    """The first ``count`` lattice points of line ``base`` in collapsing order.

    The point on l (if any) comes first, then points alternate H1, H2, H1, ...
    each side moving outward from l.
    """
    d, c = spec.delta, spec.offset
    u0 = spec.position(base)
    t0 = math.ceil(c - u0)  # first index with position >= c
    on_line = u0 + t0 == c
    up = [base + d * (t0 + 1 + i) if on_line else base + d * (t0 + i) for i in range(count)]
    down = [base + d * (t0 - 1 - i) for i in range(count)]
    h1_side, h2_side = (up, down) if spec.h1 == 1 else (down, up)
    out = [base + d * t0] if on_line else []
    i = 0
    while len(out) < count:
        out.append(h1_side[i])
        if len(out) < count:
            out.append(h2_side[i])
        i += 1
    return out[:count]


def _check_spec(S: Sequence[QElem], spec: CollapseSpec) -> None:
    if any(x.ring != spec.ring for x in S):
        raise ValueError("set and collapse spec belong to different rings")


def collapse(S: Iterable[QElem], spec: CollapseSpec) -> list[QElem]:
    S = list(S)
    _check_spec(S, spec)
    out = []
    for base, pts in sorted(_group_by_line(S, spec).items(), key=lambda kv: kv[0].sort_key()):
        out.extend(packing_order(base, spec, len(pts)))
    return sorted(out, key=QElem.sort_key)


def is_collapsed(S: Iterable[QElem], spec: CollapseSpec) -> bool:
    """Both conditions of the definition, checked directly."""
    S = set(S)
    _check_spec(list(S), spec)
    d, c = spec.delta, spec.offset
    for pts in _group_by_line(S, spec).values():
        for x in pts:
            t = spec.position(x) - c
            # walk from x toward l, checking every lattice point of [m & l, x)
            step = -1 if t > 0 else 1
            y, ty = x + d * step, t + step
            while (ty >= 0) if t > 0 else (ty <= 0):
                if y not in S:
                    return False
                y, ty = y + d * step, ty + step
        h1 = sum(1 for x in pts if spec.side(x) >= 0)
        h2 = sum(1 for x in pts if spec.side(x) <= 0)
        if h1 - h2 not in (0, 1):
            return False
    return True


def energy_norm(S: Sequence[QElem]) -> int:
    """|N(E(S))| as an exact integer."""
    out = 1
    for x, y in combinations(S, 2):
        out *= norm(x.ring, x - y) ** 2
    return abs(out)


def _translate_of(S: set[QElem], T: set[QElem]) -> bool:
    if len(S) != len(T) or not S:
        return len(S) == len(T)
    s0 = min(S, key=QElem.sort_key)
    return any({x + (t - s0) for x in S} == T for t in T)


def congruent_after_collapse(S: Sequence[QElem], spec: CollapseSpec) -> bool:
    """collapse(S) is a translate of S or of its mirror image in l."""
    S, T = set(S), set(collapse(S, spec))
    if _translate_of(S, T):
        return True
    if not spec.reflection_symmetric:
        return False
    return _translate_of({spec.reflect(x) for x in S}, T)


@dataclass(frozen=True)
class EnergyDelta:
    before: int
    after: int
    collapsed_before: bool
    congruent: bool = False

    @property
    def relation(self) -> str:
        return "<" if self.after < self.before else ("=" if self.after == self.before else ">")

    def to_json(self) -> dict:
        return {"before": str(self.before), "after": str(self.after), "relation": self.relation,
                "collapsed_before": self.collapsed_before, "congruent": self.congruent}


def energy_delta(S: Sequence[QElem], spec: CollapseSpec) -> EnergyDelta:
    S = list(S)
    if len(S) < 2:
        raise ValueError("need at least two points")
    return EnergyDelta(energy_norm(S), energy_norm(collapse(S, spec)), is_collapsed(S, spec),
                       congruent_after_collapse(S, spec))


def plot_rows(S: Sequence[QElem], label: str) -> list[tuple[float, float, str]]:
    emb = PlanarEmbedding(S[0].ring) if S else None
    return [(*emb.point(x), label) for x in S] if emb else []
