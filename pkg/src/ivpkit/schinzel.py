"""Schinzel sequences: the first N(I) terms form a complete residue system mod every ideal I."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

from .factorials import as_elements
from .quadring import IdealHNF, QElem, QuadRing, format_element, ideals_of_norm, iter_ball, norm, residue_key


@dataclass(frozen=True)
class PrefixCheck:
    holds: bool
    ideal: IdealHNF | None = None
    length: int | None = None

    def __bool__(self) -> bool:
        return self.holds

    def to_json(self) -> dict:
        out: dict = {"verdict": self.holds}
        if not self.holds:
            out["witness"] = {"ideal": str(self.ideal), "norm": self.length}
        return out


def is_schinzel_prefix(ring: QuadRing, seq: Sequence[QElem | int]) -> PrefixCheck:
    """For each ideal I with N(I) <= len(seq), the first N(I) terms are distinct mod I."""
    seq = as_elements(seq, ring)
    for m in range(1, len(seq) + 1):
        for I in ideals_of_norm(ring, m):
            if len({residue_key(x, I) for x in seq[:m]}) != m:
                return PrefixCheck(False, I, m)
    return PrefixCheck(True)


@dataclass(frozen=True)
class SchinzelPrefix:
    ring: QuadRing
    sequence: tuple[QElem, ...]
    exhausted_window: bool
    nodes: int
    window_radius: float | None
    max_len: int
    wall_time: float = 0.0

    @property
    def verified_length(self) -> int:
        return len(self.sequence)

    def to_json(self) -> dict:
        return {"ring": str(self.ring), "max_verified_length": self.verified_length,
                "prefix": [format_element(x) for x in self.sequence],
                "exhausted_window": self.exhausted_window, "nodes": self.nodes,
                "window": "norm<=j" if self.window_radius is None else {"radius": self.window_radius},
                "max_len": self.max_len}


def _extend_to(ring: QuadRing, target: int, window: list[QElem], deadline: float,
               counter: list[int], norm_bound: bool) -> list[QElem] | None:
    """First prefix of length ``target`` (a_0 = 0, terms from ``window``), or None.

    Raises TimeoutError past ``deadline``.
    """
    ideals = [I for m in range(2, target + 1) for I in ideals_of_norm(ring, m)]
    norms = [I.norm for I in ideals]
    keys = {x: [residue_key(x, I) for I in ideals] for x in [ring(0), *window]}
    used = [set() for _ in ideals]
    prefix: list[QElem] = []

    def place(x: QElem, add: bool) -> None:
        # called before append and after pop, so len(prefix) is x's position
        pos = len(prefix)
        for idx, m in enumerate(norms):
            if m > pos:
                (used[idx].add if add else used[idx].discard)(keys[x][idx])

    def dfs() -> bool:
        if len(prefix) == target:
            return True
        pos = len(prefix)
        live = [idx for idx, m in enumerate(norms) if m > pos]
        taken = set(prefix)
        for x in window:
            if norm_bound and abs(norm(ring, x)) > pos:
                break
            if time.monotonic() > deadline:
                raise TimeoutError
            kx = keys[x]
            if x in taken or any(kx[idx] in used[idx] for idx in live):
                continue
            counter[0] += 1
            place(x, True)
            prefix.append(x)
            if dfs():
                return True
            prefix.pop()
            place(x, False)
        return False

    zero = ring(0)
    place(zero, True)
    prefix.append(zero)
    return list(prefix) if dfs() else None


def search_schinzel(ring: QuadRing, max_len: int, budget: float = 120.0,
                    radius: float | None = None) -> SchinzelPrefix:
    """Longest Schinzel prefix with a_0 = 0 and all terms in a norm ball.

    Iterative deepening on the target length L: a depth-first search in
    (|norm|, a, b) order places a_m away from the classes already used modulo
    every ideal of norm in [m + 1, L].  ``exhausted_window`` certifies that no
    prefix one longer than the reported one exists inside the window (or that
    max_len was reached).

    Without ``radius`` the window for a_j is {x : |N(x)| <= j}.  Every prefix
    of an infinite Schinzel sequence with a_0 = 0 lies there (a_j is congruent
    to a_0 mod (a_j), so j >= N(a_j)), which makes the certificate say that no
    such prefix extends.  With ``radius`` the window is a fixed ball.
    """
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    start = time.monotonic()
    norm_bound = radius is None
    ball = (float(max_len) if ring.is_rational else max_len**0.5) if norm_bound else radius
    window = [x for x in iter_ball(ring, ball) if not x.is_zero()]
    counter = [1]
    best = [ring(0)]
    exhausted = True
    for target in range(2, max_len + 1):
        try:
            found = _extend_to(ring, target, window, start + budget, counter, norm_bound)
        except TimeoutError:
            exhausted = False
            break
        if found is None:
            break
        best = found
    result = SchinzelPrefix(ring, tuple(best), exhausted, counter[0], radius, max_len,
                            time.monotonic() - start)
    if not is_schinzel_prefix(ring, result.sequence):
        raise AssertionError("search returned a prefix that fails re-verification")
    return result


@dataclass(frozen=True)
class NormGrowth:
    holds: bool
    violations: list[dict] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.holds

    def to_json(self) -> dict:
        return {"verdict": self.holds, "violations": self.violations}


def norm_growth_check(ring: QuadRing, seq: Sequence[QElem | int]) -> NormGrowth:
    """N(a_j) <= j for 1 <= j < len(seq), with a_0 = 0.

    A violation with N(a_j) <= len(seq) would contradict completeness modulo
    (a_j) and is flagged ``forced``; larger norms are not excluded by a finite
    prefix and are reported as lying beyond the verified length.
    """
    seq = as_elements(seq, ring)
    if not seq or not seq[0].is_zero():
        raise ValueError("the sequence must start with a_0 = 0")
    out = []
    for j, x in enumerate(seq[1:], start=1):
        nx = abs(norm(ring, x))
        if nx > j:
            out.append({"j": j, "element": format_element(x), "norm": nx, "forced": nx <= len(seq)})
    return NormGrowth(not out, out)
