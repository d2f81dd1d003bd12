"""F_q[t] for prime q: the digit ordering and its check as a simultaneous P-ordering."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from sympy import divisors, isprime
from sympy.functions.combinatorial.numbers import mobius

from .quadring import INF


@dataclass(frozen=True)
class FqPoly:
    q: int
    coeffs: tuple[int, ...]  # little-endian, no trailing zeros

    def __post_init__(self) -> None:
        c = [x % self.q for x in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def from_index(cls, q: int, n: int) -> FqPoly:
        """The polynomial whose coefficients are the base-q digits of n."""
        digits = []
        while n:
            n, r = divmod(n, q)
            digits.append(r)
        return cls(q, tuple(digits))

    @property
    def index(self) -> int:
        return sum(c * self.q**i for i, c in enumerate(self.coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def _same(self, other: FqPoly) -> None:
        if other.q != self.q:
            raise ValueError("polynomials over different fields")

    def __add__(self, other: FqPoly) -> FqPoly:
        self._same(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return FqPoly(self.q, tuple(x + y for x, y in zip(a, b)))

    def __neg__(self) -> FqPoly:
        return FqPoly(self.q, tuple(-x for x in self.coeffs))

    def __sub__(self, other: FqPoly) -> FqPoly:
        return self + (-other)

    def __mul__(self, other: FqPoly) -> FqPoly:
        self._same(other)
        if self.is_zero() or other.is_zero():
            return FqPoly(self.q, ())
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            if x:
                for j, y in enumerate(other.coeffs):
                    out[i + j] += x * y
        return FqPoly(self.q, tuple(out))

    def __pow__(self, k: int) -> FqPoly:
        out = FqPoly(self.q, (1,))
        for _ in range(k):
            out = out * self
        return out

    def __divmod__(self, other: FqPoly) -> tuple[FqPoly, FqPoly]:
        self._same(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        q = self.q
        rem = list(self.coeffs)
        inv = pow(other.coeffs[-1], -1, q)
        dq = other.degree
        quo = [0] * max(len(rem) - dq, 0)
        for i in range(len(rem) - 1, dq - 1, -1):
            c = rem[i] * inv % q
            if c:
                quo[i - dq] = c
                for j, y in enumerate(other.coeffs):
                    rem[i - dq + j] = (rem[i - dq + j] - c * y) % q
        return FqPoly(q, tuple(quo)), FqPoly(q, tuple(rem))

    def __mod__(self, other: FqPoly) -> FqPoly:
        return divmod(self, other)[1]

    def __str__(self) -> str:
        return format_poly(self)


def format_poly(f: FqPoly) -> str:
    if f.is_zero():
        return "0"
    terms = []
    for i in range(f.degree, -1, -1):
        c = f.coeffs[i]
        if not c:
            continue
        mono = "" if i == 0 else ("t" if i == 1 else f"t^{i}")
        if not mono:
            terms.append(str(c))
        else:
            terms.append(mono if c == 1 else f"{c}*{mono}")
    return "+".join(terms)


_TERM = re.compile(r"^(?:(\d+)\*?)?(t(?:\^(\d+))?)?$")


def parse_poly(q: int, text: str) -> FqPoly:
    """Parse "t^2+2*t+1"; coefficients are residues, terms joined by '+'."""
    _check_q(q)
    coeffs: dict[int, int] = {}
    body = text.replace(" ", "")
    if not body:
        raise ValueError("empty polynomial")
    for term in body.split("+"):
        m = _TERM.match(term)
        if not term or not m or (m.group(1) is None and m.group(2) is None):
            raise ValueError(f"malformed term {term!r} in {text!r}")
        c = int(m.group(1)) if m.group(1) is not None else 1
        e = 0 if m.group(2) is None else (int(m.group(3)) if m.group(3) else 1)
        coeffs[e] = coeffs.get(e, 0) + c
    top = max(coeffs)
    return FqPoly(q, tuple(coeffs.get(i, 0) for i in range(top + 1)))


def _check_q(q: int) -> None:
    if not isinstance(q, int) or not isprime(q):
        raise ValueError(f"q must be prime, got {q!r}")


@dataclass(frozen=True)
class FfPrime:
    poly: FqPoly

    @property
    def q(self) -> int:
        return self.poly.q

    @property
    def degree(self) -> int:
        return self.poly.degree

    @property
    def norm(self) -> int:
        return self.q**self.degree

    def __str__(self) -> str:
        return str(self.poly)


@lru_cache(maxsize=None)
def irreducibles(q: int, max_deg: int) -> tuple[FfPrime, ...]:
    """Monic irreducibles of degree 1..max_deg, by sieving out products."""
    _check_q(q)
    if max_deg < 1:
        raise ValueError("max_deg must be at least 1")
    found: list[FfPrime] = []
    for d in range(1, max_deg + 1):
        monic = range(q**d, 2 * q**d)
        composite: set[int] = set()
        for P in found:
            a = P.degree
            if 2 * a > d:
                continue
            for i in range(q ** (d - a), 2 * q ** (d - a)):
                composite.add((P.poly * FqPoly.from_index(q, i)).index)
        found.extend(FfPrime(FqPoly.from_index(q, i)) for i in monic if i not in composite)
    for d in range(1, max_deg + 1):
        if sum(1 for P in found if P.degree == d) != necklace_count(q, d):
            raise AssertionError(f"irreducible count mismatch in degree {d}")
    return tuple(found)


def necklace_count(q: int, n: int) -> int:
    return sum(int(mobius(e)) * q ** (n // e) for e in divisors(n)) // n


def ff_valuation(P: FfPrime, f: FqPoly) -> int | float:
    if f.is_zero():
        return INF
    v = 0
    while True:
        quo, rem = divmod(f, P.poly)
        if not rem.is_zero():
            return v
        f, v = quo, v + 1


def digit_ordering(q: int, n: int, enumeration: Sequence[int] | None = None) -> FqPoly:
    """s_n = sum a_{d_i} t^i where n = sum d_i q^i."""
    _check_q(q)
    if n < 0:
        raise ValueError("n must be non-negative")
    enum = list(range(q)) if enumeration is None else list(enumeration)
    if sorted(x % q for x in enum) != list(range(q)):
        raise ValueError("enumeration must be a permutation of F_q")
    if enum[0] % q != 0:
        # otherwise a_0 + a_j t = a_0 when a_j = 0, and the sequence repeats
        raise ValueError("enumeration must start with a_0 = 0")
    digits = FqPoly.from_index(q, n).coeffs
    return FqPoly(q, tuple(enum[d] for d in digits))


def ff_factorial(q: int, n: int) -> dict[FfPrime, int]:
    """w_P(n) = sum_i floor(n / q^(i deg P)) for every prime with q^deg P <= n."""
    _check_q(q)
    if n < 0:
        raise ValueError("n must be non-negative")
    if n < q:
        return {}
    top = 0
    while q ** (top + 1) <= n:
        top += 1
    out = {}
    for P in irreducibles(q, top):
        if P.norm <= n:
            e, qi = 0, P.norm
            while qi <= n:
                e += n // qi
                qi *= P.norm
            out[P] = e
    return out


def padic_digits(f: FqPoly, P: FfPrime) -> tuple[int, ...]:
    """Digits of f in base P, each digit a polynomial of degree < deg P (encoded by index)."""
    out = []
    while not f.is_zero():
        f, r = divmod(f, P.poly)
        out.append(r.index)
    return tuple(out)


def _common_prefix(a: tuple[int, ...], b: tuple[int, ...]) -> int:
    n = max(len(a), len(b))
    a, b = a + (0,) * (n - len(a)), b + (0,) * (n - len(b))
    for i in range(n):
        if a[i] != b[i]:
            return i
    raise ValueError("equal elements")


def _min_valuation(group: list[tuple[int, ...]], level: int, branching: int) -> int:
    """min over x of sum_{g in group} v_P(x - g), computed on the digit tree."""
    children: dict[int, list[tuple[int, ...]]] = {}
    for g in group:
        children.setdefault(g[level] if level < len(g) else 0, []).append(g)
    if len(children) < branching:
        return 0
    return min(len(c) + _min_valuation(c, level + 1, branching) for c in children.values())


@dataclass(frozen=True)
class SimultaneousResult:
    holds: bool
    prime: FfPrime | None = None
    n: int | None = None
    attained: int | None = None
    minimum: int | None = None

    def __bool__(self) -> bool:
        return self.holds

    def to_json(self) -> dict:
        out: dict = {"verdict": self.holds}
        if not self.holds:
            out["witness"] = {"prime": str(self.prime), "n": self.n, "attained": self.attained,
                              "minimum": self.minimum}
        return out


def verify_sequence(q: int, seq: Sequence[FqPoly], max_deg: int) -> SimultaneousResult:
    """Greedy minimality of ``seq`` at every monic irreducible of degree <= max_deg.

    v_P(prod_{i<n}(s_n - s_i)) must equal the minimum of the same quantity over
    all x in F_q[t].  The minimum is exact: v_P(x - y) is the length of the
    common prefix of the P-adic digit expansions, so it is attained on a
    finite residue tree.
    """
    if len(seq) < 1:
        raise ValueError("need a nonempty sequence")
    if len({s.coeffs for s in seq}) != len(seq):
        raise ValueError("sequence elements must be distinct")
    for P in irreducibles(q, max_deg):
        digits = [padic_digits(s, P) for s in seq]
        for n in range(1, len(seq)):
            attained = sum(_common_prefix(digits[n], digits[i]) for i in range(n))
            best = _min_valuation(digits[:n], 0, P.norm)
            if attained != best:
                return SimultaneousResult(False, P, n, attained, best)
    return SimultaneousResult(True)


def verify_simultaneous(q: int, length: int, max_deg: int,
                        enumeration: Sequence[int] | None = None) -> SimultaneousResult:
    if length < 1:
        raise ValueError("length must be at least 1")
    seq = [digit_ordering(q, n, enumeration) for n in range(length)]
    return verify_sequence(q, seq, max_deg)
