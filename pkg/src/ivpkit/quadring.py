"""Exact arithmetic in Z and in maximal quadratic orders O_K = Z[w].

Elements are written ``a + b*w`` where ``w = sqrt(d)`` for ``d = 2, 3 (mod 4)``
and ``w = (1 + sqrt(d))/2`` for ``d = 1 (mod 4)``.  The rational ring Z is the
ring with ``d = None``; its elements always have ``b = 0``.
"""

from __future__ import annotations

import math
import re
from collections.abc import Mapping
from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import product
from typing import Iterable, Iterator

from sympy import factorint, isprime, primerange
from sympy.ntheory.residue_ntheory import sqrt_mod
from sympy.functions.combinatorial.numbers import kronecker_symbol

from .linalg import hnf_rows

INF = math.inf


class RingMismatchError(ValueError):
    """Raised when elements or ideals of different rings are combined."""


def vp_int(n: int, p: int) -> int | float:
    """p-adic valuation of an integer; ``inf`` for zero."""
    if n == 0:
        return INF
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _is_squarefree(n: int) -> bool:
    return all(e == 1 for p, e in factorint(abs(n)).items() if p != -1)


@dataclass(frozen=True)
class QuadRing:
    d: int | None = None

    def __post_init__(self) -> None:
        if self.d is None:
            return
        if self.d in (0, 1) or not _is_squarefree(self.d):
            raise ValueError(f"d must be a squarefree integer other than 0, 1; got {self.d}")

    @classmethod
    def rational(cls) -> QuadRing:
        return cls(None)

    @property
    def is_rational(self) -> bool:
        return self.d is None

    @property
    def half_theta(self) -> bool:
        """True when w = (1 + sqrt(d))/2."""
        return self.d is not None and self.d % 4 == 1

    @property
    def discriminant(self) -> int:
        if self.d is None:
            return 1
        return self.d if self.half_theta else 4 * self.d

    @property
    def minpoly(self) -> tuple[int, int]:
        """Coefficients ``(c1, c0)`` of the minimal polynomial ``x^2 + c1 x + c0`` of w."""
        if self.d is None:
            raise ValueError("Z has no generator w")
        if self.half_theta:
            return (-1, -(self.d - 1) // 4)
        return (0, -self.d)

    @property
    def is_imaginary(self) -> bool:
        return self.d is not None and self.d < 0

    @cached_property
    def units(self) -> tuple[QElem, ...]:
        """The finite unit group for imaginary fields; ``(1, -1)`` otherwise."""
        one = self(1)
        if self.d not in (-1, -3):
            return (one, -one)
        w = self(0, 1)
        if self.d == -1:
            return (one, w, -one, -w)
        if self.d == -3:
            # w is a primitive 6th root of unity here
            us = [one]
            for _ in range(5):
                us.append(us[-1] * w)
            return tuple(us)
        return (one, -one)

    def __call__(self, a: int, b: int = 0) -> QElem:
        if self.d is None and b != 0:
            raise ValueError("elements of Z have no w-coordinate")
        return QElem(int(a), int(b), self)

    def __str__(self) -> str:
        return "Z" if self.d is None else f"d={self.d}"

    def gram(self) -> tuple[tuple[int, int], tuple[int, int], int]:
        """4x the Gram matrix of the basis (1, w) under the complex embedding (imaginary only).

        Returned as ``((g11, g12), (g12, g22), scale)`` with integer entries and
        ``scale = 4`` so that <x, y> = x^T G y / scale.
        """
        if not self.is_imaginary:
            raise ValueError("planar embedding is defined for imaginary quadratic rings only")
        if self.half_theta:
            # Re w = 1/2, |w|^2 = (1 - d)/4
            return ((4, 2), (2, 1 - self.d), 4)
        return ((4, 0), (0, -4 * self.d), 4)


def parse_ring(text: str) -> QuadRing:
    t = text.strip()
    if t in ("Z", "QQ", "Q", "rational"):
        return QuadRing.rational()
    m = re.fullmatch(r"(?:d\s*=\s*)?([+-]?\d+)", t)
    if not m:
        raise ValueError(f"unknown ring {text!r}")
    return QuadRing(int(m.group(1)))


@dataclass(frozen=True, slots=True)
class QElem:
    a: int
    b: int
    ring: QuadRing

    def _coerce(self, other: QElem | int) -> QElem:
        if isinstance(other, QElem):
            if other.ring != self.ring:
                raise RingMismatchError(f"cannot combine elements of {self.ring} and {other.ring}")
            return other
        if isinstance(other, int):
            return QElem(other, 0, self.ring)
        return NotImplemented

    def __add__(self, other: QElem | int) -> QElem:
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return QElem(self.a + o.a, self.b + o.b, self.ring)

    __radd__ = __add__

    def __sub__(self, other: QElem | int) -> QElem:
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return QElem(self.a - o.a, self.b - o.b, self.ring)

    def __rsub__(self, other: int) -> QElem:
        return (-self) + other

    def __neg__(self) -> QElem:
        return QElem(-self.a, -self.b, self.ring)

    def __mul__(self, other: QElem | int) -> QElem:
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        a, b, c, e = self.a, self.b, o.a, o.b
        d = self.ring.d
        if d is None:
            return QElem(a * c, 0, self.ring)
        if d % 4 == 1:
            m = (d - 1) // 4
            return QElem(a * c + b * e * m, a * e + b * c + b * e, self.ring)
        return QElem(a * c + b * e * d, a * e + b * c, self.ring)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> QElem:
        if k < 0:
            raise ValueError("negative powers are not ring elements")
        out, base = self.ring(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conjugate(self) -> QElem:
        if self.ring.d is None:
            return self
        if self.ring.half_theta:
            return QElem(self.a + self.b, -self.b, self.ring)
        return QElem(self.a, -self.b, self.ring)

    def norm(self) -> int:
        return norm(self.ring, self)

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def sort_key(self) -> tuple[int, int, int]:
        return (abs(self.norm()), self.a, self.b)

    def __str__(self) -> str:
        return format_element(self)

    def __repr__(self) -> str:
        return f"QElem({format_element(self)!r}, {self.ring})"


def norm(ring: QuadRing, x: QElem) -> int:
    """Absolute norm N_{K/Q}(x); for Z this is the integer itself."""
    a, b, d = x.a, x.b, ring.d
    if d is None:
        return a
    if d % 4 == 1:
        return a * a + a * b - ((d - 1) // 4) * b * b
    return a * a - d * b * b


def add(x: QElem, y: QElem) -> QElem:
    return x + y


def sub(x: QElem, y: QElem) -> QElem:
    return x - y


def mul(x: QElem, y: QElem) -> QElem:
    return x * y


def conjugate(x: QElem) -> QElem:
    return x.conjugate()


def format_element(x: QElem) -> str:
    a, b = x.a, x.b
    if b == 0:
        return str(a)
    wpart = "w" if abs(b) == 1 else f"{abs(b)}*w"
    if a == 0:
        return wpart if b > 0 else "-" + wpart
    return f"{a}{'+' if b > 0 else '-'}{wpart}"


_TERM = re.compile(r"[+-]?[^+-]+")


def parse_element(ring: QuadRing, text: str) -> QElem:
    s = text.replace(" ", "")
    if not s:
        raise ValueError("empty element")
    a = b = 0
    for term in _TERM.findall(s):
        sign = -1 if term.startswith("-") else 1
        body = term.lstrip("+-")
        if body.endswith("w"):
            coef = body[:-1].rstrip("*")
            if coef == "":
                k = 1
            elif coef.isdigit():
                k = int(coef)
            else:
                raise ValueError(f"malformed element {text!r}")
            b += sign * k
        elif body.isdigit():
            a += sign * int(body)
        else:
            raise ValueError(f"malformed element {text!r}")
    if "".join(_TERM.findall(s)) != s:
        raise ValueError(f"malformed element {text!r}")
    if ring.is_rational and b:
        raise ValueError(f"element {text!r} uses w but the ring is Z")
    return ring(a, b)


def parse_set(ring: QuadRing, text: str) -> list[QElem]:
    return [parse_element(ring, t) for t in text.split(",") if t.strip()]


# --------------------------------------------------------------------------
# prime ideals and valuations


@dataclass(frozen=True)
class PrimeIdeal:
    ring: QuadRing
    p: int
    kind: str  # "rational", "split", "inert" or "ramified"
    root: int | None = None

    @property
    def norm(self) -> int:
        return self.p * self.p if self.kind == "inert" else self.p

    @property
    def residue_degree(self) -> int:
        return 2 if self.kind == "inert" else 1

    @property
    def ramification(self) -> int:
        return 2 if self.kind == "ramified" else 1

    @property
    def conjugate_flag(self) -> int | None:
        """0/1 for the two primes above a split p (ordered by root), else None."""
        if self.kind != "split":
            return None
        c1, _ = self.ring.minpoly
        other = (-c1 - self.root) % self.p
        return int(self.root > other)

    @cached_property
    def hnf(self) -> IdealHNF:
        if self.kind in ("rational",):
            return IdealHNF(self.ring, self.p, 0, 1)
        if self.kind == "inert":
            return IdealHNF(self.ring, self.p, 0, self.p)
        return IdealHNF(self.ring, self.p, (-self.root) % self.p, 1)

    def sort_key(self) -> tuple[int, int, int]:
        return (self.norm, self.p, -1 if self.root is None else self.root)

    def __lt__(self, other: PrimeIdeal) -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        if self.kind in ("rational", "inert"):
            return f"({self.p})"
        return f"({self.p}, {format_element(self.ring(-self.root, 1))})"

    def to_json(self) -> dict:
        return {"p": self.p, "kind": self.kind, "root": self.root}


_EXHAUSTIVE_ROOT_LIMIT = 1000


def split_prime(ring: QuadRing, p: int) -> list[PrimeIdeal]:
    """Prime ideals above the rational prime ``p``, in root order."""
    if not isprime(p):
        raise ValueError(f"{p} is not prime")
    if ring.is_rational:
        return [PrimeIdeal(ring, p, "rational")]
    c1, c0 = ring.minpoly
    if p <= _EXHAUSTIVE_ROOT_LIMIT:
        roots = [r for r in range(p) if (r * r + c1 * r + c0) % p == 0]
    else:
        inv2 = pow(2, -1, p)
        sq = sqrt_mod(ring.discriminant % p, p, all_roots=True) or []
        roots = sorted({(-c1 + s) * inv2 % p for s in sq})
    chi = kronecker_symbol(ring.discriminant, p)
    if chi == 0:
        assert len(roots) == 1
        return [PrimeIdeal(ring, p, "ramified", roots[0])]
    if chi == 1:
        assert len(roots) == 2
        return [PrimeIdeal(ring, p, "split", r) for r in roots]
    assert not roots
    return [PrimeIdeal(ring, p, "inert")]


@lru_cache(maxsize=4096)
def _hensel_root(p: int, c1: int, c0: int, r: int, k: int) -> int:
    """Lift a simple root ``r`` of x^2 + c1 x + c0 mod p to a root mod p^k."""
    mod, root = p, r % p
    while mod < p**k:
        mod = min(mod * mod, p**k)
        f = root * root + c1 * root + c0
        fp = 2 * root + c1
        root = (root - f * pow(fp, -1, mod)) % mod
    return root


def valuation(P: PrimeIdeal, x: QElem) -> int | float:
    """Additive P-adic valuation; ``inf`` at zero."""
    if x.ring != P.ring:
        raise RingMismatchError("element and prime ideal belong to different rings")
    if x.a == 0 and x.b == 0:
        return INF
    p = P.p
    if P.kind == "rational":
        return vp_int(x.a, p)
    nv = vp_int(norm(x.ring, x), p)
    if P.kind == "inert":
        return nv // 2
    if P.kind == "ramified":
        return nv
    if nv == 0:
        return 0
    k = nv + 1
    c1, c0 = x.ring.minpoly
    rk = _hensel_root(p, c1, c0, P.root, k)
    return vp_int((x.a + x.b * rk) % p**k, p)


def prime_norms(ring: QuadRing, p: int) -> list[int]:
    """Norms of the prime ideals above p, read off the Kronecker symbol alone."""
    if ring.is_rational:
        return [p]
    chi = kronecker_symbol(ring.discriminant, p)
    return [p, p] if chi == 1 else ([p * p] if chi == -1 else [p])


def primes_up_to_norm(ring: QuadRing, bound: int) -> list[PrimeIdeal]:
    out = []
    for p in primerange(2, bound + 1):
        out.extend(P for P in split_prime(ring, int(p)) if P.norm <= bound)
    return sorted(out, key=PrimeIdeal.sort_key)


def rational_prime_support(n: int) -> list[int]:
    return sorted(int(p) for p in factorint(abs(n)) if p > 1) if n else []


def factor_element(x: QElem) -> dict[PrimeIdeal, int]:
    """Prime ideal factorization of the principal ideal (x), x != 0."""
    if x.is_zero():
        raise ValueError("zero has no factorization")
    return dict(_factor_element(x))


@lru_cache(maxsize=1 << 16)
def _factor_element(x: QElem) -> tuple[tuple[PrimeIdeal, int], ...]:
    out = []
    for p in rational_prime_support(norm(x.ring, x)):
        for P in split_prime(x.ring, p):
            v = valuation(P, x)
            if v:
                out.append((P, int(v)))
    return tuple(out)


# --------------------------------------------------------------------------
# ideals as HNF lattices


@dataclass(frozen=True)
class IdealHNF:
    """Ideal spanned by ``a`` and ``b + c*w``; for Z always ``b = 0, c = 1``."""

    ring: QuadRing
    a: int
    b: int
    c: int

    def __post_init__(self) -> None:
        if self.a <= 0 or self.c <= 0 or not 0 <= self.b < self.a:
            raise ValueError(f"not an HNF basis: {self.a, self.b, self.c}")
        if self.ring.is_rational:
            if self.b != 0 or self.c != 1:
                raise ValueError("ideals of Z are hnf(m,0,1)")
            return
        w = self.ring(0, 1)
        if not (self._contains(w * self.a) and self._contains(w * self.ring(self.b, self.c))):
            raise ValueError(f"hnf({self.a},{self.b},{self.c}) is not an ideal")

    @property
    def norm(self) -> int:
        return self.a * self.c

    def _contains(self, x: QElem) -> bool:
        if x.b % self.c:
            return False
        return (x.a - (x.b // self.c) * self.b) % self.a == 0

    def __contains__(self, x: QElem) -> bool:
        if x.ring != self.ring:
            raise RingMismatchError("element and ideal belong to different rings")
        return self._contains(x)

    def generators(self) -> tuple[QElem, ...]:
        if self.ring.is_rational:
            return (self.ring(self.a),)
        return (self.ring(self.a), self.ring(self.b, self.c))

    def __str__(self) -> str:
        return f"hnf({self.a},{self.b},{self.c})"


def parse_ideal(ring: QuadRing, text: str) -> IdealHNF:
    m = re.fullmatch(r"\s*hnf\(\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*\)\s*", text)
    if not m:
        raise ValueError(f"malformed ideal {text!r}")
    return IdealHNF(ring, *(int(g) for g in m.groups()))


def ideal_from_generators(ring: QuadRing, gens: Iterable[QElem]) -> IdealHNF:
    """The ideal generated by ``gens`` (as an O_K-module)."""
    vecs = []
    for g in gens:
        vecs.append([g.b, g.a])
        if not ring.is_rational:
            h = g * ring(0, 1)
            vecs.append([h.b, h.a])
    if ring.is_rational:
        rows = hnf_rows([[v[1]] for v in vecs])
        if not rows:
            raise ValueError("the zero ideal has no HNF")
        return IdealHNF(ring, rows[0][0], 0, 1)
    rows = hnf_rows(vecs)
    if len(rows) != 2:
        raise ValueError("generators do not span a full-rank ideal")
    (c, b), (_, a) = rows
    return IdealHNF(ring, a, b % a, c)


def ideal_mul(I: IdealHNF, J: IdealHNF) -> IdealHNF:
    if I.ring != J.ring:
        raise RingMismatchError("ideals belong to different rings")
    ring = I.ring
    if ring.is_rational:
        return IdealHNF(ring, I.a * J.a, 0, 1)
    gi = (ring(I.a), ring(I.b, I.c))
    gj = (ring(J.a), ring(J.b, J.c))
    return ideal_from_generators(ring, [x * y for x in gi for y in gj])


@lru_cache(maxsize=2048)
def ideal_power(I: IdealHNF, e: int) -> IdealHNF:
    if e < 0:
        raise ValueError("negative ideal power")
    if e == 0:
        return unit_ideal(I.ring)
    if e == 1:
        return I
    half = ideal_power(I, e // 2)
    sq = ideal_mul(half, half)
    return ideal_mul(sq, I) if e % 2 else sq


def prime_power(P: PrimeIdeal, e: int) -> IdealHNF:
    return ideal_power(P.hnf, e)


def unit_ideal(ring: QuadRing) -> IdealHNF:
    return IdealHNF(ring, 1, 0, 1)


def _prime_power_ideals(ring: QuadRing, p: int, k: int) -> list[IdealHNF]:
    primes = split_prime(ring, p)
    kind = primes[0].kind
    if kind == "inert":
        return [prime_power(primes[0], k // 2)] if k % 2 == 0 else []
    if kind == "split":
        P, Q = primes
        return [ideal_mul(prime_power(P, i), prime_power(Q, k - i)) for i in range(k, -1, -1)]
    return [prime_power(primes[0], k)]


def ideals_of_norm(ring: QuadRing, m: int) -> list[IdealHNF]:
    """All ideals of norm exactly ``m``, sorted by their HNF entries."""
    if m < 1:
        raise ValueError("ideal norms are positive")
    choices = [_prime_power_ideals(ring, int(p), e) for p, e in sorted(factorint(m).items())]
    out = []
    for combo in product(*choices):
        I = unit_ideal(ring)
        for J in combo:
            I = ideal_mul(I, J)
        out.append(I)
    return sorted(out, key=lambda I: (I.a, I.b, I.c))


def reduce_mod(x: QElem, I: IdealHNF) -> QElem:
    """Canonical representative of x + I inside the box 0 <= a' < I.a, 0 <= b' < I.c."""
    if x.ring != I.ring:
        raise RingMismatchError("element and ideal belong to different rings")
    q = x.b // I.c
    return QElem((x.a - q * I.b) % I.a, x.b - q * I.c, x.ring)


def residue_key(x: QElem, I: IdealHNF) -> tuple[int, int]:
    q = x.b // I.c
    return ((x.a - q * I.b) % I.a, x.b - q * I.c)


def residues_mod(I: IdealHNF) -> list[QElem]:
    return [I.ring(x, y) for y in range(I.c) for x in range(I.a)]


def iter_box(ring: QuadRing, radius: int) -> Iterator[QElem]:
    """Elements with coordinates in [-radius, radius], sorted by (|norm|, a, b)."""
    bs = [0] if ring.is_rational else range(-radius, radius + 1)
    elems = [ring(a, b) for a in range(-radius, radius + 1) for b in bs]
    return iter(sorted(elems, key=QElem.sort_key))


def embed(x: QElem) -> complex:
    """Fixed complex embedding (w -> root with positive imaginary part)."""
    d = x.ring.d
    if d is None:
        return complex(x.a)
    s = math.sqrt(abs(d))
    if d < 0:
        w = complex(0.5, s / 2) if x.ring.half_theta else complex(0, s)
    else:
        w = complex((1 + s) / 2 if x.ring.half_theta else s)
    return x.a + x.b * w


def iter_ball(ring: QuadRing, radius: float) -> list[QElem]:
    """Elements of absolute value at most ``radius`` under the fixed embedding.

    For real quadratic rings the coordinate box of that radius is used instead.
    """
    r = int(math.ceil(radius))
    if ring.is_rational:
        pts = [ring(a) for a in range(-r, r + 1)]
    elif ring.is_imaginary:
        span = r * 2 + 2
        pts = [ring(a, b) for a in range(-span, span + 1) for b in range(-span, span + 1)
               if abs(norm(ring, ring(a, b))) <= radius * radius]
    else:
        pts = [ring(a, b) for a in range(-r, r + 1) for b in range(-r, r + 1)]
    return sorted(pts, key=QElem.sort_key)


class IdealFactorization(Mapping):
    """A finite product of prime ideals with positive exponents."""

    def __init__(self, ring: QuadRing, exponents: Mapping[PrimeIdeal, int] | None = None):
        self.ring = ring
        self._exp: dict[PrimeIdeal, int] = {}
        for P, e in (exponents or {}).items():
            if P.ring != ring:
                raise RingMismatchError("prime ideal from a different ring")
            if e < 0:
                raise ValueError("negative exponent")
            if e:
                self._exp[P] = int(e)

    def __getitem__(self, P: PrimeIdeal) -> int:
        return self._exp[P]

    def __iter__(self) -> Iterator[PrimeIdeal]:
        return iter(sorted(self._exp, key=PrimeIdeal.sort_key))

    def __len__(self) -> int:
        return len(self._exp)

    def exponent(self, P: PrimeIdeal) -> int:
        return self._exp.get(P, 0)

    @property
    def norm(self) -> int:
        return math.prod(P.norm ** e for P, e in self._exp.items())

    @property
    def log_norm(self) -> float:
        return sum(e * math.log(P.norm) for P, e in self._exp.items())

    def __mul__(self, other: IdealFactorization) -> IdealFactorization:
        out = dict(self._exp)
        for P, e in other.items():
            out[P] = out.get(P, 0) + e
        return IdealFactorization(self.ring, out)

    def __pow__(self, k: int) -> IdealFactorization:
        return IdealFactorization(self.ring, {P: e * k for P, e in self._exp.items()})

    def divides(self, other: IdealFactorization) -> bool:
        return all(other.exponent(P) >= e for P, e in self._exp.items())

    def is_unit(self) -> bool:
        return not self._exp

    def to_json(self) -> list:
        if self.ring.is_rational:
            return [[P.p, e] for P, e in self.items()]
        return [{**P.to_json(), "exponent": e} for P, e in self.items()]

    def __repr__(self) -> str:
        body = " * ".join(f"{P}^{e}" for P, e in self.items()) or "(1)"
        return f"IdealFactorization({body})"
