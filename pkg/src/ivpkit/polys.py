"""Polynomials over the fraction field K, stored as (O_K[X] numerator) / (positive integer)."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Sequence

from .quadring import QElem, QuadRing


def poly_mul(f: Sequence[QElem], g: Sequence[QElem]) -> list[QElem]:
    ring = f[0].ring
    out = [ring(0)] * (len(f) + len(g) - 1)
    for i, x in enumerate(f):
        for j, y in enumerate(g):
            out[i + j] = out[i + j] + x * y
    return out


def poly_from_roots(ring: QuadRing, roots: Sequence[QElem]) -> list[QElem]:
    """Coefficients (low to high) of prod (X - r)."""
    out = [ring(1)]
    for r in roots:
        out = poly_mul(out, [-r, ring(1)])
    return out


def horner(coeffs: Sequence[QElem], x: QElem) -> QElem:
    acc = x.ring(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


@dataclass(frozen=True)
class KPolynomial:
    numerator: tuple[QElem, ...]
    denominator: int

    def __post_init__(self) -> None:
        if self.denominator <= 0:
            raise ValueError("denominator must be positive")

    @property
    def ring(self) -> QuadRing:
        return self.numerator[0].ring

    @property
    def degree(self) -> int:
        nz = [i for i, c in enumerate(self.numerator) if not c.is_zero()]
        return nz[-1] if nz else -1

    def reduced(self) -> KPolynomial:
        g = self.denominator
        for c in self.numerator:
            g = gcd(g, c.a, c.b)
        return KPolynomial(tuple(self.ring(c.a // g, c.b // g) for c in self.numerator), self.denominator // g)

    def __call__(self, x: QElem) -> tuple[Fraction, Fraction]:
        v = horner(self.numerator, x)
        return Fraction(v.a, self.denominator), Fraction(v.b, self.denominator)

    def is_integral_at(self, x: QElem) -> bool:
        v = horner(self.numerator, x)
        return v.a % self.denominator == 0 and v.b % self.denominator == 0

    def coefficients(self) -> list[tuple[Fraction, Fraction]]:
        return [(Fraction(c.a, self.denominator), Fraction(c.b, self.denominator)) for c in self.numerator]

    def to_json(self) -> list[list[str]]:
        return [[str(a), str(b)] for a, b in self.coefficients()]

    @classmethod
    def from_rational_coefficients(cls, ring: QuadRing, coeffs: Sequence[tuple[Fraction, Fraction]]) -> KPolynomial:
        den = 1
        for a, b in coeffs:
            den = den * Fraction(a).denominator // gcd(den, Fraction(a).denominator)
            den = den * Fraction(b).denominator // gcd(den, Fraction(b).denominator)
        num = tuple(ring(int(Fraction(a) * den), int(Fraction(b) * den)) for a, b in coeffs)
        return cls(num, den).reduced()

    def __str__(self) -> str:
        terms = []
        for i, c in enumerate(self.numerator):
            if c.is_zero():
                continue
            mono = "" if i == 0 else ("X" if i == 1 else f"X^{i}")
            terms.append(f"({c})" + ("*" + mono if mono else ""))
        body = " + ".join(terms) or "0"
        return body if self.denominator == 1 else f"[{body}] / {self.denominator}"
