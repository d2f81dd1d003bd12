"""Brute-force integer-valued polynomial lattices, the ground truth for universality.

Int_n(S) is the set of polynomials of degree <= n over the fraction field
with integral values on S.  Writing each coefficient as x_j + y_j * w over Q,
integrality on S is a system A (x, y) in Z^m, so Int_n(S) is the dual of the
row lattice of A.  Nothing here uses p-orderings or factorials of sets.

S is n-universal iff Int_n(S) is contained in Int(D).  Two independent tests
decide that containment:

* evaluation on a reference set that is n-universal for elementary reasons:
  {0..n} in Z, and the triangle {a + b w : a, b >= 0, a + b <= n} in O_K
  (f(a + b w) is a polynomial of total degree <= n in (a, b), and the
  bivariate binomial basis shows the triangle controls integrality on Z^2);
* leading coefficients: the leading-coefficient module of degree k must sit
  inside (k!_K)^{-1}, the one of Int(D).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence

from .factorials import as_elements, legendre_exponent
from .linalg import dual_basis, rational_hnf_rows
from .polys import KPolynomial
from .quadring import QElem, QuadRing, rational_prime_support, split_prime, valuation


class OracleDisagreement(RuntimeError):
    pass


@dataclass(frozen=True)
class IVPLattice:
    n: int
    sample: tuple[QElem, ...]
    basis: tuple[KPolynomial, ...]
    rows: tuple[tuple[Fraction, ...], ...]

    @property
    def ring(self) -> QuadRing:
        return self.sample[0].ring


def _powers(x: QElem, n: int) -> list[QElem]:
    out = [x.ring(1)]
    for _ in range(n):
        out.append(out[-1] * x)
    return out


def _unknown_order(ring: QuadRing, n: int) -> list[tuple[int, int]]:
    """Unknowns (degree, coordinate), highest degree first."""
    coords = (0,) if ring.is_rational else (0, 1)
    return [(j, c) for j in range(n, -1, -1) for c in coords]


def ivp_basis(S: Sequence[QElem | int], n: int) -> IVPLattice:
    """Hermite-normalized basis of Int_n(S) as a Z-lattice of coefficient vectors."""
    S = as_elements(S)
    if len(set(S)) != len(S):
        raise ValueError("elements must be pairwise distinct")
    if n < 0 or len(S) < n + 1:
        raise ValueError("need n >= 0 and |S| >= n + 1")
    ring = S[0].ring
    order = _unknown_order(ring, n)
    w = ring(0, 1) if not ring.is_rational else None
    rows = []
    for s in S:
        pw = _powers(s, n)
        coord_rows = [[], []] if w is not None else [[]]
        for j, c in order:
            term = pw[j] if c == 0 else w * pw[j]
            coord_rows[0].append(term.a)
            if w is not None:
                coord_rows[1].append(term.b)
        rows.extend(coord_rows)
    dual = rational_hnf_rows(dual_basis(rows))
    polys = []
    for vec in dual:
        coeffs = [(Fraction(0), Fraction(0)) for _ in range(n + 1)]
        for (j, c), val in zip(order, vec):
            a, b = coeffs[j]
            coeffs[j] = (a + val, b) if c == 0 else (a, b + val)
        polys.append(KPolynomial.from_rational_coefficients(ring, coeffs))
    return IVPLattice(n, tuple(S), tuple(polys), tuple(tuple(v) for v in dual))


def reference_set(ring: QuadRing, n: int) -> list[QElem]:
    if ring.is_rational:
        return [ring(a) for a in range(n + 1)]
    return [ring(a, b) for b in range(n + 1) for a in range(n + 1 - b)]


def _leading_ok(lat: IVPLattice) -> tuple[bool, int | None]:
    """Every leading coefficient of degree k has v_P >= -w_P(k) at every P."""
    for f in lat.basis:
        k = f.degree
        c = f.numerator[k]
        den = f.denominator
        for p in rational_prime_support(den):
            for P in split_prime(lat.ring, p):
                v = valuation(P, c) - valuation(P, lat.ring(den))
                if v < -legendre_exponent(k, P.norm):
                    return False, k
    return True, None


@dataclass(frozen=True)
class OracleVerdict:
    verdict: bool
    n: int
    witness: KPolynomial | None = None
    point: QElem | None = None

    def __bool__(self) -> bool:
        return self.verdict


def brute_force_universal(S: Sequence[QElem | int], n: int) -> OracleVerdict:
    """Decide n-universality from Int_n(S) alone; both tests must agree."""
    lat = ivp_basis(S, n)
    ref = reference_set(lat.ring, n)
    witness = point = None
    for f in lat.basis:
        bad = next((x for x in ref if not f.is_integral_at(x)), None)
        if bad is not None:
            witness, point = f, bad
            break
    by_eval = witness is None
    by_leading, _ = _leading_ok(lat)
    if by_eval != by_leading:
        raise OracleDisagreement(f"evaluation says {by_eval}, leading coefficients say {by_leading}")
    return OracleVerdict(by_eval, n, witness, point)


def binomial_lattice_denominators(lat: IVPLattice) -> list[int]:
    """Denominators of the leading coefficients, one per basis polynomial (Z only)."""
    if not lat.ring.is_rational:
        raise ValueError("defined for Z only")
    out = []
    for f in lat.basis:
        lead = Fraction(f.numerator[f.degree].a, f.denominator)
        out.append(lead.denominator)
    return out


def common_denominator(lat: IVPLattice) -> int:
    return lcm(*(f.denominator for f in lat.basis))
