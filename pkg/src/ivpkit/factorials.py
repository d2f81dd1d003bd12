"""p-orderings, generalized factorials and the growth of ring factorials."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
from sympy import primerange
from sympy.functions.combinatorial.numbers import kronecker_symbol

from .quadring import (
    IdealFactorization,
    PrimeIdeal,
    QElem,
    QuadRing,
    factor_element,
    prime_norms,
    primes_up_to_norm,
    valuation,
    vp_int,
)


@dataclass(frozen=True)
class POrderingResult:
    ordering: tuple[QElem, ...]
    valuations: tuple[int, ...]
    prime: PrimeIdeal


def as_elements(E: Iterable[QElem | int], ring: QuadRing | None = None) -> list[QElem]:
    """Coerce plain integers to elements of Z (or of ``ring``)."""
    ring = ring or QuadRing.rational()
    return [x if isinstance(x, QElem) else ring(x) for x in E]


def _check_distinct(E: Sequence[QElem]) -> None:
    if len(set(E)) != len(E):
        raise ValueError("elements must be pairwise distinct")
    rings = {x.ring for x in E}
    if len(rings) > 1:
        raise ValueError("elements come from different rings")


@lru_cache(maxsize=64)
def _valuation_table(p: int, span: int) -> np.ndarray:
    tab = np.array([vp_int(d, p) if d else 0 for d in range(-span, span + 1)], dtype=np.int64)
    tab.setflags(write=False)
    return tab


_INT_FAST_SPAN = 1 << 16


def _greedy_int(values: list[int], p: int, length: int) -> tuple[list[int], list[int]]:
    vals = np.asarray(values, dtype=np.int64)
    span = 1 << max(int(vals.max() - vals.min()), 1).bit_length()
    tab = _valuation_table(p, span)
    cum = np.zeros(len(values), dtype=np.int64)
    big = np.iinfo(np.int64).max // 4
    order, vs = [0], [0]
    cur = 0
    for _ in range(1, length):
        cum += tab[vals - vals[cur] + span]
        cum[cur] = big
        cur = int(np.argmin(cum))
        order.append(cur)
        vs.append(int(cum[cur]))
    return order, vs


def _greedy_generic(E: Sequence[QElem], P: PrimeIdeal, length: int) -> tuple[list[int], list[int]]:
    cache: dict[tuple[int, int], int] = {}

    def v(x: QElem, y: QElem) -> int:
        key = (x.a - y.a, x.b - y.b)
        if key not in cache:
            key2 = (-key[0], -key[1])
            cache[key] = cache[key2] = int(valuation(P, x - y))
        return cache[key]

    remaining = list(range(1, len(E)))
    cum = [0] * len(E)
    order, vs = [0], [0]
    cur = 0
    for _ in range(1, length):
        best = None
        for i in remaining:
            cum[i] += v(E[i], E[cur])
            if best is None or cum[i] < cum[best]:
                best = i
        remaining.remove(best)
        order.append(best)
        vs.append(cum[best])
        cur = best
    return order, vs


def p_ordering(E: Sequence[QElem | int], P: PrimeIdeal, length: int | None = None) -> POrderingResult:
    """Greedy P-ordering of a finite set.

    ``a_0`` is the first element of ``E``; each later term minimizes the
    P-adic valuation of the product of its differences with the earlier
    terms, ties going to the element that comes first in ``E``.
    """
    E = as_elements(E, P.ring)
    _check_distinct(E)
    length = len(E) if length is None else length
    if not 1 <= length <= len(E):
        raise ValueError(f"length must lie in [1, {len(E)}]")
    if E[0].ring != P.ring:
        raise ValueError("set and prime ideal belong to different rings")
    if P.kind == "rational" and max(abs(x.a) for x in E) < _INT_FAST_SPAN:
        order, vs = _greedy_int([x.a for x in E], P.p, length)
    else:
        order, vs = _greedy_generic(E, P, length)
    return POrderingResult(tuple(E[i] for i in order), tuple(vs), P)


def v_E(E: Sequence[QElem | int], P: PrimeIdeal, n: int) -> int:
    if not 0 <= n < len(E):
        raise ValueError("need 0 <= n < |E|")
    return p_ordering(E, P, n + 1).valuations[n]


def difference_support(E: Sequence[QElem]) -> list[PrimeIdeal]:
    """Prime ideals dividing at least one pairwise difference of E."""
    primes: set[PrimeIdeal] = set()
    seen: set[tuple[int, int]] = set()
    for x, y in combinations(E, 2):
        d = x - y
        key = (d.a, d.b) if (d.a, d.b) > (-d.a, -d.b) else (-d.a, -d.b)
        if key in seen:
            continue
        seen.add(key)
        primes.update(factor_element(d))
    return sorted(primes, key=PrimeIdeal.sort_key)


def generalized_factorial(E: Sequence[QElem | int], n: int) -> IdealFactorization:
    """Bhargava's factorial n!_E as a finite product of prime ideals."""
    E = as_elements(E)
    _check_distinct(E)
    if not 0 <= n < len(E):
        raise ValueError("need 0 <= n < |E|")
    ring = E[0].ring
    if n == 0:
        return IdealFactorization(ring)
    exps = {P: v_E(E, P, n) for P in difference_support(E)}
    return IdealFactorization(ring, exps)


def legendre_exponent(n: int, q: int) -> int:
    """sum_i floor(n / q^i), the exponent of a prime of norm q in n!."""
    total, qi = 0, q
    while qi <= n:
        total += n // qi
        qi *= q
    return total


def ring_factorial(ring: QuadRing, n: int) -> IdealFactorization:
    if n < 0:
        raise ValueError("n must be non-negative")
    exps = {P: legendre_exponent(n, P.norm) for P in primes_up_to_norm(ring, n)}
    return IdealFactorization(ring, exps)


def log_norm_factorial(ring: QuadRing, n: int) -> float:
    return ring_factorial(ring, n).log_norm


def log_norm_factorial_table(ring: QuadRing, n_max: int) -> np.ndarray:
    """``table[n] = log N(n!_K)`` for 0 <= n <= n_max.

    Uses log N(n!_K) - log N((n-1)!_K) = sum of log N(P) over prime-ideal
    powers P^i whose norm divides n.
    """
    inc = np.zeros(n_max + 1)
    for p in primerange(2, n_max + 1):
        for q in prime_norms(ring, int(p)):
            lq, qi = math.log(q), q
            while qi <= n_max:
                inc[qi::qi] += lq
                qi *= q
    return np.cumsum(inc)


# --------------------------------------------------------------------------
# Euler-Kronecker constants


@dataclass(frozen=True)
class EKEstimate:
    c_hat: float
    gamma_diff_hat: float
    n_max: int
    residual: float
    grid: tuple[int, ...] = ()


def geometric_grid(n_min: int, n_max: int, ratio: float = 1.3) -> list[int]:
    out, k = set(), 0
    while True:
        n = math.ceil(ratio**k)
        if n > n_max:
            break
        if n >= n_min:
            out.add(n)
        k += 1
    return sorted(out)


def estimate_euler_kronecker(ring: QuadRing, n_max: int, n_min: int = 10) -> EKEstimate:
    """Fit log N(n!_K) ~ n log n - c n by weighted least squares (weights ~ n)."""
    if n_max < 100:
        raise ValueError("n_max must be at least 100")
    table = log_norm_factorial_table(ring, n_max)
    ns = np.array(geometric_grid(n_min, n_max), dtype=float)
    r = ns * np.log(ns) - table[ns.astype(int)]
    w = ns
    c = float((w * ns * r).sum() / (w * ns * ns).sum())
    resid = float(np.sqrt((w * (r / ns - c) ** 2).sum() / w.sum()))
    return EKEstimate(c, c - 1.0, n_max, resid, tuple(int(n) for n in ns))


@dataclass(frozen=True)
class LSeriesValues:
    L: float
    dL: float
    error_bound: float
    terms: int


def _field_discriminant(d: int | QuadRing) -> int:
    ring = d if isinstance(d, QuadRing) else QuadRing(d)
    if not ring.is_imaginary:
        raise ValueError("an imaginary quadratic field is required")
    return ring.discriminant


def dirichlet_l_values(d: int | QuadRing, terms: int = 10**6) -> LSeriesValues:
    """L(1, chi) and L'(1, chi) for the Kronecker character of an imaginary quadratic field.

    Averages the partial sums over the final period of chi.  Abel summation
    bounds every tail past ``terms - |disc|`` by ``2 * max|sum chi| * f(M)``
    for the decreasing weights f(m) = 1/m and log(m)/m, so the same bound
    holds for the average.
    """
    disc = _field_discriminant(d)
    k = abs(disc)
    if terms < max(10 * k, 100):
        raise ValueError("too few terms for a meaningful remainder bound")
    period = np.array([kronecker_symbol(disc, m) for m in range(k)], dtype=float)
    m = np.arange(1, terms + 1, dtype=float)
    chi = period[np.arange(1, terms + 1) % k]
    # mean of the partial sums over the last full period cancels the periodic part of the tail
    L = float(np.mean(np.cumsum(chi / m)[-k:]))
    dL = float(-np.mean(np.cumsum(chi * np.log(m) / m)[-k:]))
    max_partial = float(np.max(np.abs(np.cumsum(period))))
    M = terms - k + 1
    bound = 2 * max_partial * max(1 / M, math.log(M) / M)
    return LSeriesValues(L, dL, bound, terms)


def ek_lseries_oracle(d: int | QuadRing, terms: int = 10**6) -> float:
    """gamma_K - gamma_Q = L'(1, chi) / L(1, chi) from direct character sums."""
    vals = dirichlet_l_values(d, terms)
    return vals.dL / vals.L
