"""Shared hypothesis strategies."""

from hypothesis import strategies as st

from ivpkit.quadring import QuadRing

Z = QuadRing.rational()
GAUSS = QuadRing(-1)
SQRT_M2 = QuadRing(-2)
EISEN = QuadRing(-3)
SQRT_M5 = QuadRing(-5)
SQRT_M7 = QuadRing(-7)
SQRT_2 = QuadRing(2)
SQRT_3 = QuadRing(3)
SQRT_5 = QuadRing(5)

QUADRATIC = [GAUSS, SQRT_M2, EISEN, SQRT_M5, SQRT_M7, SQRT_2, SQRT_3, SQRT_5]
ALL_RINGS = [Z, *QUADRATIC]
IMAGINARY = [GAUSS, SQRT_M2, EISEN, SQRT_M7]


def elements(ring, bound=30):
    if ring.is_rational:
        return st.integers(-bound, bound).map(ring)
    return st.tuples(st.integers(-bound, bound), st.integers(-bound, bound)).map(lambda t: ring(*t))


def nonzero(ring, bound=30):
    return elements(ring, bound).filter(lambda x: not x.is_zero())


def distinct_sets(ring, min_size, max_size, bound):
    return st.lists(elements(ring, bound), min_size=min_size, max_size=max_size, unique=True)
