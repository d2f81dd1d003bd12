"""Integer-valued polynomials, generalized factorials and n-optimal sets in quadratic rings."""

from .factorials import (
    estimate_euler_kronecker,
    ek_lseries_oracle,
    generalized_factorial,
    log_norm_factorial,
    p_ordering,
    ring_factorial,
    v_E,
)
from .optimality import (
    construct_universal_plus2,
    energy,
    is_aue,
    is_aue_all,
    is_n_optimal,
    is_n_universal,
    is_newton_sequence,
    lagrange_witness,
    search_n_optimal,
)
from .oracle import brute_force_universal, ivp_basis
from .quadring import PrimeIdeal, QElem, QuadRing, parse_element, parse_ring, split_prime, valuation

__version__ = "0.1.0"

__all__ = [
    "PrimeIdeal", "QElem", "QuadRing", "brute_force_universal", "construct_universal_plus2",
    "ek_lseries_oracle", "energy", "estimate_euler_kronecker", "generalized_factorial", "is_aue",
    "is_aue_all", "is_n_optimal", "is_n_universal", "is_newton_sequence", "ivp_basis",
    "lagrange_witness", "log_norm_factorial", "p_ordering", "parse_element", "parse_ring",
    "ring_factorial", "search_n_optimal", "split_prime", "v_E", "valuation",
]
