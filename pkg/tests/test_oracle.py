from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from ivpkit.optimality import is_n_universal
from ivpkit.oracle import (
    binomial_lattice_denominators,
    brute_force_universal,
    common_denominator,
    ivp_basis,
    reference_set,
)
from strategies import EISEN, GAUSS, SQRT_M2, SQRT_M5, SQRT_M7, Z, distinct_sets


def coefficient_matrix(polys, n):
    """Rows of rational coefficients, degree n down to 0 (Z only)."""
    rows = []
    for f in polys:
        cs = [Fraction(c.a, f.denominator) for c in f.numerator] + [Fraction(0)] * (n + 1)
        rows.append([cs[j] for j in range(n, -1, -1)])
    return sympy.Matrix(rows)


def binomial_matrix(n):
    X = sympy.Symbol("X")
    rows = []
    for k in range(n + 1):
        p = sympy.Poly(sympy.expand_func(sympy.binomial(X, k)), X)
        coeffs = [p.coeff_monomial(X**j) for j in range(n, -1, -1)]
        rows.append(coeffs)
    return sympy.Matrix(rows)


def same_lattice(A, B):
    T = A * B.inv()
    return all(x.is_integer for x in T) and all(x.is_integer for x in T.inv())


class TestBasis:
    @pytest.mark.parametrize("n", range(0, 7))
    def test_initial_segment_is_binomial_lattice(self, n):
        lat = ivp_basis(list(range(n + 1)), n)
        assert same_lattice(coefficient_matrix(lat.basis, n), binomial_matrix(n))

    def test_three_points(self):
        lat = ivp_basis([0, 1, 2], 2)
        assert same_lattice(coefficient_matrix(lat.basis, 2), binomial_matrix(2))
        assert sorted(binomial_lattice_denominators(lat)) == [1, 1, 2]
        assert common_denominator(lat) == 2

    def test_even_points(self):
        lat = ivp_basis([0, 2, 4], 1)
        # Int_1({0,2,4}) is spanned by 1 and X/2
        expected = sympy.Matrix([[Fraction(1, 2), 0], [0, 1]])
        assert same_lattice(coefficient_matrix(lat.basis, 1), expected)

    @pytest.mark.parametrize("ring", [Z, GAUSS, EISEN, SQRT_M5])
    @given(data=st.data())
    @settings(max_examples=30, deadline=None)
    def test_basis_integral_on_sample(self, ring, data):
        S = data.draw(distinct_sets(ring, 1, 6, 8))
        n = data.draw(st.integers(0, len(S) - 1))
        lat = ivp_basis(S, n)
        rank = (n + 1) * (1 if ring.is_rational else 2)
        assert len(lat.basis) == rank
        assert all(f.is_integral_at(x) for f in lat.basis for x in S)

    def test_errors(self):
        with pytest.raises(ValueError):
            ivp_basis([0, 1], 2)
        with pytest.raises(ValueError):
            ivp_basis([0, 0, 1], 1)
        with pytest.raises(ValueError):
            binomial_lattice_denominators(ivp_basis([GAUSS(0), GAUSS(1)], 1))


class TestReference:
    @pytest.mark.parametrize("ring", [Z, GAUSS, EISEN, SQRT_M2, SQRT_M7, SQRT_M5])
    @pytest.mark.parametrize("n", range(0, 4))
    def test_reference_is_universal(self, ring, n):
        ref = reference_set(ring, n)
        assert len(set(ref)) == len(ref)
        assert brute_force_universal(ref, n).verdict


class TestVerdicts:
    def test_examples(self):
        assert brute_force_universal([0, 2, 3], 1)
        v = brute_force_universal([0, 2, 4], 1)
        assert not v and not v.witness.is_integral_at(v.point)

    @given(S=distinct_sets(Z, 1, 7, 40), data=st.data())
    def test_integers_match_wide_evaluation(self, S, data):
        """Int_n(S) inside Int(Z) iff every basis element is integral on [-40, 40]."""
        n = data.draw(st.integers(0, len(S) - 1))
        lat = ivp_basis(S, n)
        wide = all(f.is_integral_at(Z(x)) for f in lat.basis for x in range(-40, 41))
        assert brute_force_universal(S, n).verdict == wide

    @pytest.mark.parametrize("ring", [Z, GAUSS, SQRT_M2, EISEN, SQRT_M7, SQRT_M5])
    @given(data=st.data())
    @settings(max_examples=40, deadline=None)
    def test_agrees_with_factorial_criterion(self, ring, data):
        S = data.draw(distinct_sets(ring, 1, 6, 6))
        n = data.draw(st.integers(0, len(S) - 1))
        assert brute_force_universal(S, n).verdict == is_n_universal(S, n).verdict

    @given(S=distinct_sets(GAUSS, 2, 5, 6), t=st.tuples(st.integers(-6, 6), st.integers(-6, 6)))
    @settings(max_examples=30, deadline=None)
    def test_translation(self, S, t):
        n = len(S) - 1
        moved = [x + GAUSS(*t) for x in S]
        assert brute_force_universal(S, n).verdict == brute_force_universal(moved, n).verdict

