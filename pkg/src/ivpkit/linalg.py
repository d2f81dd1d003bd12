"""Exact integer/rational linear algebra used by ideal arithmetic and the oracle."""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Sequence


def hnf_rows(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Row-style Hermite normal form of the integer row lattice spanned by ``rows``.

    The result is a basis in echelon form: pivots are positive, strictly move
    right, and every entry above a pivot is reduced into ``[0, pivot)``.
    Zero rows are dropped, so the length of the result is the lattice rank.
    """
    pending = [list(r) for r in rows if any(r)]
    if not pending:
        return []
    ncols = len(pending[0])
    basis: list[list[int]] = []
    pivots: list[int] = []
    col = 0
    while pending and col < ncols:
        active = [r for r in pending if r[col] != 0]
        rest = [r for r in pending if r[col] == 0]
        if not active:
            col += 1
            continue
        while len(active) > 1:
            active.sort(key=lambda r: abs(r[col]))
            piv = active[0]
            survivors = [piv]
            for r in active[1:]:
                q = r[col] // piv[col]
                red = [x - q * y for x, y in zip(r, piv)]
                if red[col] != 0:
                    survivors.append(red)
                elif any(red):
                    rest.append(red)
            active = survivors
        piv = active[0]
        if piv[col] < 0:
            piv = [-x for x in piv]
        basis.append(piv)
        pivots.append(col)
        pending = rest
        col += 1
    for i in range(len(basis)):
        c = pivots[i]
        for j in range(i):
            q = basis[j][c] // basis[i][c]
            if q:
                basis[j] = [x - q * y for x, y in zip(basis[j], basis[i])]
    return basis


def rational_inverse(matrix: Sequence[Sequence[Fraction | int]]) -> list[list[Fraction]]:
    n = len(matrix)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(matrix)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def rational_hnf_rows(rows: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    """HNF of a full-rank rational row lattice, normalized through a common denominator."""
    den = lcm(*(Fraction(x).denominator for r in rows for x in r)) if rows else 1
    scaled = [[int(Fraction(x) * den) for x in r] for r in rows]
    return [[Fraction(x, den) for x in r] for r in hnf_rows(scaled)]


def dual_basis(rows: Sequence[Sequence[int]]) -> list[list[Fraction]]:
    """Basis of ``{c : <r, c> in Z for all rows r}`` for a full-column-rank integer matrix.

    The row lattice is first brought to a square HNF basis ``B``; the dual lattice
    is then spanned by the columns of ``B^{-1}``.
    """
    basis = hnf_rows(rows)
    ncols = len(rows[0])
    if len(basis) != ncols:
        raise ValueError("row lattice is not of full rank")
    inv = rational_inverse(basis)
    return [[inv[i][j] for i in range(ncols)] for j in range(ncols)]
