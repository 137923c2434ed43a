"""Exact rational lattice arithmetic.

Lattices are given by a square basis matrix with Fraction entries (columns
are the basis vectors).  Everything in this module is exact: no floats are
consulted for any decision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

Rat = Fraction
Vec = tuple[Fraction, ...]


class LatticeError(Exception):
    """Base class for errors raised by this package."""


class SingularBasisError(LatticeError):
    """The proposed basis matrix is not invertible."""


class DimensionMismatchError(LatticeError):
    """Vector length does not match the lattice dimension."""


class DimensionCapError(LatticeError):
    """The requested operation exceeds the enumeration dimension cap."""


class IterationLimitError(LatticeError):
    """A rejection-sampling loop exceeded its iteration cap."""


def rat(x) -> Fraction:
    """Coerce ints, strings like '3/4', floats-free exact input to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


def vec(xs: Iterable) -> Vec:
    return tuple(rat(x) for x in xs)


def vec_add(a: Vec, b: Vec) -> Vec:
    return tuple(x + y for x, y in zip(a, b, strict=True))


def vec_sub(a: Vec, b: Vec) -> Vec:
    return tuple(x - y for x, y in zip(a, b, strict=True))


def vec_scale(a: Vec, c: Fraction) -> Vec:
    return tuple(c * x for x in a)


def vec_dot(a: Vec, b: Vec) -> Fraction:
    return sum((x * y for x, y in zip(a, b, strict=True)), Fraction(0))


def norm_sq(a: Vec) -> Fraction:
    return sum((x * x for x in a), Fraction(0))


def zero_vec(n: int) -> Vec:
    return (Fraction(0),) * n


def _entry_bits(x: Fraction) -> int:
    if x == 0:
        return 0
    bits = abs(x.numerator).bit_length()
    if x.denominator != 1:
        bits += x.denominator.bit_length()
    return bits


def _invert(matrix: list[list[Fraction]]) -> list[list[Fraction]]:
    """Invert a square Fraction matrix by Gauss-Jordan elimination."""
    n = len(matrix)
    aug = [row[:] + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise SingularBasisError("basis matrix is singular")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv_p = 1 / aug[col][col]
        aug[col] = [v * inv_p for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [v - factor * w for v, w in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


class Basis:
    """A lattice basis: n linearly independent columns in Q^n."""

    def __init__(self, columns: Sequence[Iterable]):
        cols = tuple(vec(c) for c in columns)
        n = len(cols)
        if n == 0 or any(len(c) != n for c in cols):
            raise DimensionMismatchError("basis must be square and non-empty")
        self.columns: tuple[Vec, ...] = cols
        self.n = n
        # Row-major matrix: matrix[i][j] = i-th coordinate of column j.
        self.matrix: tuple[Vec, ...] = tuple(
            tuple(cols[j][i] for j in range(n)) for i in range(n)
        )
        self.det = self._det()
        if self.det == 0:
            raise SingularBasisError("basis columns are linearly dependent")

    def _det(self) -> Fraction:
        # Fraction-free-ish Gaussian elimination on a copy.
        m = [list(row) for row in self.matrix]
        n = self.n
        det = Fraction(1)
        for col in range(n):
            pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
            if pivot is None:
                return Fraction(0)
            if pivot != col:
                m[col], m[pivot] = m[pivot], m[col]
                det = -det
            det *= m[col][col]
            inv_p = 1 / m[col][col]
            for r in range(col + 1, n):
                if m[r][col] != 0:
                    factor = m[r][col] * inv_p
                    m[r] = [v - factor * w for v, w in zip(m[r], m[col])]
        return det

    @cached_property
    def inverse_rows(self) -> tuple[Vec, ...]:
        inv = _invert([list(row) for row in self.matrix])
        return tuple(tuple(row) for row in inv)

    @cached_property
    def bit_length(self) -> int:
        """Max over columns of the total bit length of the column's entries."""
        return max(sum(_entry_bits(x) for x in col) for col in self.columns)

    def multiply(self, a: Sequence) -> Vec:
        """B @ a for an exact coefficient vector a."""
        av = vec(a)
        if len(av) != self.n:
            raise DimensionMismatchError("coefficient vector has wrong length")
        return tuple(vec_dot(row, av) for row in self.matrix)

    def coords(self, x: Sequence) -> Vec:
        """Exact coordinates B^{-1} x."""
        xv = vec(x)
        if len(xv) != self.n:
            raise DimensionMismatchError("vector has wrong length")
        return tuple(vec_dot(row, xv) for row in self.inverse_rows)

    def __eq__(self, other) -> bool:
        return isinstance(other, Basis) and self.columns == other.columns

    def __hash__(self) -> int:
        return hash(self.columns)

    def __repr__(self) -> str:
        return f"Basis({[list(map(str, c)) for c in self.columns]})"


def coords(basis: Basis, x: Sequence) -> Vec:
    """Coordinates of x in the given basis, exactly."""
    return basis.coords(x)


def is_lattice_member(basis: Basis, x: Sequence) -> bool:
    """Whether x lies in the lattice generated by the basis."""
    return all(c.denominator == 1 for c in basis.coords(x))


def is_primitive(basis: Basis, x: Sequence) -> bool:
    """Whether x is a lattice member not of the form k*y, |k| >= 2, y in L."""
    cs = basis.coords(x)
    if any(c.denominator != 1 for c in cs):
        return False
    ints = [int(c) for c in cs]
    if all(v == 0 for v in ints):
        return False
    return math.gcd(*ints) == 1 if len(ints) > 1 else abs(ints[0]) == 1


@dataclass(frozen=True)
class ShiftedLattice:
    """The coset L - t: a lattice basis together with a rational shift t."""

    basis: Basis
    shift: Vec

    def __post_init__(self):
        object.__setattr__(self, "shift", vec(self.shift))
        if len(self.shift) != self.basis.n:
            raise DimensionMismatchError("shift has wrong length")

    @property
    def n(self) -> int:
        return self.basis.n

    def member(self, y: Sequence) -> bool:
        """Whether y lies in L - t."""
        return is_lattice_member(self.basis, vec_add(vec(y), self.shift))


def lattice(columns: Sequence[Iterable], shift: Iterable | None = None) -> ShiftedLattice:
    """Convenience constructor for a (possibly shifted) lattice."""
    b = Basis(columns)
    return ShiftedLattice(b, vec(shift) if shift is not None else zero_vec(b.n))


def identity_basis(n: int) -> Basis:
    return Basis([[Fraction(int(i == j)) for i in range(n)] for j in range(n)])


@dataclass(frozen=True)
class BitLengthBounds:
    """Provable two-sided bounds on lambda_1 and the covering radius."""

    lambda1_lo: Fraction
    lambda1_hi: Fraction
    mu_lo: Fraction
    mu_hi: Fraction


def bit_length_bounds(basis: Basis) -> BitLengthBounds:
    """Bounds 2^{-nm} <= lambda_1 <= 2^m and 2^{-nm-1} <= mu <= n 2^m,
    with m the basis bit length."""
    n, m = basis.n, basis.bit_length
    return BitLengthBounds(
        lambda1_lo=Fraction(1, 2 ** (n * m)),
        lambda1_hi=Fraction(2**m),
        mu_lo=Fraction(1, 2 ** (n * m + 1)),
        mu_hi=Fraction(n * 2**m),
    )


def denominator_lcm(lat: ShiftedLattice) -> int:
    """Smallest q with q*L ⊆ Z^n and q*t ∈ Z^n."""
    q = 1
    for col in lat.basis.columns:
        for x in col:
            q = q * x.denominator // math.gcd(q, x.denominator)
    for x in lat.shift:
        q = q * x.denominator // math.gcd(q, x.denominator)
    return q


def lex_less(a: Vec, b: Vec) -> bool:
    """Deterministic tie-break order on vectors (coordinate lexicographic)."""
    return a < b


def format_rat(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def format_vec(v: Vec) -> str:
    return ",".join(format_rat(x) for x in v)


def parse_vec(s: str) -> Vec:
    return vec(part.strip() for part in s.split(","))
