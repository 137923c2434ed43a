"""Lattice sparsification: random index-p sublattices L' = {x in L :
<z, B^{-1}x> = 0 mod p}, plus the shifted variant with a uniform coset shift.

The sublattice basis is built through the dual: replace one dual basis
vector carrying a unit of z by (1/p) * sum_i z_i b*_i and invert-transpose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import Basis, Vec, vec

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid for all 64-bit integers."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def prime_in_interval(lo, hi) -> int:
    """Smallest prime p with lo <= p <= hi."""
    p = max(2, math.ceil(lo))
    while p <= hi:
        if is_prime(p):
            return p
        p += 1
    raise ValueError(f"no prime in [{lo}, {hi}]")


def sparsify_basis(basis: Basis, p: int, z: tuple[int, ...]) -> Basis:
    """Basis of L' = {x in L : <z, B^{-1}x> = 0 mod p}.

    If z = 0 mod p the sublattice is L itself and the input basis is returned
    unchanged; otherwise det(L') = +-p * det(L).
    """
    if not is_prime(p):
        raise ValueError(f"p must be prime, got {p}")
    n = basis.n
    if len(z) != n:
        raise ValueError("z has wrong length")
    z = tuple(zi % p for zi in z)
    pivot = None
    for j in range(n - 1, -1, -1):
        if z[j] != 0:
            pivot = j
            break
    if pivot is None:
        return basis
    # Scaling z by a unit mod p leaves L' unchanged; normalize so the pivot
    # entry is 1, which makes the replaced dual vector generate the full
    # dual of L' together with the remaining dual vectors.
    inv_pivot = pow(z[pivot], -1, p)
    z = tuple(zi * inv_pivot % p for zi in z)
    # Dual basis columns are the rows of B^{-1}.
    dual_cols = [list(row) for row in basis.inverse_rows]
    replacement = [
        sum(Fraction(z[i]) * dual_cols[i][k] for i in range(n)) / p
        for k in range(n)
    ]
    dual_cols[pivot] = replacement
    # B' = (dual')^{-T}: columns of B' are the rows of (dual')^{-1}.
    dual_basis = Basis([dual_cols[j] for j in range(n)])
    return Basis(list(dual_basis.inverse_rows))


@dataclass(frozen=True)
class SparsifierDraw:
    """One sparsification trial: the prime, the congruence vector z, the
    coset shift c (None for the unshifted variant), the sublattice basis,
    and w = B c."""

    p: int
    z: tuple[int, ...]
    c: tuple[int, ...] | None
    sub_basis: Basis
    w: Vec | None


def sample_nonzero_mod_p(n: int, p: int, rng: np.random.Generator) -> tuple:
    """Uniform z in Z_p^n \\ {0}.  Excluding z = 0 (which would keep the
    whole lattice) makes the per-point shifted survival probability exactly
    1/p in every dimension, including n = 1 where the p^-n mass of z = 0 is
    not negligible."""
    while True:
        z = tuple(int(v) for v in rng.integers(0, p, size=n))
        if any(z):
            return z


def sample_unshifted_sparsifier(basis: Basis, p: int,
                                rng: np.random.Generator) -> SparsifierDraw:
    """Draw z uniform in Z_p^n \\ {0} and build the sublattice basis."""
    if p < 101:
        raise ValueError("sparsification requires p >= 101")
    z = sample_nonzero_mod_p(basis.n, p, rng)
    return SparsifierDraw(p=p, z=z, c=None,
                          sub_basis=sparsify_basis(basis, p, z), w=None)


def sample_shifted_sparsifier(basis: Basis, p: int,
                              rng: np.random.Generator) -> SparsifierDraw:
    """Draw z uniform in Z_p^n \\ {0} and c uniform in Z_p^n; w = B c
    shifts the coset."""
    if p < 101:
        raise ValueError("sparsification requires p >= 101")
    z = sample_nonzero_mod_p(basis.n, p, rng)
    c = tuple(int(v) for v in rng.integers(0, p, size=basis.n))
    w = basis.multiply(vec(c))
    return SparsifierDraw(p=p, z=z, c=c,
                          sub_basis=sparsify_basis(basis, p, z), w=w)
