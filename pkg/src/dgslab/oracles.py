"""Brute-force exact oracles: ball enumeration, CVP, SVP, point counting,
and the exact (truncated) discrete Gaussian reference distribution.

All comparisons against radii are exact rational arithmetic; floats appear
only in probability weights, where the documented error budget is met by
IEEE doubles plus exactly-rounded summation.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .core import (
    Basis,
    DimensionCapError,
    LatticeError,
    ShiftedLattice,
    Vec,
    denominator_lcm,
    norm_sq,
    rat,
    vec,
    vec_sub,
    zero_vec,
)

DEFAULT_DIM_CAP = 6


def dim_cap() -> int:
    """Enumeration dimension cap, overridable via DGSLAB_DIM_CAP."""
    raw = os.environ.get("DGSLAB_DIM_CAP")
    if raw is None:
        return DEFAULT_DIM_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise DimensionCapError(f"DGSLAB_DIM_CAP is not an integer: {raw!r}") from exc
    if cap < 1:
        raise DimensionCapError(f"DGSLAB_DIM_CAP must be positive: {cap}")
    return cap


def _check_dim(n: int) -> None:
    cap = dim_cap()
    if n > cap:
        raise DimensionCapError(
            f"dimension {n} exceeds the enumeration cap {cap} "
            f"(set DGSLAB_DIM_CAP to raise it)"
        )


def _floor_add_sqrt(a: int, s: int, m: int) -> int:
    """floor((a + sqrt(s)) / m) for integers a, s >= 0, m > 0, exactly."""
    k = (a + math.isqrt(s)) // m
    while True:
        d = (k + 1) * m - a
        if d <= 0 or d * d <= s:
            k += 1
        else:
            return k


def _ceil_sub_sqrt(a: int, s: int, m: int) -> int:
    """ceil((a - sqrt(s)) / m) for integers a, s >= 0, m > 0, exactly."""
    return -_floor_add_sqrt(-a, s, m)


def _gram_schmidt(cols: list[list[Fraction]]):
    """Exact Gram-Schmidt: returns (mu, c) with mu[k][j] for j < k and
    c[k] = ||b*_k||^2."""
    n = len(cols)
    star = [col[:] for col in cols]
    mu = [[Fraction(0)] * n for _ in range(n)]
    c = [Fraction(0)] * n
    for k in range(n):
        for j in range(k):
            num = sum(cols[k][i] * star[j][i] for i in range(n))
            mu[k][j] = num / c[j]
            star[k] = [star[k][i] - mu[k][j] * star[j][i] for i in range(n)]
        c[k] = sum(v * v for v in star[k])
        if c[k] == 0:
            raise LatticeError("linearly dependent columns in enumeration")
    return mu, c


@dataclass(frozen=True)
class BallEnumeration:
    """All lattice points x with ||x - center||^2 <= radius_sq, sorted by
    (distance, lexicographic coordinates)."""

    center: Vec
    radius_sq: Fraction
    points: tuple[Vec, ...]
    coords: tuple[tuple[int, ...], ...]
    dist_sq: tuple[Fraction, ...]

    def __len__(self) -> int:
        return len(self.points)


def enumerate_ball(lat: ShiftedLattice, radius_sq) -> BallEnumeration:
    """Enumerate L ∩ (closed ball of squared radius radius_sq around t)."""
    r_sq = rat(radius_sq)
    if r_sq < 0:
        raise ValueError("radius_sq must be nonnegative")
    n = lat.n
    _check_dim(n)

    scale = denominator_lcm(lat)
    cols = [[int(x * scale) for x in col] for col in lat.basis.columns]
    target = [int(x * scale) for x in lat.shift]
    big_r = r_sq * scale * scale  # compare integer dist^2 <= big_r exactly

    cols_f = [[Fraction(v) for v in col] for col in cols]
    mu, c = _gram_schmidt(cols_f)
    w = lat.basis.coords(lat.shift)  # coefficients of t in B (exact)

    found: list[tuple[Fraction, tuple[int, ...]]] = []
    a = [0] * n
    diff = [Fraction(0)] * n  # diff[k] = a_k - w_k at the current node

    def descend(k: int, partial: Fraction) -> None:
        budget = big_r - partial
        if budget < 0:
            return
        center = w[k] - sum(mu[j][k] * diff[j] for j in range(k + 1, n))
        q = budget / c[k]
        cn, cd = center.numerator, center.denominator
        qn, qd = q.numerator, q.denominator
        s_val = qn * qd * cd * cd
        lo = _ceil_sub_sqrt(cn * qd, s_val, cd * qd)
        hi = _floor_add_sqrt(cn * qd, s_val, cd * qd)
        for ak in range(lo, hi + 1):
            a[k] = ak
            z = ak - center
            diff[k] = ak - w[k]
            sub = partial + c[k] * z * z
            if k == 0:
                if sub <= big_r:
                    found.append((sub / (scale * scale), tuple(a)))
            else:
                descend(k - 1, sub)

    descend(n - 1, Fraction(0))

    entries = []
    for dsq, coeff in found:
        x = lat.basis.multiply(coeff)
        entries.append((dsq, x, coeff))
    entries.sort(key=lambda e: (e[0], e[1]))
    return BallEnumeration(
        center=lat.shift,
        radius_sq=r_sq,
        points=tuple(e[1] for e in entries),
        coords=tuple(e[2] for e in entries),
        dist_sq=tuple(e[0] for e in entries),
    )


@dataclass(frozen=True)
class CvpResult:
    vector: Vec  # the closest lattice point to t
    dist_sq: Fraction


def solve_cvp(lat: ShiftedLattice) -> CvpResult:
    """Exact closest vector to the shift, ties broken lexicographically."""
    _check_dim(lat.n)
    w = lat.basis.coords(lat.shift)
    rounded = [Fraction((2 * x.numerator + x.denominator) // (2 * x.denominator))
               for x in w]  # floor(x + 1/2)
    x0 = lat.basis.multiply(rounded)
    d0 = norm_sq(vec_sub(x0, lat.shift))
    ball = enumerate_ball(lat, d0)
    return CvpResult(vector=ball.points[0], dist_sq=ball.dist_sq[0])


@dataclass(frozen=True)
class SvpResult:
    vector: Vec
    lambda1_sq: Fraction
    lambda2_sq: Fraction | None = None


def solve_svp(basis: Basis, with_lambda2: bool = False) -> SvpResult:
    """Exact shortest nonzero vector (lex tie-break) and optionally lambda_2."""
    _check_dim(basis.n)
    lat = ShiftedLattice(basis, zero_vec(basis.n))
    r0 = min(norm_sq(col) for col in basis.columns)
    ball = enumerate_ball(lat, r0)
    best = None
    for pt, dsq in zip(ball.points, ball.dist_sq):
        if dsq == 0:
            continue
        key = (dsq, pt)
        if best is None or key < best:
            best = key
    if best is None:
        raise LatticeError("no nonzero vector found (internal error)")
    l1_sq, x1 = best[0], best[1]
    if not with_lambda2:
        return SvpResult(vector=x1, lambda1_sq=l1_sq)
    if basis.n == 1:
        return SvpResult(vector=x1, lambda1_sq=l1_sq, lambda2_sq=None)
    r2 = max(norm_sq(col) for col in basis.columns)
    ball2 = enumerate_ball(lat, r2)
    a1 = basis.coords(x1)
    best2 = None
    for pt, dsq, coeff in zip(ball2.points, ball2.dist_sq, ball2.coords):
        if dsq == 0:
            continue
        # independent of x1 <=> coefficient vectors are not proportional
        prop = True
        ratio = None
        for u, v in zip(coeff, a1):
            if v == 0:
                if u != 0:
                    prop = False
                    break
            else:
                r = Fraction(u, 1) / v
                if ratio is None:
                    ratio = r
                elif r != ratio:
                    prop = False
                    break
        if prop:
            continue
        key = (dsq, pt)
        if best2 is None or key < best2:
            best2 = key
    if best2 is None:
        raise LatticeError("lambda_2 not found within the basis-norm bound")
    return SvpResult(vector=x1, lambda1_sq=l1_sq, lambda2_sq=best2[0])


def exact_count(lat: ShiftedLattice, radius_sq) -> int:
    """|(L - t) ∩ rB| by exhaustive enumeration."""
    return len(enumerate_ball(lat, radius_sq))


def exact_primitive_count(basis: Basis, radius_sq) -> int:
    """xi(L, r): number of primitive lattice vectors within r, counted up to sign."""
    lat = ShiftedLattice(basis, zero_vec(basis.n))
    ball = enumerate_ball(lat, radius_sq)
    count = 0
    for coeff, dsq in zip(ball.coords, ball.dist_sq):
        if dsq == 0:
            continue
        if math.gcd(*coeff) == 1 if len(coeff) > 1 else abs(coeff[0]) == 1:
            count += 1
    assert count % 2 == 0
    return count // 2


def gaussian_tail_bound(dist_t: float, s: float, n: int, r: float) -> float:
    """Tail mass bound exp(-r^2 n) for Pr[||X||^2 >= dist^2 + r^2 s^2 n].

    Requires the hypothesis r >= 10*sqrt(ln(10 + dist/(s*sqrt(n)))).
    """
    if s <= 0 or n < 1 or r <= 0:
        raise ValueError("need s > 0, n >= 1, r > 0")
    floor = 10.0 * math.sqrt(math.log(10.0 + dist_t / (s * math.sqrt(n))))
    if r < floor:
        raise ValueError(f"tail bound hypothesis violated: r={r} < {floor}")
    return math.exp(-r * r * n)


@dataclass
class ExactDistribution:
    """Truncated exact discrete Gaussian over L - t with width s.

    Probabilities are proportional to exp(-pi ||y||^2 / s^2) over the support
    (all points of L - t within the truncation radius); the mass outside the
    truncation radius is provably below tail_eps.
    """

    lat: ShiftedLattice
    s: Fraction
    tail_eps: float
    radius_sq: Fraction
    support: tuple[Vec, ...]
    coords: tuple[tuple[int, ...], ...]
    norm_sq: tuple[Fraction, ...]
    probs: np.ndarray
    index: dict[Vec, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.index:
            self.index = {y: i for i, y in enumerate(self.support)}

    def prob_of(self, y: Vec) -> float:
        i = self.index.get(vec(y))
        return float(self.probs[i]) if i is not None else 0.0

    def sample_batch(self, size: int, rng: np.random.Generator) -> list[Vec]:
        idx = rng.choice(len(self.support), size=size, p=self.probs)
        return [self.support[i] for i in idx]


def truncation_radius_sq(lat: ShiftedLattice, s, tail_eps: float,
                         dist_sq: Fraction | None = None) -> Fraction:
    """Smallest grid radius satisfying the tail-bound hypothesis with
    exp(-r^2 n) < tail_eps; returns the squared absolute truncation radius
    dist^2 + r^2 s^2 n."""
    s = rat(s)
    n = lat.n
    if dist_sq is None:
        dist_sq = solve_cvp(lat).dist_sq
    d = math.sqrt(float(dist_sq))
    floor = 10.0 * math.sqrt(math.log(10.0 + d / (float(s) * math.sqrt(n))))
    k = 1
    while True:
        r = k / (4.0 * math.sqrt(n))  # grid step 1/(4 sqrt(n))
        if r >= floor and math.exp(-r * r * n) < tail_eps:
            break
        k += 1
    # r^2 s^2 n = (k^2 / (16 n)) s^2 n = k^2 s^2 / 16, exactly.
    return dist_sq + Fraction(k * k, 16) * s * s


def exact_dgs(lat: ShiftedLattice, s, tail_eps: float = 1e-9) -> ExactDistribution:
    """Exact truncated discrete Gaussian D_{L-t,s} by full enumeration."""
    s = rat(s)
    if s <= 0:
        raise ValueError("s must be positive")
    if not (0 < tail_eps < 1):
        raise ValueError("tail_eps must lie in (0, 1)")
    d_sq = solve_cvp(lat).dist_sq
    radius_sq = truncation_radius_sq(lat, s, tail_eps, dist_sq=d_sq)
    ball = enumerate_ball(lat, radius_sq)
    ys = tuple(vec_sub(x, lat.shift) for x in ball.points)
    nsq = ball.dist_sq
    s_sq = float(s * s)
    # Factor out the largest weight so ratios stay stable even when the
    # absolute weights underflow.
    min_nsq = float(min(nsq))
    masses = [math.exp(-math.pi * (float(q) - min_nsq) / s_sq) for q in nsq]
    total = math.fsum(masses)
    probs = np.array([m / total for m in masses], dtype=float)
    return ExactDistribution(
        lat=lat,
        s=s,
        tail_eps=tail_eps,
        radius_sq=radius_sq,
        support=ys,
        coords=ball.coords,
        norm_sq=nsq,
        probs=probs,
    )
