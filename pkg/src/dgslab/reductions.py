"""Reductions in the other direction: solving CVP and SVP with a discrete
Gaussian sampler.

`cvp_via_dgs` makes a single draw at a width so small that essentially all
mass sits on the closest shell.  `svp_via_cdgs` sweeps a geometric grid of
widths derived from bit-length bounds on lambda_1 and returns the shortest
nonzero sample.

Samplers are passed as callables; `ExactDgsSampler` provides a statistically
exact reference implementation backed by full enumeration with caching, and
the engine-backed mixture samplers plug in via `engine_dgs_sampler` /
`engine_cdgs_sampler`.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .core import (
    Basis,
    ShiftedLattice,
    Vec,
    denominator_lcm,
    norm_sq,
    rat,
    vec_add,
    zero_vec,
)
from .oracles import exact_dgs
from .samplers import FAST, CdgsSvpSampler, DgsCvpSampler, SamplerParams


class ExactDgsSampler:
    """Reference sampler: draws from the exactly computed (truncated)
    discrete Gaussian, with the enumerated distribution cached per
    (lattice, width)."""

    def __init__(self, tail_eps: float = 2**-40):
        self.tail_eps = tail_eps
        self._cache = {}

    def shifted(self, lat: ShiftedLattice, s, size: int,
                rng: np.random.Generator) -> list[Vec]:
        s = rat(s)
        key = (lat.basis, lat.shift, s)
        dist = self._cache.get(key)
        if dist is None:
            dist = exact_dgs(lat, s, self.tail_eps)
            self._cache[key] = dist
        return dist.sample_batch(size, rng)

    def centered(self, basis: Basis, s, size: int,
                 rng: np.random.Generator) -> list[Vec]:
        return self.shifted(ShiftedLattice(basis, zero_vec(basis.n)),
                            s, size, rng)


def engine_dgs_sampler(f: int, params: SamplerParams = FAST,
                       counter: str = "exact"):
    """Shifted-sampler callable backed by DgsCvpSampler (one per width)."""
    cache = {}

    def sampler(lat, s, size, rng):
        key = (lat.basis, lat.shift, rat(s))
        if key not in cache:
            cache[key] = DgsCvpSampler(lat, s, f, counter=counter,
                                       params=params)
        return cache[key].sample_batch(size, rng)

    return sampler


def engine_cdgs_sampler(f: int, params: SamplerParams = FAST,
                        counter: str = "exact"):
    """Centered-sampler callable backed by CdgsSvpSampler."""
    cache = {}

    def sampler(basis, s, size, rng):
        key = (basis, rat(s))
        if key not in cache:
            cache[key] = CdgsSvpSampler(basis, s, f, counter=counter,
                                        params=params)
        return cache[key].sample_batch(size, rng)

    return sampler


def cvp_width(lat: ShiftedLattice, f: int) -> Fraction:
    """Width small enough that all but a negligible part of the Gaussian
    mass over L - t sits on the closest shell.

    Squared distances of lattice points to t are rationals with denominator
    dividing q^2 (q = lcm of coordinate denominators), so consecutive
    shells are separated by at least 1/q^2 and the second shell's relative
    weight is exp(-pi / (q s)^2) — vanishing for s = 1/ceil(100 f n q L)
    with L a log-scale distance bound."""
    n = lat.n
    q = denominator_lcm(lat)
    d_upper = float(n) * 2.0 ** lat.basis.bit_length
    m = math.ceil(100 * f * n * q * math.log(10.0 + d_upper))
    return Fraction(1, m)


def cvp_via_dgs(lat: ShiftedLattice, f: int, rng: np.random.Generator,
                sampler=None, repeats: int = 1):
    """Closest-vector candidate from `repeats` draws of a shifted sampler
    at width cvp_width(lat, f); returns (vector, dist_sq) for the best draw.

    A single draw succeeds with probability at least 1/(1 + 1/f) minus the
    sampler's statistical defect; take repeats = ceil(18 * ln(1/delta)) to
    push the failure probability below delta even for a sampler that only
    meets the weak 1/18 success guarantee."""
    if sampler is None:
        sampler = ExactDgsSampler().shifted
    s = cvp_width(lat, f)
    draws = sampler(lat, s, repeats, rng)
    best = None
    best_d = None
    for y in draws:
        d = norm_sq(y)
        if best_d is None or d < best_d:
            best, best_d = y, d
    return vec_add(best, lat.shift), best_d


def svp_approx_factor(n: int, f: int) -> float:
    """Approximation factor achieved by svp_via_cdgs: 10 * sqrt(n / ln f)."""
    return 10.0 * math.sqrt(n / math.log(f))


def svp_via_cdgs(basis: Basis, f: int, rng: np.random.Generator,
                 sampler=None, early_stop: bool = True):
    """Nonzero lattice vector of norm <= svp_approx_factor(n, f) * lambda_1
    from a centered sampler.

    Sweeps widths s_i = (1 + 1/n^2)^i * s_lo upward from the bit-length
    lower bound on lambda_1, drawing ceil(100 n f^2) samples per width.
    With early_stop the sweep returns the shortest nonzero sample of the
    first productive width; nonzero samples at widths at or below the
    analysis point are no longer than those above it, so stopping early
    never worsens the guarantee.  Returns (vector, norm_sq)."""
    if f < 2:
        raise ValueError("f must be >= 2")
    if sampler is None:
        sampler = ExactDgsSampler().centered
    n = basis.n
    m_bits = basis.bit_length
    sqrt_ln_f = math.sqrt(math.log(f))
    s_lo = 2.0 ** (-n * m_bits) / sqrt_ln_f
    s_hi = 10.0 * 2.0 ** m_bits / sqrt_ln_f * (1.0 + 1.0 / n**2)
    step = 1.0 + 1.0 / n**2
    per_point = math.ceil(100 * n * f * f)
    best = None
    best_d = None
    s = s_lo
    while s <= s_hi:
        s_rat = Fraction(s).limit_denominator(10**9)
        draws = sampler(basis, s_rat, per_point, rng)
        for y in draws:
            d = norm_sq(y)
            if d == 0:
                continue
            if best_d is None or d < best_d:
                best, best_d = y, d
        if best is not None and early_stop:
            return best, best_d
        s *= step
    if best is None:
        raise RuntimeError("width sweep produced no nonzero sample")
    return best, best_d
