"""Discrete Gaussian samplers driven by CVP/SVP oracles.

The shifted sampler decomposes the Gaussian over L - t into a mixture of
uniform distributions over balls of increasing radii, realizes each uniform
component by sparsification + CVP, and needs approximate point counts for
the mixture weights.  The centered sampler does the same over primitive
vectors with SVP, then scales the chosen primitive vector by a 1-D discrete
Gaussian multiplier.

All samplers work on an exact rescaling of the lattice to width 1 and scale
the output back, so emitted vectors are exact rationals in L - t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import erfc, erfcinv, erfcx

from .core import (
    Basis,
    IterationLimitError,
    ShiftedLattice,
    Vec,
    rat,
    vec_add,
    vec_scale,
    vec_sub,
    zero_vec,
)
from .engine import CvpTrialEngine, SvpTrialEngine
from .oracles import solve_cvp, solve_svp
from .sparsify import prime_in_interval, sample_shifted_sparsifier, sample_unshifted_sparsifier

_SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class SamplerParams:
    """Prime-interval constants for the uniform component samplers.

    Primes live in [mult * f * N, 2 * mult * f * N].  FAITHFUL carries the
    source constants (the primitive side has an extra ln(10 f N) factor);
    FAST shrinks them so that the per-point distortion bound (<= 2N/p
    shifted, <= N/p unshifted) stays within half the closeness budget
    1 - 1/(1 + 1/f), with the no-proportional-pairs condition checked
    explicitly on the unshifted side."""

    cvp_prime_mult: float = 10.0
    svp_prime_mult: float = 100.0
    svp_log_factor: bool = True
    iteration_cap_mult: int = 100_000  # cap = mult * f^2 per needed sample

    def cvp_prime(self, f: float, n_est: int) -> int:
        lo = max(101.0, self.cvp_prime_mult * f * n_est)
        return prime_in_interval(lo, 2 * lo)

    def svp_prime(self, f: float, n_est: int) -> int:
        lo = max(101.0, self.svp_prime_mult * f * n_est)
        if self.svp_log_factor:
            lo = max(101.0, lo * math.log(10 * f * n_est))
        return prime_in_interval(lo, 2 * lo)


FAITHFUL = SamplerParams()
FAST = SamplerParams(cvp_prime_mult=4.0, svp_prime_mult=4.0,
                     svp_log_factor=False)


def inner_f(f: float, exponent: float = 0.1) -> int:
    """Smallest integer f' with 1 + 1/f' <= (1 + 1/f)^exponent; the quality
    parameter handed to sub-procedures that must be gamma^exponent-close."""
    gamma = 1.0 + 1.0 / f
    return math.ceil(1.0 / (gamma**exponent - 1.0))


def rho_z_nonzero(s: float, rel_tol: float = 1e-14) -> float:
    """rho_s(Z \\ {0}) = 2 * sum_{k>=1} exp(-pi k^2 / s^2), truncated once
    terms fall below rel_tol relative to the running sum."""
    if s <= 0:
        raise ValueError("s must be positive")
    total = 0.0
    k = 1
    while True:
        term = math.exp(-math.pi * k * k / (s * s))
        total += term
        if term <= rel_tol * total or term == 0.0:
            break
        k += 1
    return 2.0 * total


def _rho_nonzero_of_inv_r(r_sq: np.ndarray) -> np.ndarray:
    """rho_{1/r}(Z \\ {0}) = 2 sum_k exp(-pi k^2 r^2), vectorized over r^2."""
    out = np.zeros_like(r_sq, dtype=float)
    k = 1
    while True:
        term = np.exp(-math.pi * k * k * r_sq)
        out += term
        if term.max(initial=0.0) < 1e-18:
            break
        k += 1
    return 2.0 * out


def sample_z_nonzero_batch(s: float, size: int, rng: np.random.Generator
                           ) -> tuple[np.ndarray, int]:
    """Draw `size` samples of the discrete Gaussian on Z \\ {0} with width s.

    Returns (values, total_iterations); expected iterations per sample <= 2.
    Scheme: with probability exp(-pi/s^2)/Z output magnitude 1, else draw a
    continuous Gaussian x on (1, inf), round up, and accept with probability
    exp(-pi(ceil(x)^2 - x^2)/s^2); finally flip a fair sign.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    # exp(-pi/s^2) / (exp(-pi/s^2) + integral_1^inf exp(-pi x^2/s^2) dx),
    # in underflow-safe form via erfcx.
    p_one = 1.0 / (1.0 + (s / 2.0) * erfcx(_SQRT_PI / s))
    tail = erfc(_SQRT_PI / s)
    mags = np.zeros(size, dtype=np.int64)
    pending = np.arange(size)
    iters = 0
    while pending.size:
        k = pending.size
        iters += k
        u = rng.random(k)
        direct = u < p_one
        mags[pending[direct]] = 1
        rest = pending[~direct]
        if rest.size:
            if tail == 0.0:
                # Magnitudes > 1 carry mass below double precision here.
                mags[rest] = 1
                rest = rest[:0]
            else:
                v = np.maximum(rng.random(rest.size), 1e-300)
                x = erfcinv(v * tail) * s / _SQRT_PI
                x = np.maximum(x, 1.0)
                y = np.ceil(x)
                acc = rng.random(rest.size) < np.exp(
                    -math.pi * (y * y - x * x) / (s * s))
                mags[rest[acc]] = y[acc].astype(np.int64)
                rest = rest[~acc]
        pending = rest
    signs = rng.integers(0, 2, size=size, dtype=np.int64) * 2 - 1
    return mags * signs, iters


def sample_z_nonzero(s: float, rng: np.random.Generator) -> int:
    """One draw from the discrete Gaussian on Z \\ {0} with width s."""
    vals, _ = sample_z_nonzero_batch(s, 1, rng)
    return int(vals[0])


def uniform_ball_sample(lat: ShiftedLattice, radius_sq, n_est: int, f: float,
                        rng: np.random.Generator, cvp_oracle=None,
                        engine: CvpTrialEngine | None = None,
                        params: SamplerParams = FAITHFUL) -> Vec:
    """Near-uniform sample from (L - t) ∩ rB via shifted sparsification and
    CVP, given a count estimate n_est <= |(L-t) ∩ rB| <= f * n_est.

    Per-point probabilities deviate from uniform by at most the factor
    1 + 1/f.  Requires the ball to be nonempty."""
    radius_sq = rat(radius_sq)
    p = params.cvp_prime(f, n_est)
    cap = params.iteration_cap_mult * math.ceil(f * f)
    if cvp_oracle is not None:
        basis, t = lat.basis, lat.shift
        for _ in range(cap):
            draw = sample_shifted_sparsifier(basis, p, rng)
            res = cvp_oracle(ShiftedLattice(draw.sub_basis,
                                            vec_add(t, draw.w)))
            if res.dist_sq <= radius_sq:
                return vec_sub(vec_sub(res.vector, draw.w), t)
        raise IterationLimitError("uniform ball sampler exceeded its cap")
    if engine is None:
        engine = CvpTrialEngine(lat, radius_sq)
    try:
        idx = engine.sample_winners(p, 1, radius_sq, rng, cap)[0]
    except RuntimeError as exc:
        raise IterationLimitError(str(exc)) from exc
    return vec_sub(engine.points[idx], lat.shift)


def uniform_primitive_sample(basis: Basis, radius_sq, n_est: int, f: float,
                             rng: np.random.Generator, svp_oracle=None,
                             engine: SvpTrialEngine | None = None,
                             params: SamplerParams = FAITHFUL) -> Vec:
    """Near-uniform primitive vector of L within r (one of each +-pair,
    deterministically signed), via unshifted sparsification and SVP."""
    radius_sq = rat(radius_sq)
    p = params.svp_prime(f, n_est)
    cap = params.iteration_cap_mult * math.ceil(f * f)
    if svp_oracle is not None:
        for _ in range(cap):
            draw = sample_unshifted_sparsifier(basis, p, rng)
            res = svp_oracle(draw.sub_basis)
            if res.lambda1_sq <= radius_sq:
                return res.vector
        raise IterationLimitError("primitive sampler exceeded its cap")
    if engine is None:
        engine = SvpTrialEngine(basis, radius_sq)
    if not params.svp_log_factor:
        engine.check_no_proportional_pairs(p, radius_sq)
    try:
        idx = engine.sample_winners(p, 1, radius_sq, rng, cap)[0]
    except RuntimeError as exc:
        raise IterationLimitError(str(exc)) from exc
    return engine.points[idx]


def _scaled(lat: ShiftedLattice, s: Fraction) -> ShiftedLattice:
    inv = 1 / s
    cols = [vec_scale(c, inv) for c in lat.basis.columns]
    return ShiftedLattice(Basis(cols), vec_scale(lat.shift, inv))


class DgsCvpSampler:
    """Sampler for D_{L-t, s} built from a CVP oracle.

    The mixture schedule (radii, counts, weights) is computed once at
    construction; draws are then cheap.  counter='exact' injects the
    oracle-backed exact counter for the mixture counts (fast-test mode);
    counter='ladder' runs the randomized estimator per rung (faithful,
    very slow) and requires `rng`.
    """

    def __init__(self, lat: ShiftedLattice, s, f: int,
                 counter: str = "exact", oracle=None,
                 params: SamplerParams = FAITHFUL,
                 rng: np.random.Generator | None = None,
                 counting_params=None, max_rungs: int = 2_000_000):
        self.lat = lat
        self.s = rat(s)
        if self.s <= 0:
            raise ValueError("s must be positive")
        if f < 2:
            raise ValueError("f must be >= 2")
        self.f = f
        self.oracle = oracle
        self.params = params
        self.scaled = _scaled(lat, self.s)
        n = lat.n
        d_sq = solve_cvp(self.scaled).dist_sq
        d = math.sqrt(float(d_sq))
        ell = math.ceil(100 * n * n * f * math.log(10.0 + d))
        if ell > max_rungs:
            raise ValueError(f"schedule length {ell} exceeds max_rungs")
        self.radii_sq = [d_sq + Fraction(i, 10 * f) for i in range(ell + 1)]
        self.engine = CvpTrialEngine(self.scaled, self.radii_sq[-1])
        if counter == "exact":
            self.counts = [self.engine.prefix(r) for r in self.radii_sq]
        elif counter == "ladder":
            if rng is None:
                raise ValueError("counter='ladder' requires rng")
            from .counting import FAITHFUL as COUNT_FAITHFUL, estimate_count
            cp = counting_params or COUNT_FAITHFUL
            self.counts = [
                estimate_count(self.scaled, r, f, rng, engine=self.engine,
                               params=cp).value
                for r in self.radii_sq
            ]
        else:
            raise ValueError(f"unknown counter {counter!r}")
        # Weights relative to exp(-pi d^2): only ratios matter.
        steps = np.arange(ell + 1) / (10.0 * f)
        u = np.exp(-math.pi * steps)
        w = np.empty(ell + 1)
        w[:-1] = u[:-1] - u[1:]
        w[-1] = u[-1]
        mass = np.array(self.counts, dtype=float) * w
        self.index_probs = mass / mass.sum()
        self.f_lem = inner_f(f)
        self._primes = {}

    def _prime_for(self, n_est: int) -> int:
        if n_est not in self._primes:
            self._primes[n_est] = self.params.cvp_prime(self.f_lem, n_est)
        return self._primes[n_est]

    def sample_batch(self, size: int, rng: np.random.Generator) -> list[Vec]:
        ks = rng.choice(len(self.index_probs), size=size, p=self.index_probs)
        rungs, needs = np.unique(ks, return_counts=True)
        out: list[Vec] = []
        for k, need in zip(rungs, needs):
            r_sq = self.radii_sq[k]
            n_est = self.counts[k]
            if self.oracle is not None:
                for _ in range(int(need)):
                    y = uniform_ball_sample(self.scaled, r_sq, n_est,
                                            self.f_lem, rng,
                                            cvp_oracle=self.oracle,
                                            params=self.params)
                    out.append(vec_scale(y, self.s))
                continue
            p = self._prime_for(n_est)
            cap = self.params.iteration_cap_mult * self.f_lem * int(need)
            try:
                idxs = self.engine.sample_winners(p, int(need), r_sq, rng, cap)
            except RuntimeError as exc:
                raise IterationLimitError(str(exc)) from exc
            for i in idxs:
                y = vec_sub(self.engine.points[i], self.scaled.shift)
                out.append(vec_scale(y, self.s))
        return out

    def sample(self, rng: np.random.Generator) -> Vec:
        return self.sample_batch(1, rng)[0]


def dgs_sample(lat: ShiftedLattice, s, f: int, rng: np.random.Generator,
               cvp_oracle=None, counter: str = "exact",
               params: SamplerParams = FAITHFUL) -> Vec:
    """One draw close to D_{L-t, s} ((gamma, eps)-close with gamma = 1+1/f,
    eps = 2^{-f}).  Builds the schedule from scratch; use DgsCvpSampler for
    repeated draws."""
    sampler = DgsCvpSampler(lat, s, f, counter=counter, oracle=cvp_oracle,
                            params=params, rng=rng)
    return sampler.sample(rng)


class CdgsSvpSampler:
    """Sampler for the centered D_{L, s} built from an SVP oracle.

    Decomposes the Gaussian into a point mass at 0 plus a mixture over
    primitive vectors scaled by 1-D discrete Gaussian multipliers."""

    def __init__(self, basis: Basis, s, f: int,
                 counter: str = "exact", oracle=None,
                 params: SamplerParams = FAITHFUL,
                 rng: np.random.Generator | None = None,
                 counting_params=None, max_rungs: int = 2_000_000):
        self.basis = basis
        self.s = rat(s)
        if self.s <= 0:
            raise ValueError("s must be positive")
        if f < 2:
            raise ValueError("f must be >= 2")
        self.f = f
        self.oracle = oracle
        self.params = params
        n = basis.n
        inv = 1 / self.s
        self.scaled_basis = Basis([vec_scale(c, inv) for c in basis.columns])
        svp = solve_svp(self.scaled_basis)
        l1_sq = svp.lambda1_sq
        ell = math.ceil(200 * n * n * f * f)
        if ell > max_rungs:
            raise ValueError(f"schedule length {ell} exceeds max_rungs")
        self.radii_sq = [l1_sq + Fraction(i, 100 * n * f)
                         for i in range(ell + 1)]
        self.engine = SvpTrialEngine(self.scaled_basis, self.radii_sq[-1])
        self.shortest = self.engine.points[0]
        if counter == "exact":
            self.counts = [self.engine.primitive_prefix_count(r)
                           for r in self.radii_sq]
            degenerate = [False] * (ell + 1)
        elif counter == "ladder":
            if rng is None:
                raise ValueError("counter='ladder' requires rng")
            from .counting import FAITHFUL as COUNT_FAITHFUL, estimate_primitive_count
            cp = counting_params or COUNT_FAITHFUL
            ests = [estimate_primitive_count(self.scaled_basis, r, f, rng,
                                             engine=self.engine, params=cp)
                    for r in self.radii_sq]
            self.counts = [e.value for e in ests]
            degenerate = [e.degenerate for e in ests]
        else:
            raise ValueError(f"unknown counter {counter!r}")
        # Degenerate rungs (lambda_1 far below the rung radius relative to
        # the count) fall back to the SVP vector directly.
        guard = [
            l1_sq * Fraction(100 * n * n * f * c) ** 2 < r
            for c, r in zip(self.counts, self.radii_sq)
        ]
        self.route_svp = [
            c == 1 or dg or g
            for c, dg, g in zip(self.counts, degenerate, guard)
        ]
        r_sq_f = np.array([float(r) for r in self.radii_sq])
        rho = _rho_nonzero_of_inv_r(r_sq_f)
        w = np.empty(ell + 1)
        w[:-1] = rho[:-1] - rho[1:]
        w[-1] = rho[-1]
        mass = np.array(self.counts, dtype=float) * w
        self.total_w = float(mass.sum())
        self.zero_prob = 1.0 / (1.0 + self.total_w)
        self.index_probs = mass / mass.sum()
        self.f_lem = inner_f(f)
        self._primes = {}
        self._norms = [math.sqrt(float(d)) for d in self.engine.dist_sq]

    def _prime_for(self, n_est: int) -> int:
        if n_est not in self._primes:
            self._primes[n_est] = self.params.svp_prime(self.f_lem, n_est)
        return self._primes[n_est]

    def _multiply_out(self, idxs: list[int], rng: np.random.Generator
                      ) -> list[Vec]:
        """Scale chosen primitive vectors by 1-D nonzero Gaussian draws."""
        by_norm: dict[int, list[int]] = {}
        for pos, i in enumerate(idxs):
            by_norm.setdefault(i, []).append(pos)
        out: list[Vec | None] = [None] * len(idxs)
        for i, positions in by_norm.items():
            s_z = 1.0 / self._norms[i]
            zs, _ = sample_z_nonzero_batch(s_z, len(positions), rng)
            x = self.engine.points[i]
            for pos, z in zip(positions, zs):
                out[pos] = vec_scale(x, Fraction(int(z)) * self.s)
        return out

    def sample_batch(self, size: int, rng: np.random.Generator) -> list[Vec]:
        zero = zero_vec(self.basis.n)
        is_zero = rng.random(size) < self.zero_prob
        n_nonzero = int((~is_zero).sum())
        ks = rng.choice(len(self.index_probs), size=n_nonzero,
                        p=self.index_probs)
        rungs, needs = np.unique(ks, return_counts=True)
        chosen: list[int] = []
        for k, need in zip(rungs, needs):
            r_sq = self.radii_sq[k]
            if self.route_svp[k]:
                chosen.extend([0] * int(need))  # cache index 0 = SVP vector
                continue
            n_est = self.counts[k]
            if self.oracle is not None:
                for _ in range(int(need)):
                    x = uniform_primitive_sample(self.scaled_basis, r_sq,
                                                 n_est, self.f_lem, rng,
                                                 svp_oracle=self.oracle,
                                                 params=self.params)
                    chosen.append(self.engine.points.index(x))
                continue
            p = self._prime_for(n_est)
            if not self.params.svp_log_factor:
                self.engine.check_no_proportional_pairs(p, r_sq)
            cap = self.params.iteration_cap_mult * self.f_lem * int(need)
            try:
                chosen.extend(self.engine.sample_winners(p, int(need), r_sq,
                                                         rng, cap))
            except RuntimeError as exc:
                raise IterationLimitError(str(exc)) from exc
        nonzero = self._multiply_out(chosen, rng)
        out: list[Vec] = []
        it = iter(nonzero)
        for z in is_zero:
            out.append(zero if z else next(it))
        return out

    def sample(self, rng: np.random.Generator) -> Vec:
        return self.sample_batch(1, rng)[0]


def cdgs_sample(basis: Basis, s, f: int, rng: np.random.Generator,
                svp_oracle=None, counter: str = "exact",
                params: SamplerParams = FAITHFUL) -> Vec:
    """One draw close to the centered D_{L, s} from an SVP oracle."""
    sampler = CdgsSvpSampler(basis, s, f, counter=counter, oracle=svp_oracle,
                             params=params, rng=rng)
    return sampler.sample(rng)
