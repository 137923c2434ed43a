"""Randomized lattice point counting from CVP/SVP oracles via sparsification.

A GapVCP instance asks whether |(L - t) ∩ rB| is > γN (yes) or <= N (no);
the decision runs many sparsification trials and thresholds the number of
trials whose oracle answer lands within r.  A geometric ladder of such
decisions yields a one-sided multiplicative count estimate.  The primitive
variants count primitive vectors (up to sign) using SVP oracles.

Parameter presets: FAITHFUL carries the source constants; FAST shrinks the
prime intervals and trial constants to desk scale while preserving the same
threshold cushion (>= 2*sqrt(l) on the no side), and is what the acceptance
suite runs.  Defaults are FAITHFUL everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.stats import binom

from .core import (
    Basis,
    IterationLimitError,
    ShiftedLattice,
    Vec,
    rat,
    vec_add,
    zero_vec,
)
from .engine import CvpTrialEngine, SvpTrialEngine
from .oracles import solve_cvp, solve_svp
from .sparsify import prime_in_interval, sample_shifted_sparsifier, sample_unshifted_sparsifier


@dataclass(frozen=True)
class CountingParams:
    """Constants for the randomized counters.

    prime intervals are [vcp_prime_mult*f*N, 2*vcp_prime_mult*f*N] (the
    primitive variant multiplies in ln(10 f N)); trial counts are
    ceil(ell_const * f^2 p^2 / N^2)."""

    vcp_prime_mult: float = 200.0
    pvcp_prime_mult: float = 200.0
    # With the log factor, primes satisfy xi <= p/(20 ln p) outright, which
    # rules out proportional-mod-p primitive pairs.  Without it (FAST) the
    # engines verify the no-proportional-pairs condition explicitly.
    pvcp_log_factor: bool = True
    ell_const: float = 100.0
    # Guaranteed one-run error on promise instances.  The threshold keeps a
    # cushion of 2*sqrt(l) on the no side, so by Hoeffding the no-side error
    # is <= exp(-8); with ell_const >= 27 the yes side keeps at least the
    # same cushion.  The source bound claims 1/e, which FAITHFUL advertises.
    per_run_error: float = 1.0 / math.e
    max_trials: int = 50_000_000

    def vcp_prime(self, f: float, n_bound: int) -> int:
        lo = max(101.0, self.vcp_prime_mult * f * n_bound)
        return prime_in_interval(lo, 2 * lo)

    def pvcp_prime(self, f: float, n_bound: int) -> int:
        lo = max(101.0, self.pvcp_prime_mult * f * n_bound)
        if self.pvcp_log_factor:
            lo = max(101.0, lo * math.log(10 * f * n_bound))
            # Room for xi <= p / (20 ln p) up to a saturated yes side.
            cap = 20.0 * (2 * f * n_bound + 1)
            while lo < cap * math.log(lo):
                lo = cap * math.log(lo) + 1
        return prime_in_interval(lo, 2 * lo)

    def n_trials(self, f: float, p: int, n_bound: int) -> int:
        ell = math.ceil(self.ell_const * f * f * p * p / (n_bound * n_bound))
        if ell > self.max_trials:
            raise IterationLimitError(
                f"trial count {ell} exceeds max_trials; use the FAST preset "
                f"or raise CountingParams.max_trials"
            )
        return ell


FAITHFUL = CountingParams()
FAST = CountingParams(vcp_prime_mult=10.0, pvcp_prime_mult=10.0,
                      pvcp_log_factor=False, ell_const=27.0,
                      per_run_error=math.exp(-4))


@dataclass(frozen=True)
class GapInstance:
    """A promise instance for GapVCP: is |(L - t) ∩ rB| > gamma*N or <= N?"""

    lat: ShiftedLattice
    radius_sq: Fraction
    n_bound: int  # N

    def __post_init__(self):
        object.__setattr__(self, "radius_sq", rat(self.radius_sq))
        if self.n_bound < 1:
            raise ValueError("N must be >= 1")


def gap_vcp_decide(inst: GapInstance, f: float, rng: np.random.Generator,
                   cvp_oracle=None, engine: CvpTrialEngine | None = None,
                   params: CountingParams = FAITHFUL) -> bool:
    """One randomized GapVCP decision (error probability <= 1/e on promise
    instances).  Returns True for yes (count > gamma*N).

    Trials run on the vectorized engine unless an explicit cvp_oracle
    callable is given, in which case every trial literally sparsifies and
    calls the oracle on the shifted sublattice.
    """
    if f < 2:
        raise ValueError("f must be >= 2")
    p = params.vcp_prime(f, inst.n_bound)
    ell = params.n_trials(f, p, inst.n_bound)
    if cvp_oracle is not None:
        hits = 0
        basis, t = inst.lat.basis, inst.lat.shift
        for _ in range(ell):
            draw = sample_shifted_sparsifier(basis, p, rng)
            res = cvp_oracle(ShiftedLattice(draw.sub_basis, vec_add(t, draw.w)))
            if res.dist_sq <= inst.radius_sq:
                hits += 1
    else:
        if engine is None:
            engine = CvpTrialEngine(inst.lat, inst.radius_sq)
        hits = engine.count_hits(p, ell, inst.radius_sq, rng)
    threshold = ell * inst.n_bound / p + 2.0 * math.sqrt(ell)
    return hits > threshold


def gap_pvcp_decide(basis: Basis, radius_sq, n_bound: int, f: float,
                    rng: np.random.Generator, svp_oracle=None,
                    engine: SvpTrialEngine | None = None,
                    params: CountingParams = FAITHFUL,
                    lambda1_sq: Fraction | None = None,
                    beta: Fraction | None = None) -> bool:
    """One randomized GapPVCP decision: is xi(L, r) > gamma*N (yes) or
    <= N (no)?  Also returns no when lambda_1 falls outside the window
    (lambda_1 > r, or lambda_1 < beta*r/N with beta = 1/f by default)."""
    if f < 2:
        raise ValueError("f must be >= 2")
    radius_sq = rat(radius_sq)
    if lambda1_sq is None:
        lambda1_sq = (svp_oracle(basis) if svp_oracle is not None
                      else solve_svp(basis)).lambda1_sq
    if lambda1_sq > radius_sq:
        return False
    # lambda_1 < beta*r/N  <=>  lambda_1^2 (N/beta)^2 < r^2, exactly.
    if beta is None:
        beta = Fraction(1) / Fraction(f).limit_denominator(10**9)
    if lambda1_sq * (Fraction(n_bound) / beta) ** 2 < radius_sq:
        return False
    p = params.pvcp_prime(f, n_bound)
    ell = params.n_trials(f, p, n_bound)
    if svp_oracle is not None:
        hits = 0
        for _ in range(ell):
            draw = sample_unshifted_sparsifier(basis, p, rng)
            res = svp_oracle(draw.sub_basis)
            if res.lambda1_sq <= radius_sq:
                hits += 1
    else:
        if engine is None:
            engine = SvpTrialEngine(basis, radius_sq)
        if not params.pvcp_log_factor:
            engine.check_no_proportional_pairs(p, radius_sq)
        hits = engine.count_hits(p, ell, radius_sq, rng)
    threshold = ell * n_bound / p + 2.0 * math.sqrt(ell)
    return hits > threshold


def _majority_repeats(confidence: float, n_decisions: int,
                      per_run_error: float) -> int:
    """Smallest odd R with Pr[majority of R wrong] <= (1-confidence)/n_decisions
    for the given per-run error."""
    alpha = (1.0 - confidence) / max(1, n_decisions)
    r = 1
    while binom.sf((r - 1) // 2, r, per_run_error) > alpha:
        r += 2
    return r


def _majority(decide, repeats: int) -> bool:
    yes = 0
    for i in range(repeats):
        if decide():
            yes += 1
        # Early exit once the majority is settled.
        if yes > repeats // 2 or (i + 1 - yes) > repeats // 2:
            break
    return yes > repeats // 2


@dataclass(frozen=True)
class CountEstimate:
    """One-sided multiplicative count estimate: with the stated confidence,
    lower_factor * true_count <= value <= true_count."""

    value: int
    lower_factor: float
    confidence: float
    degenerate: bool = False
    empty: bool = False


def _ladder_rungs(gamma_rung: float, cap: int) -> list[int]:
    rungs = [1]
    while rungs[-1] < cap:
        rungs.append(max(rungs[-1] + 1, math.ceil(rungs[-1] * gamma_rung)))
    return rungs


def _count_cap(basis: Basis, radius_sq: Fraction) -> int:
    """Crude upper bound 1 + (8r/lambda_1)^n on |(L-t) ∩ rB|."""
    l1_sq = solve_svp(basis).lambda1_sq
    ratio_sq = float(radius_sq / l1_sq)
    return 1 + math.ceil((8.0 * math.sqrt(ratio_sq)) ** basis.n)


def estimate_count(lat: ShiftedLattice, radius_sq, f: float,
                   rng: np.random.Generator, cvp_oracle=None,
                   engine: CvpTrialEngine | None = None,
                   params: CountingParams = FAITHFUL,
                   confidence: float = 0.99) -> CountEstimate:
    """Ladder estimator for |(L - t) ∩ rB| within a factor gamma^{1/10},
    gamma = 1 + 1/f, one-sided (never exceeds the true count) with the
    stated confidence.

    Rungs climb geometrically with ratio gamma^{1/20}; each rung runs a
    majority-amplified GapVCP decision.  At rung N the promises are
    separated by integrality whenever gamma^{1/20}*N < N+1, so the decision
    may use the effective gap max(gamma^{1/20}, (N+1)/N).
    """
    radius_sq = rat(radius_sq)
    gamma = 1.0 + 1.0 / f
    gamma_rung = gamma ** (1.0 / 20.0)
    cap = _count_cap(lat.basis, radius_sq)
    rungs = _ladder_rungs(gamma_rung, cap)
    repeats = _majority_repeats(confidence, len(rungs), params.per_run_error)
    if cvp_oracle is None and engine is None:
        engine = CvpTrialEngine(lat, radius_sq)
    f_rung_cap = math.ceil(1.0 / (gamma_rung - 1.0))
    last_yes = 0
    for n_bound in rungs:
        f_eff = max(2, min(f_rung_cap, n_bound))
        inst = GapInstance(lat, radius_sq, n_bound)
        yes = _majority(
            lambda: gap_vcp_decide(inst, f_eff, rng, cvp_oracle=cvp_oracle,
                                   engine=engine, params=params),
            repeats,
        )
        if not yes:
            break
        last_yes = n_bound
    return CountEstimate(value=last_yes + 1, lower_factor=gamma ** -0.1,
                         confidence=confidence)


def estimate_primitive_count(basis: Basis, radius_sq, f: float,
                             rng: np.random.Generator, svp_oracle=None,
                             engine: SvpTrialEngine | None = None,
                             params: CountingParams = FAITHFUL,
                             confidence: float = 0.99) -> CountEstimate:
    """Ladder estimator for xi(L, r), the number of primitive vectors within
    r counted up to sign.

    When lambda_1 > r the ball holds no primitive vectors: the estimate is
    0 with the empty flag set.  The degenerate flag marks estimates where
    lambda_1 < r / (100 n^2 f * value), the regime where the downstream
    sampler falls back to the SVP vector directly.
    """
    radius_sq = rat(radius_sq)
    svp_res = svp_oracle(basis) if svp_oracle is not None else solve_svp(basis)
    l1_sq = svp_res.lambda1_sq
    if l1_sq > radius_sq:
        return CountEstimate(value=0, lower_factor=1.0, confidence=confidence,
                             empty=True)
    gamma = 1.0 + 1.0 / f
    gamma_rung = gamma ** (1.0 / 20.0)
    cap = _count_cap(basis, radius_sq)
    rungs = _ladder_rungs(gamma_rung, cap)
    repeats = _majority_repeats(confidence, len(rungs), params.per_run_error)
    if svp_oracle is None and engine is None:
        engine = SvpTrialEngine(basis, radius_sq)
    f_rung_cap = math.ceil(1.0 / (gamma_rung - 1.0))
    beta = Fraction(1) / Fraction(f).limit_denominator(10**9)
    last_yes = 0
    for n_bound in rungs:
        f_eff = max(2, min(f_rung_cap, n_bound))
        yes = _majority(
            lambda: gap_pvcp_decide(basis, radius_sq, n_bound, f_eff, rng,
                                    svp_oracle=svp_oracle, engine=engine,
                                    params=params, lambda1_sq=l1_sq,
                                    beta=beta),
            repeats,
        )
        if not yes:
            break
        last_yes = n_bound
    value = last_yes + 1
    n = basis.n
    guard = Fraction(100 * n * n) * Fraction(f).limit_denominator(10**9) * value
    degenerate = l1_sq * guard * guard < radius_sq
    return CountEstimate(value=value, lower_factor=gamma ** -0.1,
                         confidence=confidence, degenerate=degenerate)
