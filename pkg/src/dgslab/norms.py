"""Non-Euclidean norm balls: exact comparators, CVP, counting trials, and
samplers for densities exp(-||x||_K^q).

Exactness rule: the l1 and sup norms of a rational vector are rational, and
the l2 norm is rational only after squaring.  All comparisons therefore go
through an exact "key" ||x||_K^e where e = q / (exponent of the stored
measure); (body, q) combinations that would need a fractional e are
rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .core import (
    Basis,
    IterationLimitError,
    ShiftedLattice,
    Vec,
    lex_less,
    rat,
    vec_add,
    vec_sub,
)
from .counting import CountingParams, FAITHFUL as COUNT_FAITHFUL, GapInstance, gap_vcp_decide
from .engine import CvpTrialEngine
from .oracles import enumerate_ball, solve_cvp
from .samplers import FAITHFUL as SAMPLE_FAITHFUL, SamplerParams, inner_f
from .sparsify import sample_shifted_sparsifier

import bisect


class NormBody(Enum):
    """Unit balls the toolkit can count and sample in."""

    L1 = "l1"
    L2 = "l2"
    LINF = "linf"


def measure(body: NormBody, v: Vec) -> Fraction:
    """Exact stored measure of v: ||v||_1, ||v||_2^2, or ||v||_inf."""
    if body is NormBody.L1:
        return sum((abs(x) for x in v), Fraction(0))
    if body is NormBody.L2:
        return sum((x * x for x in v), Fraction(0))
    return max((abs(x) for x in v), default=Fraction(0))


def measure_exponent(body: NormBody) -> int:
    """Power of the true norm held by measure(): 2 for l2, else 1."""
    return 2 if body is NormBody.L2 else 1


def key_exponent(body: NormBody, q: int) -> int:
    """e with measure^e = ||.||^q; raises for inexact combinations."""
    me = measure_exponent(body)
    if q % me != 0:
        raise ValueError(f"q={q} is not exactly representable for {body}")
    return q // me


def _superset_radius_sq(body: NormBody, max_measure: Fraction, n: int) -> Fraction:
    """Squared l2 radius of a ball containing {v : measure(v) <= max_measure}."""
    if body is NormBody.L2:
        return max_measure
    if body is NormBody.L1:
        return max_measure * max_measure
    return n * max_measure * max_measure


@dataclass(frozen=True)
class KCvpResult:
    vector: Vec
    measure: Fraction  # stored measure of vector - t


def cvp_k(lat: ShiftedLattice, body: NormBody) -> KCvpResult:
    """Closest lattice vector to the shift under the given norm, exact,
    tie-broken by lexicographic coordinates."""
    babai = solve_cvp(lat)
    bound = measure(body, vec_sub(babai.vector, lat.shift))
    ball = enumerate_ball(lat, _superset_radius_sq(body, bound, lat.n))
    best = None
    best_m = None
    for x in ball.points:
        m = measure(body, vec_sub(x, lat.shift))
        if m > bound:
            continue
        if best_m is None or m < best_m or (m == best_m and lex_less(x, best)):
            best, best_m = x, m
    return KCvpResult(vector=best, measure=best_m)


class KBallEngine(CvpTrialEngine):
    """Sparsification-trial engine over a K-norm ball cache.

    The cache is sorted by (measure^key_exp, lex), so prefix() takes an
    exact key value ||r||_K^q rather than a squared l2 radius; the inherited
    congruence-trial methods work unchanged."""

    def __init__(self, lat: ShiftedLattice, body: NormBody, max_key,
                 key_exp: int = 1):
        self.lat = lat
        self.body = body
        self.key_exp = key_exp
        self.max_key = rat(max_key)
        # Smallest convenient measure bound whose key covers max_key.
        mm = Fraction(math.ceil(float(self.max_key) ** (1.0 / key_exp)))
        while mm**key_exp < self.max_key:
            mm += 1
        ball = enumerate_ball(lat, _superset_radius_sq(body, mm, lat.n))
        items = []
        for x, a in zip(ball.points, ball.coords):
            k = measure(body, vec_sub(x, lat.shift)) ** key_exp
            if k <= self.max_key:
                items.append((k, x, a))
        items.sort(key=lambda it: (it[0], it[1]))
        self.keys = [it[0] for it in items]
        self.points = tuple(it[1] for it in items)
        self.coord_matrix = np.array([it[2] for it in items],
                                     dtype=np.int64).reshape(len(items), lat.n)
        self.trials_run = 0

    def prefix(self, key) -> int:
        key = rat(key)
        if key > self.max_key:
            raise ValueError("key exceeds the engine's cache bound")
        return bisect.bisect_right(self.keys, key)


def gap_vcp_k(lat: ShiftedLattice, body: NormBody, radius_measure, n_bound: int,
              f: float, rng: np.random.Generator, cvp_k_oracle=None,
              engine: KBallEngine | None = None,
              params: CountingParams = COUNT_FAITHFUL) -> bool:
    """K-norm ball-counting decision: True certifies the count exceeds
    n_bound, False certifies it is below f * n_bound (under the promise).

    Same trial statistics as the Euclidean decision; only the membership
    test (through the K-ball cache or a K-norm CVP oracle) changes."""
    radius_measure = rat(radius_measure)
    if cvp_k_oracle is None:
        if engine is None:
            engine = KBallEngine(lat, body, radius_measure)
        return gap_vcp_decide(GapInstance(lat, radius_measure, n_bound),
                              f, rng, engine=engine, params=params)
    p = params.vcp_prime(f, n_bound)
    ell = params.n_trials(f, p, n_bound)
    hits = 0
    basis, t = lat.basis, lat.shift
    for _ in range(ell):
        draw = sample_shifted_sparsifier(basis, p, rng)
        res = cvp_k_oracle(ShiftedLattice(draw.sub_basis,
                                          vec_add(t, draw.w)), body)
        if res.measure <= radius_measure:
            hits += 1
    return hits > ell * n_bound / p + 2.0 * math.sqrt(ell)


def uniform_k_ball_sample(lat: ShiftedLattice, body: NormBody, radius_measure,
                          n_est: int, f: float, rng: np.random.Generator,
                          cvp_k_oracle=None, engine: KBallEngine | None = None,
                          params: SamplerParams = SAMPLE_FAITHFUL) -> Vec:
    """Near-uniform sample from (L - t) ∩ r K via shifted sparsification."""
    radius_measure = rat(radius_measure)
    p = params.cvp_prime(f, n_est)
    cap = params.iteration_cap_mult * math.ceil(f * f)
    if cvp_k_oracle is not None:
        basis, t = lat.basis, lat.shift
        for _ in range(cap):
            draw = sample_shifted_sparsifier(basis, p, rng)
            res = cvp_k_oracle(ShiftedLattice(draw.sub_basis,
                                              vec_add(t, draw.w)), body)
            if res.measure <= radius_measure:
                return vec_sub(vec_sub(res.vector, draw.w), t)
        raise IterationLimitError("uniform K-ball sampler exceeded its cap")
    if engine is None:
        engine = KBallEngine(lat, body, radius_measure)
    try:
        idx = engine.sample_winners(p, 1, radius_measure, rng, cap)[0]
    except RuntimeError as exc:
        raise IterationLimitError(str(exc)) from exc
    return vec_sub(engine.points[idx], lat.shift)


@dataclass
class BallDecomposition:
    """Mixture of uniform K-ball distributions approximating the density
    proportional to exp(-||y||_K^q) over L - t."""

    lat: ShiftedLattice
    body: NormBody
    q: int
    f: int
    keys: list[Fraction]  # per-rung exact r_i^q values
    counts: list[int]
    index_probs: np.ndarray
    engine: KBallEngine
    params: SamplerParams

    def sample_batch(self, size: int, rng: np.random.Generator) -> list[Vec]:
        f_lem = inner_f(self.f)
        ks = rng.choice(len(self.index_probs), size=size, p=self.index_probs)
        rungs, needs = np.unique(ks, return_counts=True)
        out: list[Vec] = []
        for k, need in zip(rungs, needs):
            p = self.params.cvp_prime(f_lem, self.counts[k])
            cap = self.params.iteration_cap_mult * f_lem * int(need)
            try:
                idxs = self.engine.sample_winners(p, int(need), self.keys[k],
                                                  rng, cap)
            except RuntimeError as exc:
                raise IterationLimitError(str(exc)) from exc
            out.extend(vec_sub(self.engine.points[i], self.lat.shift)
                       for i in idxs)
        return out

    def sample(self, rng: np.random.Generator) -> Vec:
        return self.sample_batch(1, rng)[0]


def chi_q_decomposition(lat: ShiftedLattice, body: NormBody, q: int, f: int,
                        params: SamplerParams = SAMPLE_FAITHFUL
                        ) -> BallDecomposition:
    """Build the rung schedule for exp(-||y||_K^q) over L - t.

    Rung keys are r_i^q = d^q + i/(10 f) with d the K-distance of t to L,
    held exactly; counts come from the exhaustive cache."""
    if q < 1:
        raise ValueError("q must be a positive integer")
    if f < 2:
        raise ValueError("f must be >= 2")
    e = key_exponent(body, q)
    n = lat.n
    d_key = cvp_k(lat, body).measure ** e
    ell = math.ceil(100 * n**q * f ** (q + 1))
    keys = [d_key + Fraction(i, 10 * f) for i in range(ell + 1)]
    engine = KBallEngine(lat, body, keys[-1], key_exp=e)
    counts = [engine.prefix(k) for k in keys]
    steps = np.arange(ell + 1) / (10.0 * f)
    u = np.exp(-steps)  # relative weights exp(-(r_i^q - d^q))
    w = np.empty(ell + 1)
    w[:-1] = u[:-1] - u[1:]
    w[-1] = u[-1]
    mass = np.array(counts, dtype=float) * w
    return BallDecomposition(lat=lat, body=body, q=q, f=f, keys=keys,
                             counts=counts, index_probs=mass / mass.sum(),
                             engine=engine, params=params)


def lsp_chi_q_sample(lat: ShiftedLattice, body: NormBody, q: int, f: int,
                     rng: np.random.Generator,
                     params: SamplerParams = SAMPLE_FAITHFUL) -> Vec:
    """One draw close to the density proportional to exp(-||y||_K^q) over
    L - t.  Builds the decomposition from scratch; reuse a
    BallDecomposition for repeated draws."""
    return chi_q_decomposition(lat, body, q, f, params=params).sample(rng)


def exact_chi_q(lat: ShiftedLattice, body: NormBody, q: int,
                max_key) -> tuple[list[Vec], np.ndarray]:
    """Reference distribution proportional to exp(-||y||_K^q), truncated at
    ||y||_K^q <= max_key; returns (support points y in L - t, probabilities)."""
    e = key_exponent(body, q)
    engine = KBallEngine(lat, body, rat(max_key), key_exp=e)
    base = float(engine.keys[0]) if engine.keys else 0.0
    weights = np.array([math.exp(-(float(k) - base)) for k in engine.keys])
    support = [vec_sub(x, lat.shift) for x in engine.points]
    return support, weights / weights.sum()
