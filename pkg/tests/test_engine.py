"""Vectorized trial engines vs the literal sparsify-then-solve path."""

from fractions import Fraction

import numpy as np
import pytest

from dgslab.core import Basis, ShiftedLattice, lattice, vec_add, vec_sub
from dgslab.engine import CvpTrialEngine, SvpTrialEngine
from dgslab.oracles import (
    exact_count,
    exact_primitive_count,
    solve_cvp,
    solve_svp,
)
from dgslab.sparsify import sample_shifted_sparsifier, sample_unshifted_sparsifier

Z2 = lattice([[1, 0], [0, 1]])
SHIFTED = ShiftedLattice(Basis([[Fraction(3), 0], [0, Fraction(1, 2)]]),
                         (Fraction(3, 2), Fraction(1, 4)))


def test_prefix_matches_exact_count():
    eng = CvpTrialEngine(Z2, Fraction(8))
    for r in (0, 1, 2, 4, 5, 8):
        assert eng.prefix(Fraction(r)) == exact_count(Z2, Fraction(r))
    with pytest.raises(ValueError):
        eng.prefix(Fraction(9))


def test_primitive_prefix_matches_exact():
    eng = SvpTrialEngine(Z2.basis, Fraction(10))
    for r in (1, 2, 4, 5, 8, 9, 10):
        assert eng.primitive_prefix_count(Fraction(r)) == \
            exact_primitive_count(Z2.basis, Fraction(r))


@pytest.mark.parametrize("lat,r_sq", [(Z2, Fraction(5)),
                                      (SHIFTED, Fraction(4))])
def test_cvp_trials_match_honest_path(lat, r_sq):
    """The engine's per-draw winner equals the literal CVP call on the
    sparsified shifted lattice, including tie-breaks."""
    eng = CvpTrialEngine(lat, r_sq)
    rng = np.random.default_rng(42)
    p = 101
    for _ in range(150):
        draw = sample_shifted_sparsifier(lat.basis, p, rng)
        res = solve_cvp(ShiftedLattice(draw.sub_basis,
                                       vec_add(lat.shift, draw.w)))
        honest = None
        if res.dist_sq <= r_sq:
            honest = vec_sub(res.vector, draw.w)
        idx = eng.winner_for(p, draw.z, draw.c, r_sq)
        fast = eng.points[idx] if idx is not None else None
        assert fast == honest


def test_svp_trials_match_honest_path():
    eng = SvpTrialEngine(Z2.basis, Fraction(5))
    rng = np.random.default_rng(43)
    p = 103
    for _ in range(150):
        draw = sample_unshifted_sparsifier(Z2.basis, p, rng)
        res = solve_svp(draw.sub_basis)
        honest = res.vector if res.lambda1_sq <= 5 else None
        idx = eng.winner_for(p, draw.z, Fraction(5))
        fast = eng.points[idx] if idx is not None else None
        assert fast == honest


def test_count_hits_matches_winner_rate():
    """count_hits and sample_winners agree with the acceptance rate implied
    by winner_for under the same prime."""
    eng = CvpTrialEngine(Z2, Fraction(2))
    rng = np.random.default_rng(7)
    p = 211
    n = 40_000
    hits = eng.count_hits(p, n, Fraction(2), rng)
    m = eng.prefix(Fraction(2))
    expected = n * m / p  # up to collision terms of order (m/p)^2
    assert abs(hits - expected) < 6 * np.sqrt(expected)


def test_sample_winners_budget():
    eng = CvpTrialEngine(Z2, Fraction(1))
    rng = np.random.default_rng(8)
    with pytest.raises(RuntimeError):
        eng.sample_winners(10007, 5, Fraction(1), rng, max_trials=20)


def test_proportional_pair_detection():
    # radius large enough to contain (1,0) and (3,1): not proportional mod
    # large p, so the check passes; mod 3 the pair (1,0),(1,3)->(1,0),(1,0)
    b = Z2.basis
    eng = SvpTrialEngine(b, Fraction(10))
    eng.check_no_proportional_pairs(1009, Fraction(10))  # should not raise
    with pytest.raises(ValueError):
        # (1, 0) and (1, 3) are proportional mod 3
        eng.check_no_proportional_pairs(3, Fraction(10))
