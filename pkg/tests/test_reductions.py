"""Solving CVP and SVP with discrete Gaussian samplers."""

import math
from fractions import Fraction

import numpy as np
import pytest

from dgslab.core import Basis, ShiftedLattice, lattice, norm_sq
from dgslab.oracles import solve_cvp, solve_svp
from dgslab.reductions import (
    ExactDgsSampler,
    cvp_via_dgs,
    cvp_width,
    engine_dgs_sampler,
    svp_approx_factor,
    svp_via_cdgs,
)

DEEP = ShiftedLattice(Basis([[Fraction(3), 0], [0, Fraction(1, 2)]]),
                      (Fraction(3, 2), Fraction(1, 4)))


def test_cvp_width_is_tiny_and_rational():
    s = cvp_width(DEEP, 3)
    assert 0 < s < Fraction(1, 100)
    assert s.numerator == 1


def test_cvp_via_dgs_with_ideal_sampler():
    rng = np.random.default_rng(0)
    sampler = ExactDgsSampler()
    truth = solve_cvp(DEEP)
    hits = 0
    for _ in range(50):
        v, d = cvp_via_dgs(DEEP, 3, rng, sampler=sampler.shifted)
        assert DEEP.basis is not None
        if d == truth.dist_sq:
            hits += 1
    # the width is small enough that essentially every draw is closest
    assert hits >= 45


def test_cvp_via_dgs_repeats_returns_best():
    rng = np.random.default_rng(1)
    sampler = ExactDgsSampler()
    truth = solve_cvp(DEEP)
    v, d = cvp_via_dgs(DEEP, 3, rng, sampler=sampler.shifted, repeats=20)
    assert d == truth.dist_sq


def test_cvp_via_dgs_with_engine_sampler():
    rng = np.random.default_rng(2)
    lat = lattice([[1, 0], [0, 1]], shift=[Fraction(2, 5), Fraction(1, 7)])
    truth = solve_cvp(lat)
    sampler = engine_dgs_sampler(3)
    v, d = cvp_via_dgs(lat, 3, rng, sampler=sampler, repeats=5)
    assert d == truth.dist_sq
    assert v == truth.vector  # unique closest point here


@pytest.mark.parametrize("cols", [[[1, 0], [0, 1]],
                                  [[2, 1], [0, 1]],
                                  [[1, 0], [0, 4]]])
def test_svp_via_cdgs_meets_factor(cols):
    rng = np.random.default_rng(3)
    b = Basis([[Fraction(x) for x in c] for c in cols])
    truth = solve_svp(b).lambda1_sq
    sampler = ExactDgsSampler()
    gam = svp_approx_factor(2, 10)
    v, d = svp_via_cdgs(b, 10, rng, sampler=sampler.centered)
    assert d > 0
    assert float(d) <= gam * gam * float(truth)
    # output is a lattice vector
    lat = ShiftedLattice(b, (Fraction(0), Fraction(0)))
    assert lat.member(v)


def test_svp_via_cdgs_full_sweep_matches_early_stop_quality():
    # 1-dim keeps the full (non-early-stop) sweep cheap
    rng = np.random.default_rng(4)
    b = Basis([[Fraction(2)]])
    sampler = ExactDgsSampler()
    v, d = svp_via_cdgs(b, 10, rng, sampler=sampler.centered,
                        early_stop=False)
    gam = svp_approx_factor(1, 10)
    assert 0 < float(d) <= gam * gam * 4.0
