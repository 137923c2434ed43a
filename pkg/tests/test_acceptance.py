"""End-to-end acceptance checks for the toolkit.

Each test fixes tolerances up front.  Statistical checks use three-standard-
error bands (or better) around exactly computed references; structural
checks are zero-tolerance.  The FAST parameter presets (smaller
sparsification primes with explicitly verified side conditions, per-run
decision error <= e^-4) keep the suite's Monte Carlo volume tractable;
the FAITHFUL presets differ only in constants.
"""

import math
from collections import Counter
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from scipy import stats

from dgslab.core import (
    Basis,
    ShiftedLattice,
    coords,
    is_lattice_member,
    lattice,
    norm_sq,
    vec_sub,
)
from dgslab.counting import (
    FAST as COUNT_FAST,
    CountingParams,
    GapInstance,
    gap_pvcp_decide,
    gap_vcp_decide,
)
from dgslab.engine import CvpTrialEngine, SvpTrialEngine
from dgslab.norms import NormBody, chi_q_decomposition, cvp_k, exact_chi_q
from dgslab.oracles import (
    enumerate_ball,
    exact_dgs,
    gaussian_tail_bound,
    solve_cvp,
    solve_svp,
    truncation_radius_sq,
)
from dgslab.reductions import (
    ExactDgsSampler,
    cvp_via_dgs,
    svp_approx_factor,
    svp_via_cdgs,
)
from dgslab.samplers import (
    FAST as SAMPLE_FAST,
    CdgsSvpSampler,
    DgsCvpSampler,
    rho_z_nonzero,
    sample_z_nonzero_batch,
)
from dgslab.sparsify import is_prime, sparsify_basis
from dgslab.verify import EmpiricalHistogram, closeness_check

# ---------------------------------------------------------------------------
# shared instances

Z1 = lattice([[1]])
Z2 = lattice([[1, 0], [0, 1]])
RECT = Basis([[Fraction(3), 0], [0, Fraction(1, 2)]])
DEEP = ShiftedLattice(RECT, (Fraction(3, 2), Fraction(1, 4)))  # deep hole
OFF = lattice([[1, 0], [0, 1]], shift=[Fraction(1, 3), Fraction(1, 4)])
B3 = Basis([[Fraction(1), 0, 0], [Fraction(1), 8, 0], [Fraction(0), 3, 24]])
LAT3 = ShiftedLattice(B3, (Fraction(1, 3), Fraction(1, 5), Fraction(2, 7)))
CENTERED3 = ShiftedLattice(B3, (Fraction(0), Fraction(0), Fraction(0)))

SMALL_BASES = [
    Z2.basis,
    RECT,
    Basis([[Fraction(2), 1], [Fraction(1), 3]]),
    Basis([[Fraction(1), 0, 0], [Fraction(0), 1, 0], [Fraction(0), 0, 1]]),
    Basis([[Fraction(1), 0, 0], [Fraction(1), 2, 0], [Fraction(0), 1, 3]]),
]


def sd_and_report(draws, ideal, gamma, radius_sq):
    hist = EmpiricalHistogram.from_samples(draws)
    rep = closeness_check(hist, ideal, gamma=gamma, eps=0.01,
                          radius_sq=radius_sq)
    return rep


# ---------------------------------------------------------------------------
# 1. sparsification structure, exhaustive over (z, c), zero tolerance


@pytest.mark.parametrize("basis", SMALL_BASES,
                         ids=["z2", "rect", "skew2", "z3", "skew3"])
@pytest.mark.parametrize("p", [3, 5, 7])
def test_acceptance_sublattice_structure(basis, p):
    """For every z mod p: the sparsified basis generates exactly
    {x in L : <z, coords(x)> = 0 mod p}, with det ratio p; and for every
    nonzero z, a point survives the shifted congruence for exactly p^(n-1)
    of the p^n shift classes c."""
    n = basis.n
    ball = enumerate_ball(ShiftedLattice(basis, tuple([Fraction(0)] * n)),
                          Fraction(16))
    coords_mat = np.array(ball.coords, dtype=np.int64)
    for z in product(range(p), repeat=n):
        sub = sparsify_basis(basis, p, z)
        if not any(zi % p for zi in z):
            assert sub.det == basis.det
            continue
        assert abs(sub.det / basis.det) == p
        za = coords_mat @ np.array(z, dtype=np.int64) % p
        for x, residue in zip(ball.points, za):
            assert is_lattice_member(sub, x) == (residue == 0)
        # shifted survival: for each cached point, exactly p^(n-1) of the
        # p^n values of c satisfy <z, a + c> = 0 mod p
        zc = np.array(list(product(range(p), repeat=n)),
                      dtype=np.int64) @ np.array(z, dtype=np.int64) % p
        for residue in za:
            assert int(((zc + residue) % p == 0).sum()) == p ** (n - 1)


def test_acceptance_nonproportional_pairs_never_cosurvive_2d():
    """In dimension 2, two non-proportional coordinate vectors are never
    both in the kernel of a nonzero z: exhaustive, zero tolerance."""
    p = 7
    a = np.array([1, 0])
    b = np.array([2, 1])
    both = 0
    for z in product(range(p), repeat=2):
        if not any(z):
            continue
        if (np.dot(z, a) % p == 0) and (np.dot(z, b) % p == 0):
            both += 1
    assert both == 0


# ---------------------------------------------------------------------------
# 2. survival statistics at the working prime, vs exact expectations


def test_acceptance_shifted_survival_rate():
    p = 101
    n_trials = 100_000
    rng = np.random.default_rng(101)
    # (a) single-point cache: hit probability is exactly 1/p
    single = ShiftedLattice(RECT, (Fraction(1), Fraction(1, 8)))
    eng1 = CvpTrialEngine(single, Fraction(65, 64))
    assert len(eng1) == 1
    hits = eng1.count_hits(p, n_trials, Fraction(65, 64), rng)
    expect = 1.0 / p
    se = math.sqrt(expect * (1 - expect) / n_trials)
    assert abs(hits / n_trials - expect) <= 3 * se
    # (b) multi-point cache on Z^2: expectation computed exactly by
    # enumerating z (for fixed nonzero z the hit chance over c is
    # #distinct residues <z, a> / p)
    eng2 = CvpTrialEngine(Z2, Fraction(1))
    m = eng2.prefix(Fraction(1))
    acc = 0
    for z in product(range(p), repeat=2):
        if not any(z):
            continue
        residues = {(z[0] * int(ax) + z[1] * int(ay)) % p
                    for ax, ay in eng2.coord_matrix[:m]}
        acc += len(residues)
    expect2 = acc / ((p * p - 1) * p)
    hits2 = eng2.count_hits(p, n_trials, Fraction(1), rng)
    se2 = math.sqrt(expect2 * (1 - expect2) / n_trials)
    assert abs(hits2 / n_trials - expect2) <= 3 * se2


def test_acceptance_unshifted_survival_rate():
    p = 101
    n_trials = 100_000
    rng = np.random.default_rng(2)
    eng = SvpTrialEngine(Z2.basis, Fraction(1))
    # hit <=> z1 = 0 or z2 = 0 (nonzero z): probability 2/(p+1) exactly
    expect = 2.0 / (p + 1)
    hits = eng.count_hits(p, n_trials, Fraction(1), rng)
    se = math.sqrt(expect * (1 - expect) / n_trials)
    assert abs(hits / n_trials - expect) <= 3 * se


# ---------------------------------------------------------------------------
# 3. gap decisions on promise instances


def _promise_instances():
    pool = []
    for lat, radii in [
        (Z2, [Fraction(1), Fraction(2), Fraction(5), Fraction(9)]),
        (DEEP, [Fraction(37, 16), Fraction(4), Fraction(7)]),
        (OFF, [Fraction(1), Fraction(2), Fraction(4)]),
    ]:
        eng = CvpTrialEngine(lat, max(radii))
        for r_sq in radii:
            c = eng.prefix(r_sq)
            if c >= 3:
                pool.append((lat, eng, r_sq, (c - 1) // 2, True))  # C > 2N
                pool.append((lat, eng, r_sq, c, False))            # C <= N
    return pool


def test_acceptance_gap_decisions():
    """200 promise decisions at f=2: single-run error rate within the 1/e
    guarantee (+0.05 slack); majority-of-15 never wrong on 40 instances."""
    pool = _promise_instances()
    rng = np.random.default_rng(3)
    errors = 0
    total = 0
    idx = 0
    while total < 200:
        lat, eng, r_sq, n_bound, truth = pool[idx % len(pool)]
        idx += 1
        got = gap_vcp_decide(GapInstance(lat, r_sq, n_bound), 2.0, rng,
                             engine=eng, params=COUNT_FAST)
        errors += (got != truth)
        total += 1
    assert errors / total <= 1.0 / math.e + 0.05
    maj_errors = 0
    for k in range(40):
        lat, eng, r_sq, n_bound, truth = pool[k % len(pool)]
        votes = sum(
            gap_vcp_decide(GapInstance(lat, r_sq, n_bound), 2.0, rng,
                           engine=eng, params=COUNT_FAST)
            for _ in range(15))
        maj_errors += ((votes > 7) != truth)
    assert maj_errors == 0


def test_acceptance_primitive_gap_decisions():
    rng = np.random.default_rng(4)
    eng = SvpTrialEngine(Z2.basis, Fraction(9))
    errors = 0
    total = 0
    for r_sq in (Fraction(2), Fraction(5), Fraction(9)):
        xi = eng.primitive_prefix_count(r_sq)
        assert xi >= 3
        for n_bound, truth in (((xi - 1) // 2, True), (xi, False)):
            for _ in range(10):
                got = gap_pvcp_decide(Z2.basis, r_sq, n_bound, 2.0, rng,
                                      engine=eng, params=COUNT_FAST)
                errors += (got != truth)
                total += 1
    assert total == 60
    assert errors / total <= 1.0 / math.e + 0.05


# ---------------------------------------------------------------------------
# 4. shifted discrete Gaussian sampler vs exact distribution

DGS_CASES = [
    (Z2, Fraction(1, 2)), (Z2, Fraction(1)), (Z2, Fraction(5)),
    (DEEP, Fraction(1, 4)), (DEEP, Fraction(1, 2)), (DEEP, Fraction(5, 2)),
    (LAT3, Fraction(1, 2)), (LAT3, Fraction(1)), (LAT3, Fraction(5)),
]


@pytest.mark.parametrize("lat,s", DGS_CASES,
                         ids=[f"case{i}" for i in range(len(DGS_CASES))])
def test_acceptance_dgs_sampler(lat, s):
    """10^5 draws: statistical distance <= 0.10, per-point frequency ratios
    on heavy points within 1.1 (plus binomial band), no impossible
    samples, and every draw an exact lattice member."""
    rng = np.random.default_rng(hash((lat.shift, s)) % 2**32)
    f = 3
    samp = DgsCvpSampler(lat, s, f, counter="exact", params=SAMPLE_FAST)
    n = 100_000
    draws = samp.sample_batch(n, rng)
    for v in draws[:200]:
        assert lat.member(v)
    ideal = exact_dgs(lat, s, 2**-40)
    # rung discretization distorts per-point probabilities by at most
    # exp(pi/(10 f)) multiplicatively
    gamma = math.exp(math.pi / (10 * f)) * 1.01
    rep = sd_and_report(draws, ideal, gamma=gamma,
                        radius_sq=samp.radii_sq[-1] * s * s)
    assert rep.statistical_distance <= 0.10
    assert rep.impossible_keys == []
    assert rep.passed


# ---------------------------------------------------------------------------
# 5. centered discrete Gaussian sampler vs exact distribution

CDGS_CASES = [
    (Z1.basis, Fraction(1, 2)), (Z1.basis, Fraction(1)), (Z1.basis, Fraction(5)),
    (Z2.basis, Fraction(1, 2)), (Z2.basis, Fraction(1)), (Z2.basis, Fraction(5)),
    (RECT, Fraction(1, 4)), (RECT, Fraction(1, 2)), (RECT, Fraction(5, 2)),
    (B3, Fraction(1, 2)), (B3, Fraction(1)), (B3, Fraction(5)),
]


@pytest.mark.parametrize("basis,s", CDGS_CASES,
                         ids=[f"case{i}" for i in range(len(CDGS_CASES))])
def test_acceptance_cdgs_sampler(basis, s):
    """10^5 draws from the SVP-driven sampler: statistical distance <= 0.10,
    zero-probability within three standard errors (plus the schedule's
    small discretization slack) of the exact value, no impossible samples."""
    rng = np.random.default_rng(int(s * 1000) + basis.n)
    f = 3
    samp = CdgsSvpSampler(basis, s, f, counter="exact", params=SAMPLE_FAST)
    n = 100_000
    draws = samp.sample_batch(n, rng)
    lat0 = ShiftedLattice(basis, tuple([Fraction(0)] * basis.n))
    for v in draws[:200]:
        assert lat0.member(v)
    ideal = exact_dgs(lat0, s, 2**-40)
    zero = tuple([Fraction(0)] * basis.n)
    p0 = float(ideal.prob_of(zero))
    emp0 = sum(1 for v in draws if v == zero) / n
    se = math.sqrt(p0 * (1 - p0) / n)
    # allow the schedule's discretization slack exp(pi/(100 n f)) - 1 on
    # top of the Monte Carlo band
    assert abs(emp0 - p0) <= 3 * se + (math.exp(math.pi / (100 * basis.n * f)) - 1)
    gamma = math.exp(math.pi / (100 * basis.n * f)) * 1.01
    rep = sd_and_report(draws, ideal, gamma=gamma, radius_sq=None)
    assert rep.statistical_distance <= 0.10
    assert rep.passed


# ---------------------------------------------------------------------------
# 6. 1-D nonzero Gaussian building block


@pytest.mark.parametrize("s", [0.5, 1.0, 3.0])
def test_acceptance_z_nonzero_sampler(s):
    """10^6 draws: chi-square p-value >= 1e-3 against exact probabilities,
    and mean iterations per draw <= 2 (the guaranteed expectation)."""
    rng = np.random.default_rng(int(s * 10))
    n = 1_000_000
    vals, iters = sample_z_nonzero_batch(s, n, rng)
    assert (vals != 0).all()
    assert iters / n <= 2.0 + 3.0 * math.sqrt(2.0 / n)
    rho = rho_z_nonzero(s)
    kmax = 1
    while math.exp(-math.pi * (kmax + 1) ** 2 / (s * s)) / rho * n >= 5:
        kmax += 1
    counts = []
    probs = []
    for k in range(1, kmax + 1):
        pk = math.exp(-math.pi * k * k / (s * s)) / rho  # each sign
        for sign in (1, -1):
            counts.append(int((vals == sign * k).sum()))
            probs.append(pk)
    tail_p = 1.0 - sum(probs)
    tail_n = n - sum(counts)
    if tail_p * n >= 5:
        counts.append(tail_n)
        probs.append(tail_p)
    else:
        # merge the tail into the outermost bins to keep expectations >= 5
        counts[-1] += tail_n
        probs[-1] += tail_p
    expected = np.array(probs) / sum(probs) * n
    res = stats.chisquare(counts, expected)
    assert res.pvalue >= 1e-3
    # signs are a fair coin
    pos = int((vals > 0).sum())
    assert abs(pos / n - 0.5) <= 3 * math.sqrt(0.25 / n)


# ---------------------------------------------------------------------------
# 7. CVP from a Gaussian sampler


def test_acceptance_cvp_from_sampler():
    """2000 single-draw attempts at f=3 on a deep-hole instance: success
    rate at least 1/18 minus three standard errors (the weak guarantee;
    the construction does far better)."""
    rng = np.random.default_rng(7)
    truth = solve_cvp(DEEP)
    sampler = ExactDgsSampler()
    n = 2000
    succ = 0
    for _ in range(n):
        v, d = cvp_via_dgs(DEEP, 3, rng, sampler=sampler.shifted)
        assert is_lattice_member(DEEP.basis, v)
        succ += (d == truth.dist_sq)
    p_min = 1.0 / 18.0
    se = math.sqrt(p_min * (1 - p_min) / n)
    assert succ / n >= p_min - 3 * se


def test_acceptance_cvp_from_sampler_unique_instance():
    rng = np.random.default_rng(8)
    truth = solve_cvp(OFF)
    sampler = ExactDgsSampler()
    for _ in range(200):
        v, d = cvp_via_dgs(OFF, 3, rng, sampler=sampler.shifted)
        assert v == truth.vector and d == truth.dist_sq


# ---------------------------------------------------------------------------
# 8. SVP from a centered Gaussian sampler


def test_acceptance_svp_from_sampler():
    """200 runs at f=10 across four lattices: every output is a nonzero
    lattice vector within 10*sqrt(n/ln f) of lambda_1."""
    rng = np.random.default_rng(9)
    bases = [Z1.basis, Z2.basis,
             Basis([[Fraction(2), 1], [Fraction(0), 1]]),
             Basis([[Fraction(1), 0], [Fraction(0), 4]])]
    for b in bases:
        sampler = ExactDgsSampler()  # cache shared across this basis' runs
        truth = float(solve_svp(b).lambda1_sq)
        gam = svp_approx_factor(b.n, 10)
        for _ in range(50):
            v, d = svp_via_cdgs(b, 10, rng, sampler=sampler.centered)
            assert d > 0
            assert is_lattice_member(b, v)
            assert float(d) <= gam * gam * truth


# ---------------------------------------------------------------------------
# 9. tail truncation


def test_acceptance_tail_bound():
    """No sampler mass beyond the certified truncation radius, and the
    bound's hypothesis guard rejects radii that are too small."""
    rng = np.random.default_rng(10)
    s = Fraction(1)
    samp = DgsCvpSampler(Z2, s, 3, counter="exact", params=SAMPLE_FAST)
    draws = samp.sample_batch(50_000, rng)
    r_sq = truncation_radius_sq(Z2, s, 2**-10)
    beyond = sum(1 for v in draws if norm_sq(v) > r_sq)
    d0 = solve_cvp(Z2).dist_sq
    r = math.sqrt(float((r_sq - d0) / (s * s * 2)))
    bound = gaussian_tail_bound(math.sqrt(float(d0)), float(s), 2, r)
    assert beyond / len(draws) <= bound + 3 * math.sqrt(bound / len(draws)) + 1e-12
    with pytest.raises(ValueError):
        gaussian_tail_bound(0.0, 1.0, 2, 0.5)


# ---------------------------------------------------------------------------
# 10. general-norm sampling and CVP


def test_acceptance_l1_exponential_sampler():
    """10^5 draws from exp(-||y||_1) on Z^2 at f=10: statistical distance
    <= 0.10 against the exact distribution."""
    rng = np.random.default_rng(11)
    dec = chi_q_decomposition(Z2, NormBody.L1, 1, 10, params=SAMPLE_FAST)
    n = 100_000
    draws = dec.sample_batch(n, rng)
    sup, probs = exact_chi_q(Z2, NormBody.L1, 1, dec.keys[-1])
    cnt = Counter(draws)
    sd = 0.5 * sum(abs(cnt.get(v, 0) / n - p) for v, p in zip(sup, probs))
    assert sd <= 0.10
    assert all(Z2.member(y) for y in draws[:200])


def test_acceptance_cvp_k_euclidean_agreement():
    """The K-norm CVP solver restricted to the Euclidean ball equals the
    dedicated CVP oracle exactly, tie-breaks included."""
    rng = np.random.default_rng(12)
    for basis in (Z2.basis, RECT, Basis([[Fraction(2), 1], [Fraction(1), 3]])):
        for _ in range(10):
            shift = tuple(Fraction(int(rng.integers(-8, 9)), 8)
                          for _ in range(2))
            lat = ShiftedLattice(basis, shift)
            res = cvp_k(lat, NormBody.L2)
            truth = solve_cvp(lat)
            assert res.vector == truth.vector
            assert res.measure == truth.dist_sq


# ---------------------------------------------------------------------------
# 11. structural: honest oracle-driven paths, zero tolerance


def _assert_sublattice(parent: Basis, sub: Basis, p: int):
    for col in sub.columns:
        assert is_lattice_member(parent, col)
    assert abs(sub.det / parent.det) == p


def test_acceptance_honest_counting_path():
    """Literal (non-vectorized) gap decision: every oracle call is on a
    genuine index-p shifted sublattice."""
    rng = np.random.default_rng(13)
    cheap = CountingParams(vcp_prime_mult=10.0, pvcp_prime_mult=10.0,
                           pvcp_log_factor=False, ell_const=0.1,
                           per_run_error=math.exp(-1))
    calls = []

    def cvp_oracle(sl):
        calls.append(sl)
        return solve_cvp(sl)

    eng = CvpTrialEngine(OFF, Fraction(4))
    c = eng.prefix(Fraction(4))
    p_expected = cheap.vcp_prime(2.0, c)
    gap_vcp_decide(GapInstance(OFF, Fraction(4), c), 2.0, rng,
                   cvp_oracle=cvp_oracle, params=cheap)
    assert len(calls) >= 1
    for sl in calls:
        _assert_sublattice(OFF.basis, sl.basis, p_expected)
        # shift is t + w with w in L
        w = vec_sub(sl.shift, OFF.shift)
        assert is_lattice_member(OFF.basis, w)

    svp_calls = []

    def svp_oracle(b):
        svp_calls.append(b)
        return solve_svp(b)

    gap_pvcp_decide(Z2.basis, Fraction(5), 4, 2.0, rng,
                    svp_oracle=svp_oracle, params=cheap)
    # first call is the lambda_1 window check on the full lattice
    assert svp_calls[0] is Z2.basis and len(svp_calls) >= 2
    for b in svp_calls[1:]:
        _assert_sublattice(Z2.basis, b, cheap.pvcp_prime(2.0, 4))


def test_acceptance_honest_sampler_paths():
    """Oracle-driven samplers: every oracle call is on a genuine sublattice
    and every emitted sample is an exact member of the target coset."""
    rng = np.random.default_rng(14)
    cvp_calls = []

    def cvp_oracle(sl):
        cvp_calls.append(sl)
        return solve_cvp(sl)

    samp = DgsCvpSampler(Z2, 1, 3, counter="exact", oracle=cvp_oracle,
                         params=SAMPLE_FAST)
    draws = samp.sample_batch(4, rng)
    assert len(cvp_calls) >= 4
    for sl in cvp_calls:
        # sampler oracle calls pass the rescaled (width-1) lattice; the
        # index varies with the rung's point count but is always prime
        ratio = sl.basis.det / samp.scaled.basis.det
        assert ratio.denominator == 1 and is_prime(abs(int(ratio)))
        _assert_sublattice(samp.scaled.basis, sl.basis, abs(int(ratio)))
        w = vec_sub(sl.shift, samp.scaled.shift)
        assert is_lattice_member(samp.scaled.basis, w)
    for v in draws:
        assert Z2.member(v)

    svp_calls = []

    def svp_oracle(b):
        svp_calls.append(b)
        return solve_svp(b)

    csamp = CdgsSvpSampler(Z2.basis, 1, 3, counter="exact",
                           oracle=svp_oracle, params=SAMPLE_FAST)
    cdraws = csamp.sample_batch(20, rng)
    assert len(svp_calls) >= 1
    for b in svp_calls:
        ratio = b.det / csamp.scaled_basis.det
        assert ratio.denominator == 1 and is_prime(abs(int(ratio)))
        _assert_sublattice(csamp.scaled_basis, b, abs(int(ratio)))
    for v in cdraws:
        assert Z2.member(v)
