"""Desk-scale lattice discrete-Gaussian toolkit.

Exact rational lattices, brute-force CVP/SVP/counting oracles, lattice
sparsification, randomized point-counting, discrete-Gaussian samplers built
on CVP/SVP oracles (and the reverse directions), general-norm variants,
and a statistical verification harness.
"""

from .core import (
    Basis,
    BitLengthBounds,
    DimensionCapError,
    DimensionMismatchError,
    IterationLimitError,
    LatticeError,
    ShiftedLattice,
    SingularBasisError,
    bit_length_bounds,
    coords,
    identity_basis,
    is_lattice_member,
    is_primitive,
    lattice,
    rat,
    vec,
)
from .oracles import (
    BallEnumeration,
    CvpResult,
    ExactDistribution,
    SvpResult,
    enumerate_ball,
    exact_count,
    exact_dgs,
    exact_primitive_count,
    gaussian_tail_bound,
    solve_cvp,
    solve_svp,
    truncation_radius_sq,
)
from .sparsify import (
    SparsifierDraw,
    prime_in_interval,
    sample_shifted_sparsifier,
    sample_unshifted_sparsifier,
    sparsify_basis,
)
from .engine import CvpTrialEngine, SvpTrialEngine
from .counting import (
    CountEstimate,
    CountingParams,
    GapInstance,
    estimate_count,
    estimate_primitive_count,
    gap_pvcp_decide,
    gap_vcp_decide,
)
from .samplers import (
    CdgsSvpSampler,
    DgsCvpSampler,
    SamplerParams,
    cdgs_sample,
    dgs_sample,
    rho_z_nonzero,
    sample_z_nonzero,
    sample_z_nonzero_batch,
    uniform_ball_sample,
    uniform_primitive_sample,
)
from .reductions import (
    ExactDgsSampler,
    cvp_via_dgs,
    cvp_width,
    svp_approx_factor,
    svp_via_cdgs,
)
from .norms import (
    BallDecomposition,
    KBallEngine,
    KCvpResult,
    NormBody,
    chi_q_decomposition,
    cvp_k,
    exact_chi_q,
    gap_vcp_k,
    lsp_chi_q_sample,
    uniform_k_ball_sample,
)
from .verify import (
    ClosenessReport,
    EmpiricalHistogram,
    closeness_check,
    collect,
)

__version__ = "0.1.0"
