"""Toolkit for reachability of spin states under rotationally covariant channels."""

from .halfint import HalfInt, hrange, magnetic_range
from .spin_core import (
    BlockDensity,
    SpinKet,
    coherent_direction,
    coherent_state,
    exp_rotation,
    spin_matrices,
    wigner_3j,
)
from .group_poly import (
    CanonicalCoeffs,
    GroupPoly,
    canonical,
    charfun_mixed,
    charfun_pure,
    evaluate,
    poly_add,
    poly_mul,
    poly_scale,
    rep_matrix,
    rep_matrix_eval,
    rep_matrix_hypergeom,
    rotate_state,
)
from .majorana import Constellation, majorana_stars, rotate_constellation, so3_from_uv
from .u1_line import (
    InterferometerSpec,
    LaurentCoeffs,
    ProbSeq,
    coherent_charfun_coeffs,
    extraction_probability,
    phase_uncertainty,
    squeezed_target_coeffs,
    su2_coherent_line_feasible,
    u1_deterministic_feasible,
    variance_oracle,
)
from .solver_adapter import SdpProblem, SolveReport, StandardForm, export_sdpa, solve, to_standard
from .covariant_sdp import (
    KrausBlocks,
    SolverFailure,
    build_kraus_index,
    channel_output,
    deterministic_feasible,
    fidelity_sdp,
    jmax_of,
    kraus_from_blocks,
    max_fidelity,
    max_fidelity_pure_target,
    max_prob,
)

__version__ = "0.1.0"
