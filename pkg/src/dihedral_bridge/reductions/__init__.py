"""Reductions between LWE and extrapolated dihedral coset problems, and between coset-state variants."""
from .base import ReductionOutcome, collect, retry
from .edcp_to_lwe import dedcp_to_dlwe, edcp_to_lwe_sample, raw_noise_width
from .grid import GridSpec, claim1_rate, claim2_violations, grid_cells, grid_fn
from .lwe_to_edcp import (
    ball_bound,
    ball_intersection_ratio,
    coset_structure,
    cube_bound,
    dlwe_to_dedcp,
    joint_superposition,
    lwe_to_edcp_ball,
    lwe_to_edcp_cube,
)
from .variants import (
    dcp_secret_candidates,
    edcp_self_reduce,
    g_to_u,
    gedcp_to_dcp,
    narrow_accept_bound,
    u_to_g,
)

__all__ = [
    "GridSpec",
    "ReductionOutcome",
    "ball_bound",
    "ball_intersection_ratio",
    "claim1_rate",
    "claim2_violations",
    "collect",
    "coset_structure",
    "cube_bound",
    "dcp_secret_candidates",
    "dedcp_to_dlwe",
    "dlwe_to_dedcp",
    "edcp_self_reduce",
    "edcp_to_lwe_sample",
    "g_to_u",
    "gedcp_to_dcp",
    "grid_cells",
    "grid_fn",
    "joint_superposition",
    "lwe_to_edcp_ball",
    "lwe_to_edcp_cube",
    "narrow_accept_bound",
    "raw_noise_width",
    "retry",
    "u_to_g",
]
