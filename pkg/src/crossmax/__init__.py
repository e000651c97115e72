"""Maximal-volume cross approximation: greedy maxvol, CUR reconstruction with
Chebyshev-norm error bounds, integer image compression and pivotal
least squares."""

from .cross import (
    BoundInputs,
    CrossFactors,
    bound_certificate,
    build_cross,
    chebyshev_error,
    error_bound,
    reconstruct,
    residual_entry_det_ratio,
)
from .densemat import LuFactors, lu_factor, norm, singular_values, solve
from .errors import CrossmaxError
from .maxvol import (
    IndexPair,
    MaxvolConfig,
    MaxvolReport,
    brute_force_maxvol,
    dominance_check,
    initial_submatrix,
    maxvol,
    maxvol_general,
    maxvol_rows,
    schur_scalar,
)

__version__ = "0.1.0"
