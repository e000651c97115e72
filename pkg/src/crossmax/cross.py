"""Cross (skeleton) approximation ``A[:, J] inv(A[I, J]) A[I, :]`` and its
Chebyshev-norm error bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .densemat import LuFactors, as_matrix, lu_factor, singular_values, solve
from .errors import InvalidNu, InvalidRank, SingularMatrix, TooLarge
from .maxvol import IndexPair, brute_force_maxvol

BoundVariant = Literal["classic", "improved", "nu_dominant"]


@dataclass(frozen=True)
class CrossFactors:
    """Panels of a cross approximation; the full product is never stored."""

    indices: IndexPair
    col_panel: np.ndarray  # A[:, J]
    row_panel: np.ndarray  # A[I, :]
    core: LuFactors  # of A[I, J]
    source_shape: tuple[int, int]

    @property
    def rank(self) -> int:
        return self.indices.rank

    def core_block(self) -> np.ndarray:
        return self.row_panel[:, list(self.indices.J)]


@dataclass(frozen=True)
class BoundInputs:
    sigma: np.ndarray
    r: int
    nu: float = 1.0

    def __post_init__(self):
        sigma = np.asarray(self.sigma, dtype=np.float64)
        object.__setattr__(self, "sigma", sigma)
        if np.any(sigma < 0) or np.any(np.diff(sigma) > 0):
            raise ValueError("sigma must be nonnegative and descending")
        if not 1 <= self.r < sigma.size:
            raise InvalidRank(f"rank {self.r} needs at least {self.r + 1} singular values")
        if not 0.0 < self.nu <= 1.0:
            raise InvalidNu(f"nu must lie in (0, 1], got {self.nu}")


def build_cross(a, pair: IndexPair) -> CrossFactors:
    a = as_matrix(a)
    pair.check_bounds(a.shape)
    rows, cols = list(pair.I), list(pair.J)
    core = lu_factor(a[np.ix_(rows, cols)])
    if core.singular:
        raise SingularMatrix("A[I, J] is singular")
    return CrossFactors(pair, a[:, cols].copy(), a[rows, :].copy(), core, a.shape)


def reconstruct(f: CrossFactors) -> np.ndarray:
    return f.col_panel @ solve(f.core, f.row_panel)


def residual_entry_det_ratio(a, pair: IndexPair, i: int, j: int) -> float:
    """Entry (i, j) of ``A - A_r`` from the bordered-determinant ratio.

    ``det([[A_IJ, A_Ij], [A_iJ, A_ij]]) / det(A_IJ)`` is evaluated in Schur
    form ``A_ij - A_iJ inv(A_IJ) A_Ij``.
    """
    a = as_matrix(a)
    rows, cols = list(pair.I), list(pair.J)
    core = lu_factor(a[np.ix_(rows, cols)])
    if core.singular:
        raise SingularMatrix("A[I, J] is singular")
    return float(a[i, j] - a[i, cols] @ solve(core, a[rows, j]))


def chebyshev_error(a, f: CrossFactors) -> tuple[float, tuple[int, int]]:
    """``max |A - A_r|`` and the first entry attaining it."""
    a = as_matrix(a)
    e = np.abs(a - reconstruct(f))
    flat = int(np.argmax(e))
    i, j = divmod(flat, e.shape[1])
    return float(e[i, j]), (i, j)


def error_bound(b: BoundInputs, variant: BoundVariant = "improved") -> float:
    """Chebyshev-norm bound on ``A - A_r``.

    * ``classic``: ``(r+1) s_{r+1}``
    * ``improved``: ``(r+1) s_{r+1} / sqrt(1 + sum_k (s_{r+1}/s_k)^2)``
    * ``nu_dominant``: improved divided by ``nu``
    """
    r = b.r
    tail = float(b.sigma[r])
    classic = (r + 1) * tail
    if variant == "classic":
        return classic
    if tail == 0.0:
        return 0.0
    head = b.sigma[:r]
    assert np.all(head > 0), "descending sigma with a positive tail cannot have zeros ahead of it"
    improved = classic / math.sqrt(1.0 + float(np.sum((tail / head) ** 2)))
    if variant == "improved":
        return improved
    if variant == "nu_dominant":
        return improved / b.nu
    raise ValueError(f"unknown bound variant {variant!r}")


@dataclass(frozen=True)
class BoundCertificate:
    rank: int
    error: float
    argmax: tuple[int, int]
    classic: float
    improved: float
    nu_dominant: float
    nu: float
    nu_source: Literal["given", "oracle", "floor"]
    slack: float  # nu_dominant - error

    @property
    def holds(self) -> bool:
        return self.slack >= 0.0


def measured_nu(a, pair: IndexPair) -> float:
    """``|det A[I, J]| / |det A_max|`` with the maximum found by exhaustive search."""
    a = as_matrix(a)
    _, best = brute_force_maxvol(a, pair.rank)
    logvol = lu_factor(pair.block(a)).log_abs_det
    return min(1.0, math.exp(logvol - best))


def bound_certificate(a, f: CrossFactors, nu: float | None = None) -> BoundCertificate:
    """Compare the actual error with the classic, improved and nu bounds.

    Without an explicit `nu` the exhaustive oracle measures it when the
    search is small enough; otherwise the dominant-submatrix floor
    ``r^(-r/2)`` is used.
    """
    a = as_matrix(a)
    r = f.rank
    err, where = chebyshev_error(a, f)
    source = "given"
    if nu is None:
        try:
            nu = measured_nu(a, f.indices)
            source = "oracle"
        except TooLarge:
            nu = float(r) ** (-r / 2.0)
            source = "floor"
    sigma = singular_values(a)
    if r >= sigma.size:
        # full rank selection: the cross approximation is exact
        classic = improved = nu_bound = 0.0
    else:
        inputs = BoundInputs(sigma, r, nu)
        classic = error_bound(inputs, "classic")
        improved = error_bound(inputs, "improved")
        nu_bound = error_bound(inputs, "nu_dominant")
    return BoundCertificate(r, err, where, classic, improved, nu_bound, nu, source, nu_bound - err)
