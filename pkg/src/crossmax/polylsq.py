"""Bivariate polynomial least squares, on the full sample grid or on the
pivotal rows picked by maxvol."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Literal

import numpy as np
from scipy.linalg import solve_triangular

from .cross import BoundInputs, error_bound
from .densemat import as_matrix, lu_factor, singular_values, solve
from .errors import NotDominant, RankDeficient, UnknownFunction, ZeroNorm
from .maxvol import IndexPair, MaxvolConfig, dominance_check, initial_submatrix, maxvol_rows

Func2D = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Basis2D:
    """Monomials ``x^p y^q`` with ``p + q <= degree`` in graded-lex order:
    1, x, y, x^2, xy, y^2, ..."""

    degree: int

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("degree must be nonnegative")

    @cached_property
    def terms(self) -> tuple[tuple[int, int], ...]:
        return tuple((t - q, q) for t in range(self.degree + 1) for q in range(t + 1))

    @property
    def size(self) -> int:
        return (self.degree + 1) * (self.degree + 2) // 2

    def coefficient_grid(self, coeffs) -> np.ndarray:
        """Coefficients as a ``(d+1) x (d+1)`` array indexed ``[p, q]``."""
        c = np.zeros((self.degree + 1, self.degree + 1))
        for (p, q), v in zip(self.terms, coeffs):
            c[p, q] = v
        return c


@dataclass(frozen=True)
class SampleGrid:
    """Uniform ``k x k`` tensor grid on ``[-1, 1]^2`` including the corners.

    Points are ordered with x varying slowest.
    """

    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("grid needs at least one point per axis")

    @property
    def axis(self) -> np.ndarray:
        if self.k == 1:
            return np.zeros(1)
        return np.linspace(-1.0, 1.0, self.k)

    @property
    def points(self) -> np.ndarray:
        x, y = np.meshgrid(self.axis, self.axis, indexing="ij")
        return np.column_stack([x.ravel(), y.ravel()])

    def __len__(self) -> int:
        return self.k * self.k


@dataclass
class FitReport:
    coefficients: np.ndarray
    method: Literal["full", "pivotal"]
    pivotal_rows: list[int] = field(default_factory=list)
    rel_error: float | None = None
    bound_terms: dict | None = None


# ---------------------------------------------------------------------------
# test functions


def _franke(x, y):
    # standard formula evaluated directly on [-1, 1]^2, not remapped from [0, 1]^2
    u = 9.0 * x
    v = 9.0 * y
    return (
        0.75 * np.exp(-((u - 2) ** 2 + (v - 2) ** 2) / 4)
        + 0.75 * np.exp(-((u + 1) ** 2) / 49 - (v + 1) / 10)
        + 0.5 * np.exp(-((u - 7) ** 2 + (v - 3) ** 2) / 4)
        - 0.2 * np.exp(-((u - 4) ** 2) - (v - 7) ** 2)
    )


def _ackley(x, y):
    return (
        -20.0 * np.exp(-0.2 * np.sqrt(0.5 * (x * x + y * y)))
        - np.exp(0.5 * (np.cos(2 * np.pi * x) + np.cos(2 * np.pi * y)))
        + math.e
        + 20.0
    )


def _rastrigin(x, y):
    return 20.0 + x * x + y * y - 10.0 * (np.cos(2 * np.pi * x) + np.cos(2 * np.pi * y))


def _wavy(x, y):
    return 1.0 - 0.5 * (np.cos(10 * x) * np.exp(-x * x / 2) + np.cos(10 * y) * np.exp(-y * y / 2))


FUNCTIONS: dict[str, Func2D] = {
    "exp_r2": lambda x, y: np.exp(x * x + y * y),
    "sin_r2": lambda x, y: np.sin(x * x + y * y),
    "cos_r2": lambda x, y: np.cos(x * x + y * y),
    "log_r2": lambda x, y: np.log1p(x * x + y * y),
    "rational": lambda x, y: (1 + x**4 + y**4) / (1 + x * x + y * y),
    "franke": _franke,
    "ackley": _ackley,
    "rastrigin": _rastrigin,
    "wavy": _wavy,
}


def test_function(name: str) -> Func2D:
    try:
        return FUNCTIONS[name]
    except KeyError:
        raise UnknownFunction(f"unknown function {name!r}; known: {', '.join(FUNCTIONS)}") from None


test_function.__test__ = False  # not a pytest test


# ---------------------------------------------------------------------------
# fitting


def design_matrix(basis: Basis2D, points) -> np.ndarray:
    """Rows are sample points, columns basis terms: ``x^p * y^q``."""
    if isinstance(points, SampleGrid):
        points = points.points
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if pts.shape[0] == 0:
        raise ValueError("empty sample set")
    d = basis.degree
    xp = pts[:, 0:1] ** np.arange(d + 1)
    yp = pts[:, 1:2] ** np.arange(d + 1)
    return np.column_stack([xp[:, p] * yp[:, q] for p, q in basis.terms])


def full_fit(a, b) -> FitReport:
    """Least squares by Householder QR (never the normal equations)."""
    a = as_matrix(a)
    b = np.asarray(b, dtype=np.float64).ravel()
    n, m = a.shape
    if n < m:
        raise RankDeficient(f"{n} samples cannot determine {m} coefficients")
    q, r = np.linalg.qr(a, mode="reduced")
    diag = np.abs(np.diag(r))
    if diag.min() <= 1e-13 * diag.max():
        raise RankDeficient("design matrix is numerically rank deficient")
    coeffs = solve_triangular(r, q.T @ b)
    return FitReport(coeffs, "full")


def pivotal_fit(a, b, cfg: MaxvolConfig | None = None) -> FitReport:
    """Fit through the maxvol-selected rows only.

    All columns are kept, so the square system ``A[I, :] x = b[I]`` is
    solved exactly.
    """
    a = as_matrix(a)
    b = np.asarray(b, dtype=np.float64).ravel()
    n, m = a.shape
    cfg = cfg or MaxvolConfig(mode="rows")
    if cfg.mode != "rows":
        cfg = MaxvolConfig(**{**cfg.__dict__, "mode": "rows"})
    start = initial_submatrix(a, m, cfg.init, cfg.seed, rows_only=True)
    report = maxvol_rows(a, start, cfg)
    rows = list(report.indices.I)
    f = lu_factor(a[rows, :])
    coeffs = solve(f, b[rows])
    return FitReport(coeffs, "pivotal", rows)


def evaluate(basis: Basis2D, coeffs, grid: SampleGrid) -> np.ndarray:
    """Polynomial values on a tensor grid as a ``k x k`` array ``[ix, iy]``."""
    v = grid.axis[:, None] ** np.arange(basis.degree + 1)
    return v @ basis.coefficient_grid(coeffs) @ v.T


def sample(f: Func2D, grid: SampleGrid) -> np.ndarray:
    x, y = np.meshgrid(grid.axis, grid.axis, indexing="ij")
    return f(x, y)


def relative_error(f: Func2D, coeffs, basis: Basis2D, grid: SampleGrid) -> float:
    """Discrete l2 error ``||f - p|| / ||f||`` over the grid samples."""
    exact = sample(f, grid)
    denom = float(np.linalg.norm(exact))
    if denom == 0.0:
        raise ZeroNorm("function vanishes on the evaluation grid")
    return float(np.linalg.norm(exact - evaluate(basis, coeffs, grid))) / denom


def theorem8_bound(a, pair: IndexPair, x_b, b, r: int | None = None,
                   epsilon: float = 1e-2) -> tuple[float, float, dict]:
    """Sup-norm residual of the pivotal solve against its a-priori bound.

    ``x_hat`` solves ``A[I, J] x_J = b_I`` with zeros off J. The bound is
    ``rho * ||e_I||_1 + bound_r * ||x_b||_1 + ||e_Ic||_inf`` where
    ``e = A x_b - b`` and ``rho = max(1, max|A[Ic, J] inv(A[I, J])|)``
    (exactly 1 for a maximal-volume pair). ``bound_r`` is the improved
    cross bound, and is zero when ``r`` equals the column count.

    Returns ``(bound, lhs, terms)``.
    """
    a = as_matrix(a)
    n, m = a.shape
    x_b = np.asarray(x_b, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    r = pair.rank if r is None else r
    check = dominance_check(a, pair, epsilon)
    if not check.is_dominant:
        raise NotDominant(f"selection is not {1 + epsilon}-dominant (max modulus {check.max_modulus:.4g})")
    rows, cols = list(pair.I), list(pair.J)
    in_i = np.zeros(n, dtype=bool)
    in_i[rows] = True
    f = lu_factor(a[np.ix_(rows, cols)])
    x_hat = np.zeros(m)
    x_hat[cols] = solve(f, b[rows])
    lhs = float(np.max(np.abs(a @ x_hat - b)))

    resid = a @ x_b - b
    coupling = a[np.ix_(~in_i, cols)]
    rho = 1.0
    if coupling.size:
        rho = max(1.0, float(np.max(np.abs(solve(f, coupling.T, transpose=True)))))
    if r >= min(n, m):
        cross_term = 0.0
    else:
        cross_term = error_bound(BoundInputs(singular_values(a), r), "improved")
    terms = {
        "eps_I_l1": float(np.sum(np.abs(resid[in_i]))),
        "coupling": rho,
        "cross_term": cross_term * float(np.sum(np.abs(x_b))),
        "eps_Ic_inf": float(np.max(np.abs(resid[~in_i]))) if np.any(~in_i) else 0.0,
    }
    bound = rho * terms["eps_I_l1"] + terms["cross_term"] + terms["eps_Ic_inf"]
    return bound, lhs, terms


# ---------------------------------------------------------------------------
# end to end


@dataclass
class FitComparison:
    function: str
    degree: int
    full: FitReport
    pivotal: FitReport | None


def fit_function(name: str, degree: int = 10, grid: int = 51, eval_grid: int = 501,
                 pivotal: bool = True, cfg: MaxvolConfig | None = None) -> FitComparison:
    """Fit a registry function on a ``grid^2`` sample and score on ``eval_grid^2``."""
    f = test_function(name)
    basis = Basis2D(degree)
    samples = SampleGrid(grid)
    evals = SampleGrid(eval_grid)
    a = design_matrix(basis, samples)
    b = sample(f, samples).ravel()

    full = full_fit(a, b)
    full.rel_error = relative_error(f, full.coefficients, basis, evals)
    piv = None
    if pivotal:
        cfg = cfg or MaxvolConfig(mode="rows")
        piv = pivotal_fit(a, b, cfg)
        piv.rel_error = relative_error(f, piv.coefficients, basis, evals)
        pair = IndexPair(tuple(piv.pivotal_rows), tuple(range(basis.size)))
        bound, lhs, terms = theorem8_bound(a, pair, full.coefficients, b, epsilon=cfg.epsilon)
        piv.bound_terms = {**terms, "bound": bound, "lhs": lhs}
    return FitComparison(name, degree, full, piv)
