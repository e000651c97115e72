"""Greedy maximal-volume submatrix selection.

One engine covers the whole family:

* ``mode="rows"``, ``h=1``  classic maxvol on a tall ``n x r`` matrix
* ``mode="rows"``, ``h>1``  h-greedy maxvol (extra row swaps per solve)
* ``mode="2d"``             one swap per sweep, chosen over both B and C
* ``mode="alternating"``    row phase then column phase, each h-greedy

Each phase forms its coefficient matrix from scratch with one linear solve
(``B = M[:, J] A^-1`` or ``C = A^-1 M[I, :]``); ``solve_count`` counts
these.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .densemat import LuFactors, as_matrix, lu_factor, solve
from .errors import RankDeficient, SingularMatrix, TooLarge

Mode = Literal["rows", "2d", "alternating"]
MODES = ("rows", "2d", "alternating")
INITS = ("lu", "random")
GREEDY_STOPS = ("reject", "accept")

RANDOM_INIT_TRIES = 50
BRUTE_FORCE_LIMIT = 10**6


@dataclass(frozen=True)
class MaxvolConfig:
    """Knobs for a maxvol run.

    `greedy_stop` decides when the extra-swap scan of one phase ends:
    ``"reject"`` stops at the first candidate that would not grow the block
    determinant (so up to `h` swaps are accepted), ``"accept"`` stops after
    the first accepted extra swap (at most two swaps per phase).
    `rel_vol_tol`, when set, also stops once a sweep grows the volume by a
    relative amount below it.
    """

    epsilon: float = 1e-2
    h: int = 1
    max_sweeps: int = 200
    init: Literal["lu", "random"] = "lu"
    seed: int | None = None
    mode: Mode = "alternating"
    rel_vol_tol: float | None = None
    greedy_stop: Literal["reject", "accept"] = "reject"

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.h < 1:
            raise ValueError("h must be at least 1")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be at least 1")
        if self.init not in INITS:
            raise ValueError(f"init must be one of {INITS}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.greedy_stop not in GREEDY_STOPS:
            raise ValueError(f"greedy_stop must be one of {GREEDY_STOPS}")
        if self.rel_vol_tol is not None and not self.rel_vol_tol > 0:
            raise ValueError("rel_vol_tol must be positive")


@dataclass(frozen=True)
class IndexPair:
    """Row and column index sets of an ``r x r`` submatrix, sorted."""

    I: tuple[int, ...]
    J: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "I", tuple(int(i) for i in self.I))
        object.__setattr__(self, "J", tuple(int(j) for j in self.J))
        if len(self.I) != len(self.J):
            raise ValueError("I and J must have the same length")
        for name, idx in (("I", self.I), ("J", self.J)):
            if any(a >= b for a, b in zip(idx, idx[1:])):
                raise ValueError(f"{name} must be strictly increasing")
            if idx and idx[0] < 0:
                raise ValueError(f"{name} contains a negative index")

    @classmethod
    def from_unsorted(cls, rows: Sequence[int], cols: Sequence[int]) -> "IndexPair":
        return cls(tuple(sorted(int(i) for i in rows)), tuple(sorted(int(j) for j in cols)))

    @property
    def rank(self) -> int:
        return len(self.I)

    def check_bounds(self, shape: tuple[int, int]) -> None:
        n, m = shape
        if self.I and self.I[-1] >= n:
            raise IndexError(f"row index {self.I[-1]} out of range for {n} rows")
        if self.J and self.J[-1] >= m:
            raise IndexError(f"column index {self.J[-1]} out of range for {m} columns")

    def block(self, a: np.ndarray) -> np.ndarray:
        return a[np.ix_(self.I, self.J)]


@dataclass(frozen=True)
class SwapBatch:
    """Swaps accepted in one phase.

    `swaps` holds ``(source, position)``: the row (or column) of M moved into
    the given position of the current submatrix. `log_growth` is the
    predicted ``log|det A_new| - log|det A_old|``.
    """

    axis: Literal["row", "col"]
    swaps: tuple[tuple[int, int], ...]
    log_growth: float


@dataclass
class MaxvolReport:
    indices: IndexPair
    sweeps: int = 0
    row_swaps: int = 0
    col_swaps: int = 0
    solve_count: int = 0
    log_vol_trace: list[float] = field(default_factory=list)
    converged: bool = False
    final_max_modulus: float = math.inf
    stop_reason: str = ""
    history: list[SwapBatch] = field(default_factory=list)

    @property
    def log_volume(self) -> float:
        return self.log_vol_trace[-1]


@dataclass(frozen=True)
class DominanceResult:
    is_dominant: bool
    max_modulus: float
    witness: tuple[str, int, int]


# ---------------------------------------------------------------------------
# helpers


def schur_scalar(bk, x, y, b: float) -> float:
    """Return ``b - y @ inv(Bk) @ x``.

    This is the factor by which bordering `Bk` with column `x`, row `y` and
    corner `b` multiplies its determinant.
    """
    bk = np.atleast_2d(np.asarray(bk, dtype=np.float64))
    if bk.size == 0:
        return float(b)
    f = lu_factor(bk)
    if f.singular:
        raise SingularMatrix("bordered block is singular")
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    return float(b - y @ solve(f, x))


def _argmax_abs(a: np.ndarray) -> tuple[int, int, float]:
    # np.argmax returns the first maximum in row-major order: smallest row,
    # then smallest column
    flat = int(np.argmax(np.abs(a)))
    i, j = divmod(flat, a.shape[1])
    return i, j, float(a[i, j])


def _factor(m: np.ndarray, rows: list[int], cols: list[int]) -> LuFactors:
    f = lu_factor(m[np.ix_(rows, cols)])
    if f.singular:
        raise SingularMatrix("current submatrix became numerically singular")
    return f


def _row_coefficients(m: np.ndarray, cols: list[int], f: LuFactors) -> np.ndarray:
    """``M[:, J] @ inv(A)`` via ``A^T X = M[:, J]^T``."""
    return solve(f, m[:, cols].T, transpose=True).T


def _col_coefficients(m: np.ndarray, rows: list[int], f: LuFactors) -> np.ndarray:
    """``inv(A) @ M[I, :]``."""
    return solve(f, m[rows, :])


def _greedy_batch(b: np.ndarray, epsilon: float, h: int, stop: str) -> tuple[list[tuple[int, int]], float, float]:
    """Pick up to `h` swaps from coefficient matrix `b` (sources x positions).

    Returns ``(swaps, first_modulus, log_growth)``. No swaps are returned
    when the largest modulus is within ``1 + epsilon``.
    """
    i1, j1, b1 = _argmax_abs(b)
    first = abs(b1)
    if first <= 1.0 + epsilon:
        return [], first, 0.0
    rows, cols = [i1], [j1]
    log_growth = math.log(first)
    if h == 1:
        return [(i1, j1)], first, log_growth
    masked = np.abs(b)
    masked[i1, :] = -1.0
    masked[:, j1] = -1.0
    for _ in range(2, h + 1):
        flat = int(np.argmax(masked))
        ik, jk = divmod(flat, b.shape[1])
        if masked[ik, jk] < 0.0:
            break
        s = schur_scalar(b[np.ix_(rows, cols)], b[rows, jk], b[ik, cols], b[ik, jk])
        if abs(s) > 1.0:
            rows.append(ik)
            cols.append(jk)
            log_growth += math.log(abs(s))
            masked[ik, :] = -1.0
            masked[:, jk] = -1.0
            if stop == "accept":
                break
        else:
            if stop == "reject":
                break
            masked[ik, :] = -1.0
    return list(zip(rows, cols)), first, log_growth


# ---------------------------------------------------------------------------
# initialisation


def _pivot_rows(m: np.ndarray, r: int) -> list[int]:
    """Row pivots of partial-pivoted elimination, skipping dependent columns."""
    work = np.array(m, dtype=np.float64, copy=True)
    scale = np.max(np.abs(work)) if work.size else 0.0
    thr = 1e-12 * scale
    rows: list[int] = []
    if scale == 0.0:
        return rows
    for k in range(work.shape[1]):
        if len(rows) == r:
            break
        col = np.abs(work[:, k])
        p = int(np.argmax(col))
        if col[p] <= thr:
            continue
        rows.append(p)
        work -= np.outer(work[:, k] / work[p, k], work[p, :])
    return rows


def numerical_rank(m) -> int:
    """Number of pivots found by partial-pivoted elimination."""
    m = as_matrix(m)
    return len(_pivot_rows(m, min(m.shape)))


def initial_submatrix(
    m,
    r: int,
    strategy: Literal["lu", "random"] = "lu",
    seed: int | None = None,
    rows_only: bool = False,
) -> IndexPair:
    """Choose a starting ``r x r`` submatrix with nonzero determinant.

    ``"lu"`` takes the row pivots of elimination on `m`, then the column
    pivots of elimination on ``m[I, :].T``. ``"random"`` draws sorted index
    sets from ``numpy.random.default_rng(seed)`` until one is nonsingular
    (at most 50 draws). With `rows_only`, J is every column.
    """
    m = as_matrix(m)
    n, cols = m.shape
    if not 1 <= r <= min(n, cols):
        raise ValueError(f"rank {r} out of range for a {n}x{cols} matrix")
    if rows_only and r != cols:
        raise ValueError("rows_only selection needs r equal to the column count")
    if strategy == "lu":
        rows = _pivot_rows(m, r)
        if len(rows) < r:
            raise RankDeficient(f"matrix has numerical rank {len(rows)} < {r}")
        if rows_only:
            return IndexPair.from_unsorted(rows, range(cols))
        picked = _pivot_rows(m[sorted(rows), :].T, r)
        if len(picked) < r:
            raise RankDeficient("selected rows do not span rank r")
        return IndexPair.from_unsorted(rows, picked)
    if strategy == "random":
        rng = np.random.default_rng(seed)
        for _ in range(RANDOM_INIT_TRIES):
            rows = rng.choice(n, size=r, replace=False)
            picked = np.arange(cols) if rows_only else rng.choice(cols, size=r, replace=False)
            pair = IndexPair.from_unsorted(rows, picked)
            if not lu_factor(pair.block(m)).singular:
                return pair
        raise RankDeficient(f"no nonsingular {r}x{r} submatrix in {RANDOM_INIT_TRIES} random draws")
    raise ValueError(f"unknown init strategy {strategy!r}")


# ---------------------------------------------------------------------------
# algorithms


def maxvol_rows(m, start: IndexPair | Sequence[int], cfg: MaxvolConfig | None = None) -> MaxvolReport:
    """Find a close-to-dominant ``r x r`` row subset of a tall ``n x r`` matrix.

    `start` is either an :class:`IndexPair` whose J covers all columns or the
    starting row indices alone.
    """
    m = as_matrix(m)
    cfg = cfg or MaxvolConfig(mode="rows")
    if not isinstance(start, IndexPair):
        start = IndexPair.from_unsorted(start, range(m.shape[1]))
    if start.J != tuple(range(m.shape[1])):
        raise ValueError("maxvol_rows needs J to be every column of a tall matrix")
    return _run(m, start, cfg, "rows")


def maxvol_general(m, start: IndexPair, cfg: MaxvolConfig | None = None) -> MaxvolReport:
    """Find a close-to-dominant ``r x r`` submatrix of a general matrix.

    ``cfg.mode`` selects simultaneous (``"2d"``) or alternating row/column
    sweeps; ``"rows"`` is accepted and leaves J fixed.
    """
    m = as_matrix(m)
    cfg = cfg or MaxvolConfig()
    return _run(m, start, cfg, cfg.mode)


def maxvol(m, r: int, cfg: MaxvolConfig | None = None) -> MaxvolReport:
    """Initialise per ``cfg.init`` and run the configured mode."""
    m = as_matrix(m)
    cfg = cfg or MaxvolConfig()
    rows_only = cfg.mode == "rows"
    if rows_only and r != m.shape[1]:
        raise ValueError("mode 'rows' needs r equal to the column count")
    start = initial_submatrix(m, r, cfg.init, cfg.seed, rows_only=rows_only)
    return _run(m, start, cfg, cfg.mode)


def _run(m: np.ndarray, start: IndexPair, cfg: MaxvolConfig, mode: str) -> MaxvolReport:
    start.check_bounds(m.shape)
    n, cols_total = m.shape
    r = start.rank
    if r == 0:
        raise ValueError("empty index pair")
    rows = list(start.I)
    cols = list(start.J)
    f = _factor(m, rows, cols)
    report = MaxvolReport(indices=start, log_vol_trace=[f.log_abs_det])

    if r == n == cols_total:
        report.converged = True
        report.final_max_modulus = 1.0
        report.stop_reason = "full"
        return report

    eps = cfg.epsilon
    h = min(cfg.h, r)
    last_max = math.inf

    def apply(axis: str, swaps: list[tuple[int, int]], growth: float) -> None:
        nonlocal f
        target = rows if axis == "row" else cols
        for source, pos in swaps:
            target[pos] = source
        f = _factor(m, rows, cols)
        report.log_vol_trace.append(f.log_abs_det)
        report.history.append(SwapBatch(axis, tuple(swaps), growth))
        if axis == "row":
            report.row_swaps += len(swaps)
        else:
            report.col_swaps += len(swaps)

    for sweep in range(cfg.max_sweeps):
        report.sweeps = sweep + 1
        vol_before = f.log_abs_det
        if mode == "rows":
            b = _row_coefficients(m, cols, f)
            report.solve_count += 1
            swaps, first, growth = _greedy_batch(b, eps, h, cfg.greedy_stop)
            last_max = first
            if not swaps:
                report.converged = True
                break
            apply("row", swaps, growth)
        elif mode == "2d":
            b = _row_coefficients(m, cols, f)
            c = _col_coefficients(m, rows, f)
            report.solve_count += 2
            bi, bj, bv = _argmax_abs(b)
            ci, cj, cv = _argmax_abs(c)
            last_max = max(abs(bv), abs(cv))
            if last_max <= 1.0 + eps:
                report.converged = True
                break
            if abs(bv) >= abs(cv):
                apply("row", [(bi, bj)], math.log(abs(bv)))
            else:
                apply("col", [(cj, ci)], math.log(abs(cv)))
        else:
            b = _row_coefficients(m, cols, f)
            report.solve_count += 1
            row_swaps, b_first, growth = _greedy_batch(b, eps, h, cfg.greedy_stop)
            if row_swaps:
                apply("row", row_swaps, growth)
            c = _col_coefficients(m, rows, f)
            report.solve_count += 1
            col_swaps, c_first, growth = _greedy_batch(c.T, eps, h, cfg.greedy_stop)
            if col_swaps:
                apply("col", col_swaps, growth)
            last_max = max(b_first, c_first)
            if not row_swaps and not col_swaps:
                report.converged = True
                break
        if cfg.rel_vol_tol is not None and math.expm1(f.log_abs_det - vol_before) < cfg.rel_vol_tol:
            report.stop_reason = "rel_vol_tol"
            break

    report.indices = IndexPair.from_unsorted(rows, cols)
    if report.converged:
        report.stop_reason = "dominant"
        report.final_max_modulus = last_max
    else:
        report.stop_reason = report.stop_reason or "max_sweeps"
        check = dominance_check(m, report.indices, eps)
        report.final_max_modulus = check.max_modulus
    return report


# ---------------------------------------------------------------------------
# verification


def dominance_check(m, pair: IndexPair, epsilon: float = 0.0) -> DominanceResult:
    """Largest modulus over ``M[:, J] inv(A)`` and ``inv(A) M[I, :]``.

    The witness is ``("row", i, p)`` for an entry of the former (row i of M
    against position p of J) or ``("col", p, j)`` for the latter.
    """
    m = as_matrix(m)
    pair.check_bounds(m.shape)
    rows, cols = list(pair.I), list(pair.J)
    f = _factor(m, rows, cols)
    b = _row_coefficients(m, cols, f)
    c = _col_coefficients(m, rows, f)
    bi, bj, bv = _argmax_abs(b)
    ci, cj, cv = _argmax_abs(c)
    if abs(bv) >= abs(cv):
        mod, witness = abs(bv), ("row", bi, bj)
    else:
        mod, witness = abs(cv), ("col", ci, cj)
    return DominanceResult(mod <= 1.0 + epsilon, mod, witness)


def brute_force_maxvol(m, r: int) -> tuple[IndexPair, float]:
    """Exhaustive maximiser of ``log|det M[I, J]|`` over all r x r submatrices.

    Determinants come from ``numpy.linalg.slogdet`` so this oracle shares no
    code with the greedy path. Ties keep the lexicographically first pair.
    """
    m = as_matrix(m)
    n, cols = m.shape
    if not 1 <= r <= min(n, cols):
        raise ValueError(f"rank {r} out of range for a {n}x{cols} matrix")
    count = math.comb(n, r) * math.comb(cols, r)
    if count > BRUTE_FORCE_LIMIT:
        raise TooLarge(f"{count} candidate submatrices exceeds {BRUTE_FORCE_LIMIT}")
    col_sets = np.array(list(itertools.combinations(range(cols), r)), dtype=np.intp)
    best = -math.inf
    best_pair = None
    for row_set in itertools.combinations(range(n), r):
        sub = m[np.array(row_set)][:, col_sets]  # r x nJ x r
        blocks = np.transpose(sub, (1, 0, 2))
        _, logdets = np.linalg.slogdet(blocks)
        k = int(np.argmax(logdets))
        if best_pair is None or logdets[k] > best:
            best = float(logdets[k])
            best_pair = (row_set, tuple(col_sets[k]))
    return IndexPair(best_pair[0], best_pair[1]), best
