"""Dense linear-algebra kernel.

Matrices are plain ``float64`` numpy arrays; :func:`as_matrix` is the single
validation gate. Determinants are carried as ``(sign, log|det|)`` so volume
comparisons never overflow.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DimensionMismatch, NoConvergence, SingularMatrix

PIVOT_RTOL = 1e-12
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 60


def as_matrix(a, copy: bool = False) -> np.ndarray:
    """Return `a` as a finite 2-D float64 array.

    1-D input is treated as a column vector.
    """
    m = np.array(a, dtype=np.float64, copy=copy or None)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got {m.ndim} dimensions")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


@dataclass(frozen=True)
class LuFactors:
    """Partial-pivoted LU of a square matrix, ``A[perm] = L @ U``.

    `lu` packs the unit lower triangle L (below the diagonal) and U.
    A singular input is represented by ``det_sign == 0`` and
    ``log_abs_det == -inf`` rather than by an exception.
    """

    lu: np.ndarray
    perm: np.ndarray
    det_sign: int
    log_abs_det: float

    @property
    def n(self) -> int:
        return self.lu.shape[0]

    @property
    def singular(self) -> bool:
        return self.det_sign == 0

    @property
    def lower(self) -> np.ndarray:
        return np.tril(self.lu, -1) + np.eye(self.n)

    @property
    def upper(self) -> np.ndarray:
        return np.triu(self.lu)

    def det(self) -> float:
        if self.singular:
            return 0.0
        return self.det_sign * math.exp(self.log_abs_det)


def lu_factor(a) -> LuFactors:
    """Factor a square matrix with row partial pivoting.

    A pivot smaller than ``1e-12 * max|A|`` marks the matrix singular; the
    returned factors then have ``det_sign = 0`` and cannot be used by
    :func:`solve`.
    """
    a = as_matrix(a, copy=True)
    n, m = a.shape
    if n != m:
        raise DimensionMismatch(f"lu_factor needs a square matrix, got {n}x{m}")
    perm = np.arange(n)
    scale = np.max(np.abs(a)) if a.size else 0.0
    threshold = PIVOT_RTOL * scale
    sign = 1
    log_abs = 0.0
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        pivot = a[p, k]
        if scale == 0.0 or abs(pivot) < threshold:
            return LuFactors(a, perm, 0, -math.inf)
        if p != k:
            a[[k, p]] = a[[p, k]]
            perm[[k, p]] = perm[[p, k]]
            sign = -sign
        if pivot < 0:
            sign = -sign
        log_abs += math.log(abs(pivot))
        if k + 1 < n:
            a[k + 1:, k] /= pivot
            a[k + 1:, k + 1:] -= np.outer(a[k + 1:, k], a[k, k + 1:])
    return LuFactors(a, perm, sign, log_abs)


def solve(f: LuFactors, b, transpose: bool = False) -> np.ndarray:
    """Solve ``A X = B`` (or ``A^T X = B``) from precomputed factors.

    A 1-D right-hand side gives a 1-D result.
    """
    if f.singular:
        raise SingularMatrix("cannot solve with singular factors")
    b = np.asarray(b, dtype=np.float64)
    vector = b.ndim == 1
    x = b.reshape(b.shape[0], -1).copy()
    n = f.n
    if x.shape[0] != n:
        raise DimensionMismatch(f"right-hand side has {x.shape[0]} rows, expected {n}")
    lu = f.lu
    if not transpose:
        x = x[f.perm]
        for i in range(1, n):
            x[i] -= lu[i, :i] @ x[:i]
        for i in range(n - 1, -1, -1):
            x[i] -= lu[i, i + 1:] @ x[i + 1:]
            x[i] /= lu[i, i]
    else:
        # A^T = U^T L^T P
        for i in range(n):
            x[i] -= lu[:i, i] @ x[:i]
            x[i] /= lu[i, i]
        for i in range(n - 2, -1, -1):
            x[i] -= lu[i + 1:, i] @ x[i + 1:]
        out = np.empty_like(x)
        out[f.perm] = x
        x = out
    return x[:, 0] if vector else x


def slogdet(a) -> tuple[int, float]:
    f = lu_factor(a)
    return f.det_sign, f.log_abs_det


def log_volume(a) -> float:
    """``log sqrt(det(A A^T))`` for a wide or square matrix (rows <= cols)."""
    a = as_matrix(a)
    if a.shape[0] > a.shape[1]:
        a = a.T
    return 0.5 * lu_factor(a @ a.T).log_abs_det


def singular_values(a) -> np.ndarray:
    """Singular values in descending order by one-sided (Hestenes) Jacobi.

    Columns of the narrower orientation are rotated pairwise until every
    pair is orthogonal to ``1e-12`` relative to the product of their norms.

    Raises
    ------
    NoConvergence
        If 60 sweeps do not suffice; carries the largest remaining
        normalized off-diagonal Gram entry.
    """
    a = as_matrix(a)
    x = a if a.shape[0] >= a.shape[1] else a.T
    # columns as rows for contiguous access
    w = np.array(x.T, dtype=np.float64, order="C")
    k = w.shape[0]
    if k == 0:
        return np.zeros(0)
    norms2 = np.einsum("ij,ij->i", w, w)
    for _ in range(JACOBI_MAX_SWEEPS):
        off = 0.0
        for p in range(k - 1):
            for q in range(p + 1, k):
                alpha = norms2[p]
                beta = norms2[q]
                if alpha == 0.0 or beta == 0.0:
                    continue
                gamma = float(w[p] @ w[q])
                rel = abs(gamma) / math.sqrt(alpha * beta)
                if rel <= JACOBI_TOL:
                    continue
                off = max(off, rel)
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                wp = w[p].copy()
                w[p] = c * wp - s * w[q]
                w[q] = s * wp + c * w[q]
                norms2[p] = w[p] @ w[p]
                norms2[q] = w[q] @ w[q]
        if off == 0.0:
            break
    else:
        raise NoConvergence(
            f"Jacobi SVD did not converge in {JACOBI_MAX_SWEEPS} sweeps "
            f"(off-diagonal residual {off:.3e})",
            off_diagonal=off,
        )
    sv = np.sqrt(np.einsum("ij,ij->i", w, w))
    return np.sort(sv)[::-1]


def norm(a, kind: Literal["chebyshev", "frobenius", "spectral"] = "frobenius") -> float:
    a = as_matrix(a)
    if a.size == 0:
        return 0.0
    if kind == "chebyshev":
        return float(np.max(np.abs(a)))
    if kind == "frobenius":
        return float(math.sqrt(np.sum(a * a)))
    if kind == "spectral":
        return float(singular_values(a)[0])
    raise ValueError(f"unknown norm kind {kind!r}")


def read_csv(source) -> np.ndarray:
    """Read a headerless comma-separated matrix from a path or text stream."""
    m = np.loadtxt(source, delimiter=",", dtype=np.float64, ndmin=2)
    return as_matrix(m)


def write_csv(a, target=None) -> str | None:
    """Write `a` as headerless CSV with round-trip precision.

    Returns the text when `target` is None.
    """
    a = as_matrix(a)
    buf = io.StringIO()
    for row in a:
        buf.write(",".join(repr(float(v)) for v in row))
        buf.write("\n")
    text = buf.getvalue()
    if target is None:
        return text
    if hasattr(target, "write"):
        target.write(text)
    else:
        with open(target, "w") as fh:
            fh.write(text)
    return None
