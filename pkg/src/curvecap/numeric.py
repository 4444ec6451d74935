"""Dense complex linear algebra: eigenpairs, weighted least squares,
log-determinants and graded orthonormal bases.

Thin contracts over LAPACK (via numpy/scipy).  Every routine validates its
input and checks its own output against the stated residual bound.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .errors import NumericFailure, RankDeficiencyError

__all__ = ["as_cmatrix", "EigResult", "eig", "weighted_lstsq", "graded_basis", "project_out", "LogDet", "logdet"]

_EPS = np.finfo(float).eps


def as_cmatrix(A, name: str = "matrix") -> np.ndarray:
    """Return ``A`` as a 2-d complex array, rejecting NaN/Inf."""
    M = np.asarray(A, dtype=complex)
    if M.ndim == 1:
        M = M[:, None]
    if M.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


@dataclass(frozen=True)
class EigResult:
    values: np.ndarray
    vectors: np.ndarray  # columns, unit 2-norm

    def residuals(self, A: np.ndarray) -> np.ndarray:
        return np.linalg.norm(A @ self.vectors - self.vectors * self.values, axis=0)


def eig(A) -> EigResult:
    """Eigenvalues and unit right eigenvectors of a square complex matrix.

    Raises
    ------
    NumericFailure
        If LAPACK does not converge or a pair violates
        ``||Av - lam v|| <= 1e-10 * ||A||_F * dim``.
    """
    A = as_cmatrix(A)
    n, m = A.shape
    if n != m:
        raise ValueError("eig needs a square matrix")
    if n == 0:
        return EigResult(np.zeros(0, complex), np.zeros((0, 0), complex))
    try:
        vals, vecs = np.linalg.eig(A)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericFailure(f"eigendecomposition did not converge: {exc}") from exc
    vecs = vecs / np.linalg.norm(vecs, axis=0)
    res = EigResult(vals, vecs)
    bound = 1e-10 * max(np.linalg.norm(A), 1.0) * n
    worst = res.residuals(A).max()
    if worst > bound:
        raise NumericFailure(f"eigenpair residual {worst:.3e} exceeds {bound:.3e}")
    return res


def weighted_lstsq(A, b, w, rank_tol: float = 1e-13) -> np.ndarray:
    """Minimise ``sum_i w_i |b_i - (A c)_i|^2`` by QR of the sqrt(w)-scaled system.

    Raises
    ------
    RankDeficiencyError
        When a diagonal entry of R is below ``rank_tol`` times the largest;
        ``.column`` names the first offending column.
    """
    A = as_cmatrix(A, "A")
    b = np.asarray(b, dtype=complex).ravel()
    w = np.asarray(w, dtype=float).ravel()
    m, k = A.shape
    if b.shape[0] != m or w.shape[0] != m:
        raise ValueError("A, b and w disagree in row count")
    if m < k:
        raise ValueError(f"underdetermined system: {m} rows < {k} columns")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and non-negative")
    if k == 0:
        return np.zeros(0, dtype=complex)
    sw = np.sqrt(w)
    Q, R = np.linalg.qr(A * sw[:, None], mode="reduced")
    diag = np.abs(np.diag(R))
    scale = diag.max()
    bad = np.nonzero(diag <= rank_tol * max(scale, np.finfo(float).tiny))[0]
    if scale == 0 or bad.size:
        col = int(bad[0]) if bad.size else 0
        raise RankDeficiencyError(col, f"weighted system is rank deficient at column {col}")
    return sla.solve_triangular(R, Q.conj().T @ (b * sw))


def project_out(Q: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Remove the ``span(Q)`` component of the columns of ``X`` (orthonormal ``Q``, two passes)."""
    X = np.array(X, dtype=complex)
    for _ in range(2):
        X -= Q @ (Q.conj().T @ X)
    return X


def graded_basis(points, counts, rank_tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of the span of all monomials of degree ``< len(counts)`` on ``points``.

    Vandermonde-with-Arnoldi: the degree-``j`` block is extracted from the
    products of the coordinates with the degree-``j-1`` block, after
    projecting out everything of lower degree, and ``counts[j]`` (the
    known dimension increase) columns are kept via pivoted QR.  The span
    equals that of the raw monomial columns, without their ill-conditioning.

    Raises
    ------
    RankDeficiencyError
        When a degree block falls short of ``counts[j]`` independent columns.
    """
    pts = as_cmatrix(points, "points")
    M = pts.shape[0]
    if sum(counts) > M:
        raise ValueError(f"{sum(counts)} basis functions need at least as many points, got {M}")
    if not counts:
        return np.zeros((M, 0), dtype=complex)
    if counts[0] != 1:
        raise ValueError("degree 0 must contribute exactly the constants")
    Q = np.full((M, 1), 1.0 / np.sqrt(M), dtype=complex)
    last = Q
    for j, h in enumerate(counts[1:], start=1):
        cand = np.concatenate([pts[:, [i]] * last for i in range(pts.shape[1])], axis=1)
        norms = np.linalg.norm(cand, axis=0)
        X = project_out(Q, cand)
        if h > X.shape[1]:
            raise RankDeficiencyError(Q.shape[1], f"degree {j} needs {h} new columns, only {X.shape[1]} candidates")
        Qx, Rx, _ = sla.qr(X, mode="economic", pivoting=True)
        diag = np.abs(np.diag(Rx))
        if h and (diag.size < h or diag[h - 1] <= rank_tol * max(norms.max(), np.finfo(float).tiny)):
            raise RankDeficiencyError(Q.shape[1] + h - 1, f"sample does not separate degree-{j} functions")
        last = project_out(Q, Qx[:, :h])
        last /= np.linalg.norm(last, axis=0)
        Q = np.concatenate([Q, last], axis=1)
    return Q


@dataclass(frozen=True)
class LogDet:
    """``det = phase * exp(log_abs)``; ``zero`` marks a (numerically) singular matrix."""

    log_abs: float
    phase: complex
    zero: bool = False

    @property
    def value(self) -> complex:
        return 0j if self.zero else self.phase * np.exp(self.log_abs)


def logdet(A) -> LogDet:
    """Log-magnitude and phase of ``det A`` via partial-pivoting LU.

    Rows are equilibrated by their max modulus first (scales are added back
    into ``log_abs``); a pivot below ``dim * eps`` of the equilibrated matrix
    counts as zero.
    """
    A = as_cmatrix(A)
    n, m = A.shape
    if n != m:
        raise ValueError("logdet needs a square matrix")
    if n == 0:
        return LogDet(0.0, 1 + 0j)
    rs = np.abs(A).max(axis=1)
    if np.any(rs == 0):
        return LogDet(-np.inf, 0j, True)
    B = A / rs[:, None]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)  # singularity is reported via ``zero``
        lu, piv = sla.lu_factor(B, check_finite=False)
    u = np.diag(lu)
    au = np.abs(u)
    if np.any(au <= n * _EPS):
        return LogDet(-np.inf, 0j, True)
    swaps = int(np.count_nonzero(piv != np.arange(n)))
    phase = (-1.0) ** swaps * np.prod(u / au)
    phase = phase / abs(phase)
    return LogDet(float(np.sum(np.log(au)) + np.sum(np.log(rs))), complex(phase))
