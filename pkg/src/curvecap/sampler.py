"""Finite samples of compact sets on a curve.

Samples are unions of fibres ``V ∩ {z1 = c}`` over exact Gaussian-rational
base values ``c``.  Each fibre is solved by the eigenvalue method: the
quotient ``Q[z]/(I + <z1 - c>)`` is finite-dimensional, and the left
eigenvectors of its multiplication matrices are the evaluation vectors of
the solutions.  User point files and affine images are also supported.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import HypothesisViolation, InputError, NumericFailure
from .exactnum import ONE, ZERO, GaussRational, as_gauss, to_complex_float
from .groebner import GroebnerBasis, Ideal, buchberger, full_quotient_basis, reduce
from .numeric import eig
from .poly import Poly

log = logging.getLogger(__name__)

__all__ = [
    "CompactSet",
    "AffineMap",
    "fiber_points",
    "circle_point",
    "rational_circle",
    "build_set",
    "apply_affine",
    "check_admissible",
    "validate_points",
    "load_points",
    "save_points",
    "format_points",
    "parse_points",
]

RESIDUAL_TOL = 1e-10
DEDUP_TOL = 1e-9


@dataclass
class CompactSet:
    """A finite sample ``K`` of points on a curve (rows of ``points``)."""

    points: np.ndarray
    source: dict = field(default_factory=dict)
    residual_tol: float = RESIDUAL_TOL

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=complex)
        if self.points.ndim != 2:
            raise ValueError("points must be an M x N array")

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def nvars(self) -> int:
        return self.points.shape[1]

    def sup_norm(self, values: np.ndarray) -> float:
        return float(np.max(np.abs(values))) if len(values) else 0.0

    def coordinate_norm(self, j: int = 1) -> float:
        """``max |z_j|`` over the sample."""
        return float(np.max(np.abs(self.points[:, j - 1])))


# ---------------------------------------------------------------------------
# validation helpers


def residuals(G: GroebnerBasis | Sequence[Poly], points: np.ndarray) -> np.ndarray:
    """``max_i |g_i(z)|`` for every row ``z``."""
    pts = np.asarray(points, dtype=complex)
    if len(pts) == 0:
        return np.zeros(0)
    vals = np.array([np.abs(g.evaluate_many(pts)) for g in G])
    return vals.max(axis=0)


def validate_points(G, points: np.ndarray, residual_tol: float = RESIDUAL_TOL) -> None:
    """Raise :class:`InputError` listing the rows whose residual exceeds the tolerance."""
    res = residuals(G, points)
    bad = np.nonzero(res > residual_tol)[0]
    if bad.size:
        rows = ", ".join(f"row {int(i)}: {res[i]:.3e}" for i in bad[:10])
        more = f" (and {bad.size - 10} more)" if bad.size > 10 else ""
        raise InputError(f"{bad.size} point(s) are not on the curve within {residual_tol:g}: {rows}{more}")


def _lex_sort(points: list[np.ndarray]) -> list[np.ndarray]:
    return sorted(points, key=lambda p: tuple(v for z in p for v in (round(z.real, 12), round(z.imag, 12))))


def _dedup(points: np.ndarray, tol: float) -> np.ndarray:
    keep: list[int] = []
    for i in range(len(points)):
        if all(np.max(np.abs(points[i] - points[k])) > tol for k in keep):
            keep.append(i)
    return points[keep]


# ---------------------------------------------------------------------------
# fibres


def _partials(g: Poly) -> list[Poly]:
    out = []
    for k in range(g.nvars):
        coeffs = {}
        for a, c in g.coeffs.items():
            if a[k]:
                b = a[:k] + (a[k] - 1,) + a[k + 1:]
                coeffs[b] = c * a[k]
        out.append(Poly(g.nvars, coeffs))
    return out


def _newton_polish(system: Sequence[Poly], jac: list[list[Poly]], z: np.ndarray, steps: int = 3) -> np.ndarray:
    for _ in range(steps):
        pt = z[None, :]
        F = np.array([g.evaluate_many(pt)[0] for g in system])
        if np.max(np.abs(F)) < 1e-15:
            break
        J = np.array([[d.evaluate_many(pt)[0] for d in row] for row in jac])
        step, *_ = np.linalg.lstsq(J, F, rcond=None)
        z = z - step
    return z


def fiber_points(
    I: Ideal | GroebnerBasis | Sequence[Poly],
    c,
    residual_tol: float = RESIDUAL_TOL,
    dedup_tol: float = DEDUP_TOL,
    seed: int = 0,
    max_retries: int = 5,
) -> np.ndarray:
    """Points of the curve with ``z1 = c``, one per row, sorted lexicographically.

    Raises
    ------
    InputError
        When the fibre is positive-dimensional.
    NumericFailure
        When the eigenvalues stay clustered after reweighting (a possible
        multiple point) or a solution fails validation.
    """
    c = as_gauss(c)
    gens = tuple(I.elements if isinstance(I, GroebnerBasis) else I.generators if isinstance(I, Ideal) else I)
    N = gens[0].nvars
    cut = Poly.var(1, N) - Poly.constant(c, N)
    G = buchberger(gens + (cut,))
    if G.is_unit():
        return np.zeros((0, N), dtype=complex)
    try:
        B = full_quotient_basis(G)
    except ValueError as exc:
        raise InputError(f"fibre over z1 = {c} is not zero-dimensional") from exc
    D = len(B)
    index = {b: k for k, b in enumerate(B)}
    mats = []
    for j in range(1, N + 1):
        zj = Poly.var(j, N)
        M = np.zeros((D, D), dtype=complex)
        for col, b in enumerate(B):
            r = reduce(zj.shift(b), G)
            for a, v in r.coeffs.items():
                M[index[a], col] = to_complex_float(v)
        mats.append(M.T)  # left action: eigenvectors are evaluation vectors
    rng = np.random.default_rng(seed)
    scale = max(1.0, max(np.linalg.norm(M) for M in mats))
    for attempt in range(max_retries + 1):
        w = [Fraction(int(rng.integers(1, 10_000)), 10_000) for _ in range(N - 1)]
        C = sum(float(wj) * mats[j] for j, wj in zip(range(1, N), w)) if N > 1 else mats[0]
        res = eig(C)
        vals = res.values
        sep = np.inf if D < 2 else min(abs(vals[i] - vals[k]) for i in range(D) for k in range(i + 1, D))
        if sep > 1e-7 * scale:
            break
    else:
        raise NumericFailure(f"fibre over z1 = {c}: clustered eigenvalues after {max_retries} retries (possible multiple point)")

    system = list(G.elements)
    jac = [_partials(g) for g in system]
    pts = []
    for k in range(D):
        v = res.vectors[:, k]
        vv = np.vdot(v, v).real
        z = np.array([np.vdot(v, mats[j] @ v) / vv for j in range(N)], dtype=complex)
        z[0] = to_complex_float(c)
        z = _newton_polish(system, jac, z)
        pts.append(z)
    pts = np.array(_lex_sort(pts), dtype=complex).reshape(-1, N)
    res_vals = residuals(G, pts)
    if np.any(res_vals > residual_tol):
        raise NumericFailure(f"fibre over z1 = {c}: residual {res_vals.max():.3e} exceeds {residual_tol:g}")
    uniq = _dedup(pts, dedup_tol)
    if len(uniq) != D:
        raise NumericFailure(f"fibre over z1 = {c}: {len(uniq)} distinct points for a quotient of dimension {D}")
    return uniq


def circle_point(t, r=1) -> GaussRational:
    """``r((1 - t^2) + 2ti)/(1 + t^2)``; ``t = None`` stands for infinity (``-r``)."""
    r = Fraction(r)
    if t is None:
        return GaussRational(-r)
    t = Fraction(t)
    den = 1 + t * t
    return GaussRational(r * (1 - t * t) / den, r * 2 * t / den)


def rational_circle(m: int, r=1, offset: float | None = None, max_den: int = 10**6) -> list[GaussRational]:
    """``m`` base values exactly on ``|c| = r``, close to equally spaced in angle.

    Angle ``k`` is ``2 pi k/m + offset`` (default half a step, which keeps the
    real and imaginary axes off the grid); its tangent half-angle is rounded
    to a rational with denominator at most ``max_den``.
    """
    if m < 1:
        raise ValueError("m must be positive")
    offset = math.pi / m if offset is None else offset
    out = []
    for k in range(m):
        theta = 2 * math.pi * k / m + offset
        half = theta / 2
        if abs(math.cos(half)) < 1e-12:
            out.append(circle_point(None, r))
            continue
        t = Fraction(math.tan(half)).limit_denominator(max_den)
        out.append(circle_point(t, r))
    return out


def build_set(
    I: Ideal | GroebnerBasis,
    base_values: Sequence,
    r_max: float = math.inf,
    residual_tol: float = RESIDUAL_TOL,
    dedup_tol: float = DEDUP_TOL,
    threads: int = 1,
    seed: int = 0,
) -> CompactSet:
    """Union of fibres over ``base_values`` (merged in input order), filtered to ``max|z_k| <= r_max``."""
    base_values = [as_gauss(c) for c in base_values]

    def solve(c):
        return fiber_points(I, c, residual_tol, dedup_tol, seed)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            fibres = list(ex.map(solve, base_values))
    else:
        fibres = [solve(c) for c in base_values]
    N = (I.nvars if isinstance(I, (Ideal, GroebnerBasis)) else I[0].nvars)
    pts = np.concatenate(fibres) if fibres else np.zeros((0, N), dtype=complex)
    if len(pts):
        pts = pts[np.max(np.abs(pts), axis=1) <= r_max]
        pts = _dedup(pts, dedup_tol)
    if len(pts) == 0:
        raise InputError("the sample is empty (no fibre points within the bound)")
    src = {"kind": "fibres", "base_values": [str(c) for c in base_values], "r_max": r_max}
    return CompactSet(pts, src, residual_tol)


# ---------------------------------------------------------------------------
# affine maps


def _exact_inverse(A: list[list[GaussRational]]) -> list[list[GaussRational]]:
    n = len(A)
    M = [list(row) + [ONE if i == j else ZERO for j in range(n)] for i, row in enumerate(A)]
    for col in range(n):
        piv = next((r for r in range(col, n) if not M[r][col].is_zero()), None)
        if piv is None:
            raise InputError("affine map matrix is singular")
        M[col], M[piv] = M[piv], M[col]
        inv = M[col][col].inverse()
        M[col] = [x * inv for x in M[col]]
        for r in range(n):
            if r != col and not M[r][col].is_zero():
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [row[n:] for row in M]


@dataclass(frozen=True)
class AffineMap:
    """``z -> A z + b`` with exact Gaussian-rational entries."""

    matrix: tuple
    shift: tuple

    def __post_init__(self):
        A = tuple(tuple(as_gauss(x) for x in row) for row in self.matrix)
        n = len(A)
        if any(len(row) != n for row in A):
            raise InputError("affine map matrix must be square")
        b = tuple(as_gauss(x) for x in self.shift) if self.shift else (ZERO,) * n
        if len(b) != n:
            raise InputError("affine shift has the wrong length")
        object.__setattr__(self, "matrix", A)
        object.__setattr__(self, "shift", b)
        _exact_inverse([list(r) for r in A])  # invertibility

    @classmethod
    def identity(cls, n: int) -> AffineMap:
        return cls(tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)), ())

    @property
    def dim(self) -> int:
        return len(self.matrix)

    def linear_complex(self) -> np.ndarray:
        return np.array([[to_complex_float(x) for x in row] for row in self.matrix], dtype=complex)

    def shift_complex(self) -> np.ndarray:
        return np.array([to_complex_float(x) for x in self.shift], dtype=complex)

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=complex)
        return pts @ self.linear_complex().T + self.shift_complex()

    def first_linear(self, direction: Sequence[complex]) -> complex:
        """``T_1`` (linear part, first row) at a direction vector."""
        row = self.linear_complex()[0]
        return complex(row @ np.asarray(direction, dtype=complex))

    def inverse_substitution(self) -> list[Poly]:
        """Polynomials ``z = A^{-1}(w - b)`` in the new variables ``w``."""
        n = self.dim
        Ainv = _exact_inverse([list(r) for r in self.matrix])
        w = [Poly.var(k + 1, n) for k in range(n)]
        subs = []
        for i in range(n):
            p = Poly.zero(n)
            for k in range(n):
                if not Ainv[i][k].is_zero():
                    p = p + (w[k] - Poly.constant(self.shift[k], n)).scale(Ainv[i][k])
            subs.append(p)
        return subs


def check_admissible(T: AffineMap, directions: Sequence[Sequence[complex]], tol: float = 1e-9) -> list[complex]:
    """``T_1`` at every direction; raises when one vanishes."""
    vals = [T.first_linear(d) for d in directions]
    for k, v in enumerate(vals):
        if abs(v) <= tol:
            raise HypothesisViolation("transform_admissible", f"first coordinate of T vanishes at direction {k}")
    return vals


def apply_affine(T: AffineMap, K: CompactSet, I: Ideal | GroebnerBasis) -> tuple[Ideal, CompactSet]:
    """Transformed ideal (generators composed with ``T^{-1}``) and transformed sample."""
    gens = I.elements if isinstance(I, GroebnerBasis) else I.generators
    n = I.nvars
    if T.dim != n:
        raise InputError(f"affine map has dimension {T.dim}, curve has {n} variables")
    subs = T.inverse_substitution()
    new_ideal = Ideal(tuple(g.compose(subs) for g in gens), n)
    pts = T.apply(K.points)
    G2 = buchberger(new_ideal)
    scale = max(1.0, float(np.max(np.abs(pts))) ** max(g.degree for g in G2.elements)) if len(pts) else 1.0
    validate_points(G2, pts, K.residual_tol * scale)
    src = {"kind": "affine_image", "of": K.source}
    return new_ideal, CompactSet(pts, src, K.residual_tol)


# ---------------------------------------------------------------------------
# point files


def _fmt(z: complex) -> str:
    return f"{z.real!r}:{z.imag!r}"


def format_points(points: np.ndarray) -> str:
    return "".join(",".join(_fmt(complex(z)) for z in row) + "\n" for row in np.asarray(points, dtype=complex))


def parse_points(text: str, nvars: int | None = None) -> np.ndarray:
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        row = []
        for field_ in line.split(","):
            parts = field_.strip().split(":")
            if len(parts) != 2:
                raise InputError(f"line {lineno}: expected re:im, got {field_.strip()!r}")
            try:
                row.append(complex(float(parts[0]), float(parts[1])))
            except ValueError as exc:
                raise InputError(f"line {lineno}: {exc}") from exc
        if nvars is not None and len(row) != nvars:
            raise InputError(f"line {lineno}: {len(row)} coordinates, expected {nvars}")
        if rows and len(row) != len(rows[0]):
            raise InputError(f"line {lineno}: inconsistent coordinate count")
        rows.append(row)
    if not rows:
        raise InputError("point list is empty")
    arr = np.array(rows, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise InputError("point list has non-finite entries")
    return arr


def load_points(path, G=None, residual_tol: float = RESIDUAL_TOL, nvars: int | None = None) -> CompactSet:
    """Read a point file; validate against ``G`` when given."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read point file {path}: {exc}") from exc
    pts = parse_points(text, nvars)
    if G is not None:
        validate_points(G, pts, residual_tol)
    return CompactSet(pts, {"kind": "file", "path": str(path)}, residual_tol)


def save_points(path, K: CompactSet | np.ndarray) -> None:
    pts = K.points if isinstance(K, CompactSet) else K
    Path(path).write_text(format_points(pts))
