"""Graded quotient ring of a curve and its points at infinity.

For large ``n`` the homogeneous piece ``C[V]_{=n}`` has a fixed dimension
``d`` with standard-monomial basis ``hom_basis(n)``; multiplication by a
coordinate followed by taking the top-degree part is a ``d x d`` matrix
``[[z_j]]``.  Its eigenvalues are the ``j``-th coordinates of the points
``[0:1:lam_2:...:lam_N]`` where the curve meets the hyperplane at infinity.

Matrices are built exactly; eigen-analysis is floating point.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import HypothesisViolation, InputError, NotACurveError
from .exactnum import ZERO, GaussRational, to_complex_float
from .groebner import GroebnerBasis, HilbertData, Ideal, buchberger, hilbert_data, reduce, standard_monomials
from .numeric import eig
from .poly import Poly, grevlex_key

log = logging.getLogger(__name__)

__all__ = [
    "Tolerances",
    "CurveRing",
    "MulMatrix",
    "HomForm",
    "InfinityPoint",
    "DirectionalPoly",
    "HypothesisReport",
    "BasisFunction",
    "build_ring",
    "star",
    "hat_star",
    "mul_matrix",
    "check_hypotheses",
    "infinity_points",
    "eigenvector_poly",
    "directional_poly",
    "directions",
    "c_basis",
    "monomial_basis",
    "evaluate_basis",
]


@dataclass(frozen=True)
class Tolerances:
    eigen_tol: float = 1e-9  # relative eigen-residual
    eig_sep_tol: float = 1e-7  # minimum eigenvalue separation
    vanish_tol: float = 1e-8  # "zero" for values at infinity


DEFAULT_TOLS = Tolerances()


# ---------------------------------------------------------------------------
# ring


@dataclass(eq=False)
class CurveRing:
    G: GroebnerBasis
    hilbert: HilbertData
    d: int
    n0: int
    s_max: int
    _hom_cache: dict = field(default_factory=dict, repr=False)

    @property
    def nvars(self) -> int:
        return self.G.nvars

    def hom_basis(self, n: int) -> list[tuple]:
        """Standard monomials of degree ``n``, ascending grevlex."""
        if n not in self._hom_cache:
            self._hom_cache[n] = standard_monomials(self.G, n)
        return self._hom_cache[n]

    def reduce(self, p: Poly) -> Poly:
        return reduce(p, self.G)

    def basis_shape(self, symbolic: bool = True) -> list[str]:
        """Shape of ``hom_basis(n)`` for ``n >= n0`` written with ``n``."""
        out = []
        for a in self.hom_basis(self.n0):
            parts = []
            for k, e in enumerate(a):
                if k == 0:
                    off = e - self.n0
                    if symbolic:
                        parts.append("z1^n" if off == 0 else f"z1^(n{off:+d})")
                elif e:
                    parts.append(f"z{k + 1}" if e == 1 else f"z{k + 1}^{e}")
            out.append("*".join(parts))
        return out


def _default_s_max(G: GroebnerBasis) -> int:
    D = max((sum(a) for a in G.lt_exponents), default=1)
    return max(2 * D + 6, 12)


def build_ring(ideal: Ideal | Sequence[Poly] | GroebnerBasis, s_max: int | None = None) -> CurveRing:
    """Groebner basis, Hilbert data and stable graded basis for a curve.

    Raises
    ------
    EmptyVarietyError, NotACurveError
    """
    if isinstance(ideal, GroebnerBasis):
        G = ideal
    else:
        G = buchberger(ideal)
    if s_max is None:
        s_max = _default_s_max(G)
    H = hilbert_data(G, s_max)
    d = H.d
    ring = CurveRing(G, H, d, 0, s_max)
    n0 = None
    for n in range(s_max - 1, -1, -1):
        cur, nxt = ring.hom_basis(n), ring.hom_basis(n + 1)
        ok = len(cur) == d and nxt == [(a[0] + 1,) + a[1:] for a in cur]
        if not ok:
            break
        n0 = n
    if n0 is None or n0 > s_max - 3:
        ok, why = _lt_power_check(G)
        if not ok:
            raise HypothesisViolation("lt_powers", why)
        raise NotACurveError(f"graded basis shape does not stabilise below s_max={s_max}")
    ring.n0 = n0
    return ring


# ---------------------------------------------------------------------------
# products


def star(p: Poly, q: Poly, R: CurveRing) -> Poly:
    """Product in the coordinate ring: normal form of ``p*q``."""
    return R.reduce(p * q)


def hat_star(p: Poly, q: Poly, R: CurveRing) -> Poly:
    """Top-degree part of ``p*q`` on the curve; zero when the degree drops."""
    s = star(p, q, R)
    if s.is_zero() or p.is_zero() or q.is_zero() or s.degree != p.degree + q.degree:
        return Poly.zero(p.nvars)
    return s.leading_homogeneous_part()


@dataclass(frozen=True)
class MulMatrix:
    j: int
    entries: tuple  # rows of GaussRational
    basis_degree: int

    def to_complex(self) -> np.ndarray:
        return np.array([[to_complex_float(x) for x in row] for row in self.entries], dtype=complex)

    def to_fraction_strings(self) -> list[list[str]]:
        return [[str(x) for x in row] for row in self.entries]

    def is_identity(self) -> bool:
        return all(
            (x == 1 if r == c else x.is_zero()) for r, row in enumerate(self.entries) for c, x in enumerate(row)
        )


def mul_matrix(R: CurveRing, j: int, n: int | None = None) -> MulMatrix:
    """Exact matrix of ``q -> z_j (hat-star) q`` on ``C[V]_{=n}`` (default ``n = n0``)."""
    if not 1 <= j <= R.nvars:
        raise ValueError(f"variable index {j} outside 1..{R.nvars}")
    n = R.n0 if n is None else n
    if n < R.n0:
        raise ValueError(f"degree {n} below stable degree n0={R.n0}")
    cols = R.hom_basis(n)
    rows = R.hom_basis(n + 1)
    row_index = {a: r for r, a in enumerate(rows)}
    zj = Poly.var(j, R.nvars)
    M = [[ZERO] * len(cols) for _ in rows]
    for c, a in enumerate(cols):
        top = R.reduce(zj.shift(a)).homogeneous_part(n + 1)
        for alpha, v in top.coeffs.items():
            M[row_index[alpha]][c] = v
    return MulMatrix(j, tuple(tuple(r) for r in M), n)


def exact_matmul(A: MulMatrix, B: MulMatrix) -> list[list[GaussRational]]:
    n = len(A.entries)
    k = len(B.entries[0]) if B.entries else 0
    return [
        [sum((A.entries[r][t] * B.entries[t][c] for t in range(len(B.entries))), ZERO) for c in range(k)]
        for r in range(n)
    ]


# ---------------------------------------------------------------------------
# hypothesis checks


@dataclass
class HypothesisReport:
    lt_powers: bool  # z_k^a in LT ideal for k >= 2, never z1^a
    z1_identity: bool
    simple_eigenvalues: bool
    distinct_coordinates: bool
    degree_independent: bool
    details: dict = field(default_factory=dict)

    @property
    def all_pass(self) -> bool:
        return (
            self.lt_powers
            and self.z1_identity
            and self.simple_eigenvalues
            and self.distinct_coordinates
            and self.degree_independent
        )

    def as_dict(self) -> dict:
        return {
            "lt_powers": self.lt_powers,
            "z1_identity": self.z1_identity,
            "simple_eigenvalues": self.simple_eigenvalues,
            "distinct_coordinates": self.distinct_coordinates,
            "degree_independent": self.degree_independent,
            "all_pass": self.all_pass,
            "details": self.details,
        }

    def require(self) -> None:
        for name in ("lt_powers", "z1_identity", "degree_independent", "simple_eigenvalues", "distinct_coordinates"):
            if not getattr(self, name):
                raise HypothesisViolation(name, str(self.details.get(name, "check failed")))


def _min_separation(vals: np.ndarray) -> float:
    if len(vals) < 2:
        return np.inf
    diff = np.abs(vals[:, None] - vals[None, :])
    diff[np.diag_indices(len(vals))] = np.inf
    return float(diff.min())


def _lt_power_check(G: GroebnerBasis) -> tuple[bool, str]:
    def pure_power_of(k, a):
        return sum(a) > 0 and all(e == 0 for i, e in enumerate(a) if i != k)

    lts = G.lt_exponents
    if any(pure_power_of(0, a) for a in lts):
        return False, "some power of z1 lies in the leading-term ideal"
    missing = [f"z{k + 1}" for k in range(1, G.nvars) if not any(pure_power_of(k, a) for a in lts)]
    if missing:
        return False, f"no pure power of {', '.join(missing)} in the leading-term ideal"
    return True, ""


def check_hypotheses(R: CurveRing, tols: Tolerances = DEFAULT_TOLS, seed: int = 0) -> HypothesisReport:
    details: dict = {}
    N = R.nvars

    lt_powers, why = _lt_power_check(R.G)
    if not lt_powers:
        details["lt_powers"] = why

    mats = [mul_matrix(R, j) for j in range(1, N + 1)]
    z1_identity = mats[0].is_identity()
    if not z1_identity:
        details["z1_identity"] = "[[z1]] is not the identity"

    degree_independent = all(mul_matrix(R, j, R.n0 + 1).entries == mats[j - 1].entries for j in range(1, N + 1))
    if not degree_independent:
        details["degree_independent"] = "[[z_j]] differs between degrees n0 and n0+1"

    simple = True
    seps = {}
    for M in mats[1:]:
        A = M.to_complex()
        vals = eig(A).values
        sep = _min_separation(vals)
        seps[f"z{M.j}"] = sep
        if sep <= tols.eig_sep_tol * max(1.0, np.linalg.norm(A)):
            simple = False
    details["eigen_separation"] = seps
    if not simple:
        details["simple_eigenvalues"] = f"repeated eigenvalue (separations {seps})"

    distinct = simple
    if simple and lt_powers and z1_identity:
        try:
            pts = infinity_points(R, tols=tols, seed=seed, _mats=mats)
        except HypothesisViolation as exc:
            distinct = False
            details["distinct_coordinates"] = str(exc)
        else:
            for j in range(1, N):
                col = np.array([p.coords[j] for p in pts])
                if _min_separation(col) <= tols.eig_sep_tol:
                    distinct = False
                    details["distinct_coordinates"] = f"two directions share coordinate z{j + 1}"
    elif not simple:
        details["distinct_coordinates"] = "not checked: eigenvalues not simple"
    return HypothesisReport(lt_powers, z1_identity, simple, distinct, degree_independent, details)


# ---------------------------------------------------------------------------
# points at infinity


@dataclass(frozen=True)
class InfinityPoint:
    coords: tuple  # (1, lam_2, ..., lam_N), complex
    eigvec: np.ndarray = field(compare=False)
    residuals: tuple = ()

    def sort_key(self) -> tuple:
        return tuple(v for z in self.coords[1:] for v in (round(z.real, 9), round(z.imag, 9)))


def _rational_weights(rng: np.random.Generator, count: int) -> list[Fraction]:
    return [Fraction(int(rng.integers(1, 10_000)), 10_000) * (1 if rng.random() < 0.5 else -1) for _ in range(count)]


def infinity_points(
    R: CurveRing, tols: Tolerances = DEFAULT_TOLS, seed: int = 0, max_retries: int = 5, _mats=None
) -> list[InfinityPoint]:
    """The ``d`` points of the curve on the hyperplane at infinity.

    A random rational combination of ``[[z_2]], ..., [[z_N]]`` is
    diagonalised; each eigenvector is shared by all ``[[z_j]]`` and its
    Rayleigh quotients give the coordinates.  Sorted lexicographically by
    ``(Re lam_2, Im lam_2, Re lam_3, ...)``.
    """
    N = R.nvars
    mats = _mats or [mul_matrix(R, j) for j in range(1, N + 1)]
    A = [M.to_complex() for M in mats]
    rng = np.random.default_rng(seed)
    for attempt in range(max_retries + 1):
        weights = _rational_weights(rng, N - 1)
        C = sum(float(w) * A[j] for j, w in zip(range(1, N), weights)) if N > 1 else A[0]
        res = eig(C)
        if _min_separation(res.values) > tols.eig_sep_tol * max(1.0, np.linalg.norm(C)):
            break
        log.info("clustered eigenvalues with weights %s, retrying", weights)
    else:
        raise HypothesisViolation(
            "simple_eigenvalues", f"combination matrix has clustered eigenvalues after {max_retries} retries"
        )
    points = []
    for k in range(R.d):
        v = res.vectors[:, k]
        vv = np.vdot(v, v).real
        coords = []
        resid = []
        for j in range(N):
            lam = np.vdot(v, A[j] @ v) / vv
            r = float(np.linalg.norm(A[j] @ v - lam * v))
            if r > tols.eigen_tol * max(1.0, np.linalg.norm(A[j])):
                raise HypothesisViolation(
                    "simple_eigenvalues", f"eigenvector not shared by [[z{j + 1}]] (residual {r:.2e})"
                )
            coords.append(complex(lam))
            resid.append(r)
        coords[0] = 1 + 0j
        points.append(InfinityPoint(tuple(coords), v, tuple(resid)))
    points.sort(key=InfinityPoint.sort_key)
    return points


# ---------------------------------------------------------------------------
# homogeneous numeric forms


@dataclass(frozen=True)
class HomForm:
    """Homogeneous element of ``C[V]_{=degree}`` with complex coefficients over ``basis``."""

    degree: int
    basis: tuple
    coeffs: np.ndarray

    def at_infinity(self, point: Sequence[complex]) -> complex:
        """Value at the affine representative ``(1, lam_2, ..., lam_N)``."""
        pt = np.asarray(point, dtype=complex)
        return complex(sum(c * np.prod(pt ** np.array(a)) for c, a in zip(self.coeffs, self.basis)))

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=complex)
        out = np.zeros(pts.shape[0], dtype=complex)
        for c, a in zip(self.coeffs, self.basis):
            out += c * np.prod(pts ** np.array(a), axis=1)
        return out

    def shifted(self, k: int) -> HomForm:
        """``z1^k * self`` (same coefficient vector on the shifted basis)."""
        return HomForm(self.degree + k, tuple((a[0] + k,) + a[1:] for a in self.basis), self.coeffs)

    def to_poly_str(self, digits: int = 12) -> str:
        parts = []
        for c, a in zip(self.coeffs, self.basis):
            mono = "*".join(f"z{k + 1}" if e == 1 else f"z{k + 1}^{e}" for k, e in enumerate(a) if e) or "1"
            parts.append(f"({c.real:.{digits}g}{c.imag:+.{digits}g}j)*{mono}")
        return " + ".join(parts)


def _matrix_of_form(form: HomForm, A: list[np.ndarray]) -> np.ndarray:
    """Complex matrix of ``q -> form (hat-star) q`` on the stable graded piece."""
    d = A[0].shape[0]
    out = np.zeros((d, d), dtype=complex)
    for c, a in zip(form.coeffs, form.basis):
        if c == 0:
            continue
        P = np.eye(d, dtype=complex)
        for j, e in enumerate(a):
            if e:
                P = P @ np.linalg.matrix_power(A[j], e)
        out += c * P
    return out


def eigenvector_poly(
    R: CurveRing, point: InfinityPoint, j: int, tols: Tolerances = DEFAULT_TOLS, _mats=None
) -> HomForm:
    """Eigenvector polynomial of ``[[z_j]]`` for ``lam_j``, scaled to value 1 at ``point``."""
    if not 2 <= j <= R.nvars:
        raise ValueError("j must be in 2..N")
    A = (_mats[j - 1] if _mats else mul_matrix(R, j)).to_complex()
    lam = point.coords[j - 1]
    _, _, vh = np.linalg.svd(A - lam * np.eye(R.d))
    v = vh[-1].conj()
    form = HomForm(R.n0, tuple(R.hom_basis(R.n0)), v)
    val = form.at_infinity(point.coords)
    if abs(val) < tols.vanish_tol * np.linalg.norm(v):
        raise HypothesisViolation(
            "simple_eigenvalues", f"eigenvector polynomial of z{j} vanishes at its own direction"
        )
    return HomForm(form.degree, form.basis, v / val)


@dataclass(frozen=True)
class DirectionalPoly:
    """Directional polynomial ``v_lam``: value 1 at ``lam``, 0 at the other directions."""

    index: int
    point: InfinityPoint
    form: HomForm

    @property
    def degree(self) -> int:
        return self.form.degree

    def evaluate_many(self, points: np.ndarray, s: int | None = None) -> np.ndarray:
        """Values of ``v_{lam,s} = z1^(s-a) v_lam`` at the rows of ``points``."""
        vals = self.form.evaluate_many(points)
        if s is None or s == self.degree:
            return vals
        if s < self.degree:
            raise ValueError(f"s={s} below directional degree {self.degree}")
        return np.asarray(points, dtype=complex)[:, 0] ** (s - self.degree) * vals

    def padded(self, k: int) -> DirectionalPoly:
        """``z1^k v_lam``: same Chebyshev constants in the limit."""
        return DirectionalPoly(self.index, self.point, self.form.shifted(k))


def directional_poly(
    R: CurveRing, point: InfinityPoint, index: int = 0, others: Sequence[InfinityPoint] = (),
    tols: Tolerances = DEFAULT_TOLS, _mats=None,
) -> DirectionalPoly:
    """Hat-star product of the eigenvector polynomials of ``point``.

    The product has degree ``(N-1)*n0``; since ``[[z1]]`` is the identity it
    equals ``z1^((N-2)*n0)`` times a degree-``n0`` form, and that form is
    what is returned (``a = n0``).
    """
    mats = _mats or [mul_matrix(R, j) for j in range(1, R.nvars + 1)]
    A = [M.to_complex() for M in mats]
    N = R.nvars
    if N < 2:
        raise InputError("need at least two variables for a curve")
    factors = [eigenvector_poly(R, point, j, tols, _mats=mats) for j in range(2, N + 1)]
    vec = factors[-1].coeffs
    for f in reversed(factors[:-1]):
        vec = _matrix_of_form(f, A) @ vec
    if np.linalg.norm(vec) <= tols.vanish_tol * max(1.0, np.linalg.norm(factors[-1].coeffs)):
        raise HypothesisViolation("internal", "hat-star product of eigenvector polynomials collapsed to zero")
    form = HomForm(R.n0, tuple(R.hom_basis(R.n0)), vec)
    val = form.at_infinity(point.coords)
    form = HomForm(form.degree, form.basis, vec / val)
    for mu in others:
        if mu is point:
            continue
        if abs(form.at_infinity(mu.coords)) > tols.vanish_tol * max(1.0, np.linalg.norm(form.coeffs)):
            raise HypothesisViolation("distinct_coordinates", "directional polynomial does not vanish at another direction")
    return DirectionalPoly(index, point, form)


def directions(R: CurveRing, tols: Tolerances = DEFAULT_TOLS, seed: int = 0) -> list[DirectionalPoly]:
    """Directional polynomials of all points at infinity, in direction order."""
    mats = [mul_matrix(R, j) for j in range(1, R.nvars + 1)]
    pts = infinity_points(R, tols=tols, seed=seed, _mats=mats)
    return [directional_poly(R, p, k, pts, tols, _mats=mats) for k, p in enumerate(pts)]


# ---------------------------------------------------------------------------
# bases of C[V]_{<=n}


@dataclass(frozen=True)
class BasisFunction:
    """Either a standard monomial (``alpha``) or ``v_{lam_k, s}`` (``direction``, ``degree``)."""

    degree: int
    alpha: tuple | None = None
    direction: int | None = None

    @property
    def label(self) -> str:
        if self.alpha is not None:
            return "*".join(f"z{k + 1}^{e}" if e > 1 else f"z{k + 1}" for k, e in enumerate(self.alpha) if e) or "1"
        return f"v[{self.direction}],{self.degree}"


def c_basis(R: CurveRing, n: int, a: int | None = None, ndirections: int | None = None) -> list[BasisFunction]:
    """Ordered basis of ``C[V]_{<=n}``: standard monomials of degree ``< a``,
    then ``v_{lam_1,s}, ..., v_{lam_d,s}`` for ``s = a..n``."""
    a = R.n0 if a is None else a
    d = R.d if ndirections is None else ndirections
    out: list[BasisFunction] = []
    for s in range(min(a, n + 1)):
        out.extend(BasisFunction(s, alpha=m) for m in R.hom_basis(s))
    for s in range(a, n + 1):
        out.extend(BasisFunction(s, direction=k) for k in range(d))
    return out


def monomial_basis(R: CurveRing, n: int) -> list[BasisFunction]:
    """Standard monomials of degree ``<= n`` in ascending grevlex."""
    return [BasisFunction(s, alpha=m) for s in range(n + 1) for m in R.hom_basis(s)]


def evaluate_basis(funcs: Sequence[BasisFunction], points: np.ndarray, dirs: Sequence[DirectionalPoly] = ()) -> np.ndarray:
    """Matrix with entry ``(i, k) = funcs[k](points[i])``."""
    pts = np.asarray(points, dtype=complex)
    M = pts.shape[0]
    out = np.empty((M, len(funcs)), dtype=complex)
    maxdeg = max((f.degree for f in funcs), default=0)
    z1pow = [np.ones(M, dtype=complex)]
    for _ in range(maxdeg):
        z1pow.append(z1pow[-1] * pts[:, 0])
    dir_vals: dict[int, np.ndarray] = {}
    for k, f in enumerate(funcs):
        if f.alpha is not None:
            out[:, k] = np.prod(pts ** np.array(f.alpha), axis=1)
        else:
            v = dirs[f.direction]
            if f.direction not in dir_vals:
                dir_vals[f.direction] = v.form.evaluate_many(pts)
            out[:, k] = z1pow[f.degree - v.degree] * dir_vals[f.direction]
    return out
