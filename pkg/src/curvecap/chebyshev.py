"""Discrete complex minimax approximation and Chebyshev constants on a curve.

Every constant here is a *discrete* one: sup-norms over a compact set are
maxima over a finite sample ``K``.  The inner problem

    minimise  max_i |target_i - (A c)_i|  over complex c

is solved by Lawson's iteratively reweighted least squares, finished when
needed by a log-barrier Newton method.  Any probability weights give a
weighted L2 error below the optimum, so every result carries a certified
bracket ``lower_bound <= minimax_value``.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .curve import BasisFunction, CurveRing, DirectionalPoly, c_basis
from .errors import InputError
from .numeric import graded_basis, project_out, weighted_lstsq
from .poly import Poly
from .sampler import AffineMap, CompactSet

log = logging.getLogger(__name__)

__all__ = [
    "MinimaxProblem",
    "ChebResult",
    "LimitEstimate",
    "minimax_solve",
    "brute_force_minimax",
    "tau_Q",
    "tau_s",
    "t_s",
    "chebyshev_table",
    "estimate_limit",
    "transform_check",
    "write_csv",
    "CSV_COLUMNS",
]

WEIGHT_FLOOR = 1e-300
CSV_COLUMNS = ("direction_index", "s", "family", "raw_value", "normalized_constant", "iterations", "converged")


@dataclass
class MinimaxProblem:
    target: np.ndarray
    basis_evals: np.ndarray
    labels: list = field(default_factory=list)

    def __post_init__(self):
        self.target = np.asarray(self.target, dtype=complex).ravel()
        A = np.asarray(self.basis_evals, dtype=complex)
        if A.size == 0:
            A = A.reshape(self.target.shape[0], 0)
        self.basis_evals = A
        M, k = A.shape
        if M != self.target.shape[0]:
            raise ValueError("target and basis_evals disagree in row count")
        if M < k:
            raise InputError(f"sample has {M} points, fewer than the {k} correction functions")

    @property
    def k(self) -> int:
        return self.basis_evals.shape[1]

    def residual(self, coeffs: np.ndarray) -> np.ndarray:
        if self.k == 0:
            return np.abs(self.target)
        return np.abs(self.target - self.basis_evals @ coeffs)


@dataclass
class ChebResult:
    coefficients: np.ndarray
    minimax_value: float
    iterations: int
    converged: bool
    degree: int = 0
    lower_bound: float = 0.0
    weights: np.ndarray | None = None
    family: str = ""
    direction: int = -1

    @property
    def normalized_constant(self) -> float:
        if self.degree <= 0:
            return self.minimax_value
        return self.minimax_value ** (1.0 / self.degree)

    def as_row(self) -> dict:
        return {
            "direction_index": self.direction,
            "s": self.degree,
            "family": self.family,
            "raw_value": repr(self.minimax_value),
            "normalized_constant": repr(self.normalized_constant),
            "iterations": self.iterations,
            "converged": self.converged,
        }


def minimax_solve(
    P: MinimaxProblem,
    tol: float = 1e-10,
    max_iters: int = 500,
    degree: int = 0,
    init_coeffs: np.ndarray | None = None,
    init_weights: np.ndarray | None = None,
    lawson_iters: int = 60,
) -> ChebResult:
    """Discrete complex Chebyshev approximation.

    Lawson IRLS runs first (at most ``lawson_iters`` steps).  Each step's
    weighted L2 error is a lower bound on the optimum, so the iteration
    stops as soon as the best max residual is within ``tol`` (relative) of
    it, or the max residual stops moving.  If that leaves a gap, a log-barrier
    Newton method finishes the job from the best Lawson iterate; its
    multipliers give fresh weights and hence fresh lower bounds.
    ``max_iters`` caps Lawson steps plus Newton steps.

    The target is divided by its largest modulus and each column by its own
    largest modulus before solving; both scales are undone in the result.
    The best iterate seen (``init_coeffs`` included) is returned and its
    value recomputed.

    Raises
    ------
    RankDeficiencyError
        When the correction columns are dependent on the sample.
    """
    M, k = P.basis_evals.shape
    tscale = float(np.max(np.abs(P.target))) if M else 0.0
    if k == 0 or tscale == 0.0:
        c = np.zeros(k, dtype=complex)
        val = float(P.residual(c).max()) if M else 0.0
        return ChebResult(c, val, 0, True, degree, val)
    b = P.target / tscale
    cscale = np.max(np.abs(P.basis_evals), axis=0)
    cscale[cscale == 0] = 1.0
    A = P.basis_evals / cscale

    w = np.full(M, 1.0 / M) if init_weights is None else np.asarray(init_weights, dtype=float).copy()
    w = np.maximum(w / w.sum(), WEIGHT_FLOOR)
    best_c, best_E = None, math.inf
    if init_coeffs is not None:
        c0 = np.zeros(k, dtype=complex)
        init = np.asarray(init_coeffs, dtype=complex)
        c0[: len(init)] = init * cscale[: len(init)] / tscale
        best_c, best_E = c0, float(np.abs(b - A @ c0).max())
    lower = 0.0
    prev = None
    it = 0
    for it in range(1, min(lawson_iters, max_iters) + 1):
        c = weighted_lstsq(A, b, w)
        r = np.abs(b - A @ c)
        E = float(r.max())
        lower = max(lower, float(np.sqrt(np.dot(w, r * r))))
        if E < best_E:
            best_c, best_E = c, E
        if best_E - lower <= tol * best_E or (prev is not None and abs(prev - E) <= tol * E):
            break
        prev = E
        w = w * r
        s = w.sum()
        if s == 0:
            break
        w = np.maximum(w / s, WEIGHT_FLOOR)
    if best_E - lower > tol * best_E and it < max_iters:
        bc, bE, bl, bw, steps = _barrier_finish(A, b, best_c, lower, tol, max_iters - it)
        it += steps
        if bE < best_E:
            best_c, best_E = bc, bE
        if bl > lower:
            lower, w = bl, bw
    converged = best_E - lower <= max(tol, 1e-9) * best_E
    coeffs = best_c * tscale / cscale
    value = float(P.residual(coeffs).max())
    return ChebResult(coeffs, value, it, converged, degree, min(lower * tscale, value), w)


def _weighted_l2_floor(A, b, w) -> float:
    """``sqrt(min_c sum w |b - Ac|^2)`` for weights summing to one: a lower bound on the minimax value."""
    sw = np.sqrt(w)
    c, *_ = np.linalg.lstsq(A * sw[:, None], b * sw, rcond=None)
    r = np.abs(b - A @ c)
    return float(np.sqrt(np.dot(w, r * r)))


def _realify(H: np.ndarray) -> np.ndarray:
    return np.block([[H.real, -H.imag], [H.imag, H.real]])


def _barrier_finish(A, b, c, lower, tol, budget, growth: float = 8.0):
    """Minimise ``t`` subject to ``|b_i - A_i c| <= t`` by the log barrier
    ``tau*t - sum log(t^2 - |r_i|^2)``, following the central path from
    ``c``.  Returns ``(c, E, lower, weights, newton_steps)``."""
    M, k = A.shape
    r = b - A @ c
    E = float(np.abs(r).max())
    t = E * (1 + 1e-3)
    tau = 2 * M / max(E - lower, tol * E, 1e-300)
    best_c, best_E, best_w = c, E, None
    steps = 0

    def F(cc, tt):
        g = tt * tt - np.abs(b - A @ cc) ** 2
        if tt <= 0 or np.any(g <= 0):
            return math.inf
        return tau * tt - float(np.sum(np.log(g)))

    while steps < budget:
        for _ in range(50):
            if steps >= budget:
                break
            steps += 1
            r = b - A @ c
            g = t * t - np.abs(r) ** 2
            q = 1.0 / g
            v = A.conj().T @ (q * r)
            grad = np.concatenate([-2 * v.real, -2 * v.imag, [tau - 2 * t * q.sum()]])
            cr = np.conj(r)[:, None] * A
            Gm = np.hstack([2 * cr.real, -2 * cr.imag, np.full((M, 1), 2 * t)])
            H = (Gm * (q * q)[:, None]).T @ Gm
            H[: 2 * k, : 2 * k] += 2 * _realify(A.conj().T @ (A * q[:, None]))
            H[-1, -1] -= 2 * q.sum()
            try:
                d = -np.linalg.solve(H, grad)
            except np.linalg.LinAlgError:
                d, *_ = np.linalg.lstsq(H, -grad, rcond=None)
            dec = -float(grad @ d)
            if dec / 2 < 1e-12:
                break
            dc = d[:k] + 1j * d[k : 2 * k]
            f0 = F(c, t)
            step = 1.0
            while step > 1e-12:
                fn = F(c + step * dc, t + step * d[-1])
                if fn <= f0 - 0.25 * step * dec:
                    break
                step *= 0.5
            else:
                break
            c, t = c + step * dc, t + step * d[-1]
        r = b - A @ c
        res = np.abs(r)
        E = float(res.max())
        if E < best_E:
            best_c, best_E = c, E
        q = 1.0 / (t * t - res**2)
        wq = q / q.sum()
        bound = _weighted_l2_floor(A, b, wq)
        if bound > lower:
            lower, best_w = bound, wq
        if best_E - lower <= tol * best_E or 2 * M / tau < 1e-15 * best_E:
            break
        tau *= growth
    return best_c, best_E, lower, best_w, steps


def _grid_values(A, b, flat, k):
    C = flat[:, 0 : 2 * k : 2] + 1j * flat[:, 1 : 2 * k : 2]
    step = max(1, 2_000_000 // len(b))  # bound the temporary to about 32 MB
    return np.concatenate([np.abs(b[None, :] - C[i : i + step] @ A.T).max(axis=1) for i in range(0, len(C), step)])


def _mesh(center, radius, grid):
    axes = [np.linspace(c - radius, c + radius, grid) for c in center]
    return np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=1)


def brute_force_minimax(
    P: MinimaxProblem, grid: int = 41, radius: float | None = None, zoom_grid: int = 11, zoom_levels: int = 60
) -> tuple[float, np.ndarray]:
    """Independent small-instance oracle for at most two coefficients.

    A coarse grid over the real and imaginary parts, then repeated zooming
    (a finer grid on a shrinking window around the best point), then SLSQP on
    the epigraph form.  The best of the three is returned.
    """
    from scipy.optimize import minimize

    M, k = P.basis_evals.shape
    if k == 0:
        return float(np.abs(P.target).max()), np.zeros(0, complex)
    if k > 2:
        raise ValueError("brute force handles at most two coefficients")
    A, b = P.basis_evals, P.target
    if radius is None:
        cn = np.max(np.abs(A), axis=0).min()
        radius = 2.0 * float(np.abs(b).max()) / max(cn, 1e-300)

    def unpack(x):
        return x[0 : 2 * k : 2] + 1j * x[1 : 2 * k : 2]

    def value(x):
        return float(np.abs(b - A @ unpack(x)).max())

    flat = _mesh(np.zeros(2 * k), radius, grid)
    vals = _grid_values(A, b, flat, k)
    x_grid = flat[int(np.argmin(vals))]

    # window of 1.5 zoom steps around the incumbent; the objective is convex
    x_zoom, r = x_grid.copy(), 2.0 * radius / (grid - 1)
    for _ in range(zoom_levels):
        flat = _mesh(x_zoom, r, zoom_grid)
        vals = _grid_values(A, b, flat, k)
        x_zoom = flat[int(np.argmin(vals))]
        r *= 3.0 / (zoom_grid - 1)

    def cons(x):
        return x[-1] ** 2 - np.abs(b - A @ unpack(x)) ** 2

    sol = minimize(lambda x: x[-1], np.append(x_zoom, value(x_zoom)), constraints=[{"type": "ineq", "fun": cons}],
                   method="SLSQP", options={"maxiter": 500, "ftol": 1e-14})
    best = min((x_grid, x_zoom, sol.x[: 2 * k]), key=value)
    return value(best), unpack(best)


# ---------------------------------------------------------------------------
# Chebyshev constants


def _points(K) -> np.ndarray:
    return K.points if isinstance(K, CompactSet) else np.asarray(K, dtype=complex)


def _corrections(R: CurveRing, dirs: Sequence[DirectionalPoly], below: int) -> list[BasisFunction]:
    if below <= 0:
        return []
    return c_basis(R, below - 1, a=dirs[0].degree if dirs else R.n0, ndirections=len(dirs))


def _correction_space(R: CurveRing, dirs: Sequence[DirectionalPoly], below: int, pts: np.ndarray):
    """Orthonormal columns spanning the functions of degree ``< below`` on ``pts``.

    Same span as the evaluated C-basis, which is badly conditioned once the
    directional powers differ in size along the curve.  Also returns
    ``ends`` with ``Q[:, :ends[k]]`` spanning degree ``<= k``.
    """
    funcs = _corrections(R, dirs, below)
    counts = [0] * max(below, 0)
    for f in funcs:
        counts[f.degree] += 1
    return graded_basis(pts, counts), np.cumsum(counts)


def _reduced_direction(v: DirectionalPoly, s: int, pts: np.ndarray, Q: np.ndarray, ends) -> np.ndarray:
    """``v_{lam,s}`` minus some function of degree ``< s``, built without cancellation.

    Multiplying by ``z_1`` one degree at a time and projecting out lower
    degrees after each step keeps every intermediate at the size of the
    answer; evaluating ``v_{lam,s}`` directly loses about
    ``log10(max|v_{lam,s}| / tau_s)`` digits.
    """
    f = v.evaluate_many(pts, v.degree)
    for k in range(v.degree, s):
        f = project_out(Q[:, : ends[k]], pts[:, 0] * f)
    return f


def tau_Q(
    R: CurveRing, K, Q: Poly, n: int, dirs: Sequence[DirectionalPoly], tol: float = 1e-10, max_iters: int = 500
) -> ChebResult:
    """``tau(K, Q, n)``: minimise ``max_K |Q^n + r|`` over ``deg r < n deg Q``."""
    if n < 1:
        raise InputError("n must be at least 1")
    if Q.is_zero() or Q.degree < 1:
        raise InputError("Q must have positive degree")
    pts = _points(K)
    target = Q.evaluate_many(pts) ** n
    P = MinimaxProblem(target, _correction_space(R, dirs, n * Q.degree, pts)[0])
    res = minimax_solve(P, tol, max_iters, degree=n * Q.degree)
    res.family = "tauQ"
    return res


def _check_s(v: DirectionalPoly, s: int) -> None:
    if s < v.degree:
        raise InputError(f"s = {s} is below the minimum degree {v.degree} of the directional polynomial")


def tau_s(
    R: CurveRing, K, dirs: Sequence[DirectionalPoly], index: int, s: int, tol: float = 1e-10, max_iters: int = 500
) -> ChebResult:
    """``tau_s(K, lambda)``: target ``v_{lambda,s}``, corrections of degree ``< s``."""
    v = dirs[index]
    _check_s(v, s)
    pts = _points(K)
    Q, ends = _correction_space(R, dirs, s, pts)
    P = MinimaxProblem(_reduced_direction(v, s, pts, Q, ends), Q)
    res = minimax_solve(P, tol, max_iters, degree=s)
    res.family, res.direction = "tau", index
    return res


def t_s(
    R: CurveRing,
    K,
    dirs: Sequence[DirectionalPoly],
    index: int,
    s: int,
    tol: float = 1e-10,
    max_iters: int = 500,
    warm: ChebResult | None = None,
) -> ChebResult:
    """``t_s(K, lambda)``: like :func:`tau_s` with the other ``v_{mu,s}`` as extra corrections.

    ``warm`` (a ``tau_s`` result for the same data) seeds the solve, which
    guarantees ``t_s <= tau_s``.
    """
    v = dirs[index]
    _check_s(v, s)
    pts = _points(K)
    Q, ends = _correction_space(R, dirs, s, pts)
    others = [_reduced_direction(u, s, pts, Q, ends) for k, u in enumerate(dirs) if k != index]
    extra = np.zeros((len(pts), 0), dtype=complex)
    if others:
        extra, _ = np.linalg.qr(np.stack(others, axis=1))
    P = MinimaxProblem(_reduced_direction(v, s, pts, Q, ends), np.concatenate([Q, extra], axis=1))
    init_c = init_w = None
    if warm is not None:
        init_c, init_w = warm.coefficients, warm.weights
    res = minimax_solve(P, tol, max_iters, degree=s, init_coeffs=init_c, init_weights=init_w)
    res.family, res.direction = "t", index
    return res


def chebyshev_table(
    R: CurveRing,
    K,
    dirs: Sequence[DirectionalPoly],
    s_values: Iterable[int],
    families: Sequence[str] = ("tau", "t"),
    threads: int = 1,
    tol: float = 1e-10,
    max_iters: int = 500,
) -> list[ChebResult]:
    """All requested ``(direction, s)`` solves, merged in ``(direction, s, family)`` order."""
    jobs = [(j, s) for j in range(len(dirs)) for s in s_values]

    def run(job):
        j, s = job
        out = []
        tau = tau_s(R, K, dirs, j, s, tol, max_iters)
        if "tau" in families:
            out.append(tau)
        if "t" in families:
            out.append(t_s(R, K, dirs, j, s, tol, max_iters, warm=tau))
        return out

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            chunks = list(ex.map(run, jobs))
    else:
        chunks = [run(j) for j in jobs]
    return [r for chunk in chunks for r in chunk]


@dataclass(frozen=True)
class LimitEstimate:
    last: float
    tail_geomean: float
    diagnostic: float  # max relative successive difference over the tail
    tail_size: int


def estimate_limit(seq: Sequence[tuple[int, float]]) -> LimitEstimate:
    """Limit estimate of a sequence of ``(s, value)`` pairs (sorted by ``s``)."""
    if len(seq) < 3:
        raise ValueError("need at least three terms")
    vals = [v for _, v in sorted(seq)]
    t = max(2, math.ceil(len(vals) / 4))
    tail = np.array(vals[-t:], dtype=float)
    if np.any(tail <= 0):
        geo = 0.0 if np.any(tail == 0) else math.nan
    else:
        geo = float(np.exp(np.mean(np.log(tail))))
    rel = [abs(b - a) / max(abs(a), abs(b), 1e-300) for a, b in zip(tail[:-1], tail[1:])]
    return LimitEstimate(float(vals[-1]), geo, float(max(rel)), t)


# ---------------------------------------------------------------------------
# transformations


@dataclass
class TransformRow:
    direction: int
    image_direction: int
    first_coordinate: complex  # T_1 at the direction
    s: int
    lhs: float  # tau_s on the image curve
    rhs: float  # |T_1| * tau_s on the original curve
    gap: float


def match_directions(T: AffineMap, dirs: Sequence[DirectionalPoly], dirs2: Sequence[DirectionalPoly]) -> list[int]:
    """Index in ``dirs2`` of the image of each direction in ``dirs``."""
    A = T.linear_complex()
    out = []
    for v in dirs:
        w = A @ np.asarray(v.point.coords, dtype=complex)
        w = w / w[0]
        dist = [np.max(np.abs(w - np.asarray(u.point.coords))) for u in dirs2]
        k = int(np.argmin(dist))
        if dist[k] > 1e-6:
            raise InputError(f"image of direction {v.index} is not a direction of the image curve")
        out.append(k)
    return out


def transform_check(
    R: CurveRing,
    K,
    dirs: Sequence[DirectionalPoly],
    T: AffineMap,
    R2: CurveRing,
    K2,
    dirs2: Sequence[DirectionalPoly],
    s: int,
    tol: float = 1e-10,
    max_iters: int = 500,
) -> list[TransformRow]:
    """Compare ``tau_s`` on the image curve with ``|T_1(eta)| tau_s`` on the original.

    ``K2`` must be ``T(K)`` point for point.  The identity is exact for the
    discrete problems, so gaps measure solver accuracy only.
    """
    from .sampler import check_admissible

    t1 = check_admissible(T, [v.point.coords for v in dirs])
    match = match_directions(T, dirs, dirs2)
    rows = []
    for j, v in enumerate(dirs):
        lhs = tau_s(R2, K2, dirs2, match[j], s, tol, max_iters).normalized_constant
        rhs = abs(t1[j]) * tau_s(R, K, dirs, j, s, tol, max_iters).normalized_constant
        gap = abs(lhs - rhs) / max(abs(rhs), 1e-300)
        rows.append(TransformRow(j, match[j], t1[j], s, lhs, rhs, gap))
    return rows


def write_csv(path, results: Sequence[ChebResult], extra: dict | None = None) -> None:
    """One row per solve; ``extra`` (tolerances, seed) is appended to every row."""
    extra = extra or {}
    with open(path, "w", newline="") as fh:
        wr = csv.DictWriter(fh, fieldnames=list(CSV_COLUMNS) + list(extra))
        wr.writeheader()
        for r in results:
            row = r.as_row()
            row.update(extra)
            wr.writerow(row)
