"""Vandermonde determinants, approximate Fekete points and transfinite diameter.

For an ordered basis ``e_1, e_2, ...`` of the coordinate ring and points
``zeta_1..zeta_m`` the Vandermonde determinant is ``det[e_i(zeta_k)]``.
``V_m`` is its sup over ``m``-point subsets of a sample ``K``; the
diameter estimate at degree ``n`` is ``V_{m_n}^{1/l_n}`` where ``m_n`` is the
dimension of polynomials of degree ``<= n`` on the curve and ``l_n`` the sum
of the basis degrees.

Suprema are approximated by greedy LU pivoting plus pairwise exchanges, so
every ``V`` here is a lower estimate of the true discrete sup.
"""

from __future__ import annotations

import csv
import itertools
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .chebyshev import ChebResult, estimate_limit, t_s, tau_s
from .curve import BasisFunction, CurveRing, DirectionalPoly, c_basis, evaluate_basis, monomial_basis
from .errors import InputError, NumericFailure, RankDeficiencyError
from .numeric import LogDet, logdet
from .sampler import AffineMap, CompactSet, check_admissible

log = logging.getLogger(__name__)

__all__ = [
    "FeketeRun",
    "DiameterReport",
    "basis_functions",
    "block_counts",
    "vandermonde_logabs",
    "greedy_fekete",
    "exchange_refine",
    "exhaustive_fekete",
    "diameter_ladder",
    "sandwich_check",
    "monomial_equivalence_check",
    "relative_diameter",
    "transform_law_check",
    "write_ladder_csv",
]

PIVOT_FLOOR = 1e-300
SWAP_GAIN = 1e-12


def _points(K) -> np.ndarray:
    return K.points if isinstance(K, CompactSet) else np.asarray(K, dtype=complex)


def basis_functions(R: CurveRing, n: int, kind: str, dirs: Sequence[DirectionalPoly] = ()) -> list[BasisFunction]:
    """Ordered basis of polynomials of degree ``<= n``: ``"C"`` (directional) or ``"monomial"``."""
    if kind == "C":
        return c_basis(R, n, a=dirs[0].degree if dirs else R.n0, ndirections=len(dirs) or R.d)
    if kind == "monomial":
        return monomial_basis(R, n)
    raise InputError(f"unknown basis kind {kind!r}")


def block_counts(funcs: Sequence[BasisFunction], n: int) -> tuple[int, int]:
    """``(m_n, l_n)``: number of basis elements of degree ``<= n`` and the sum of their degrees."""
    sel = [f.degree for f in funcs if f.degree <= n]
    return len(sel), sum(sel)


@dataclass
class FeketeRun:
    basis_kind: str
    selected: list  # greedy order, indices into K
    log_V: list  # log|Van| of the best set found for each prefix length 1..m
    prefix_sets: list = field(default_factory=list)  # best index set per prefix length
    n_markers: list = field(default_factory=list)  # m_n for n = 0, 1, ...
    l_n: list = field(default_factory=list)
    refined: bool = False

    def log_V_at(self, m: int) -> float:
        return self.log_V[m - 1] if m > 0 else 0.0


def vandermonde_logabs(
    points, R: CurveRing, kind: str = "C", dirs: Sequence[DirectionalPoly] = (), funcs=None
) -> LogDet:
    """``log|det[e_i(zeta_k)]|`` over the first ``len(points)`` basis elements."""
    pts = np.asarray(points, dtype=complex)
    m = pts.shape[0]
    if m == 0:
        return LogDet(0.0, 1 + 0j)
    if funcs is None:
        n = 0
        while block_counts(basis_functions(R, n, kind, dirs), n)[0] < m:
            n += 1
        funcs = basis_functions(R, n, kind, dirs)
    return logdet(evaluate_basis(list(funcs)[:m], pts, dirs))


def _scaled_evals(funcs, pts, dirs):
    E = evaluate_basis(funcs, pts, dirs)
    scale = np.max(np.abs(E), axis=0)
    if np.any(scale == 0):
        raise RankDeficiencyError(int(np.argmin(scale)), "a basis function vanishes on the whole sample")
    return E / scale, np.log(scale)


def greedy_fekete(
    K, m_target: int, R: CurveRing, kind: str = "C", dirs: Sequence[DirectionalPoly] = (), funcs=None
) -> FeketeRun:
    """Greedy Fekete selection by LU with row pivoting on the ``|K| x m`` evaluation matrix.

    Step ``j`` picks the unused point whose evaluation of basis element ``j``,
    after elimination against the points already chosen, is largest; that
    residual is the factor by which ``|Van|`` grows.  Ties go to the lowest
    index.
    """
    pts = _points(K)
    M = pts.shape[0]
    if M < m_target:
        raise InputError(f"sample has {M} points, fewer than the {m_target} requested")
    if funcs is None:
        n = 0
        while block_counts(basis_functions(R, n, kind, dirs), n)[0] < m_target:
            n += 1
        funcs = basis_functions(R, n, kind, dirs)
    funcs = list(funcs)[:m_target]
    W, logscale = _scaled_evals(funcs, pts, dirs)
    used = np.zeros(M, dtype=bool)
    selected, log_V = [], []
    total = 0.0
    for j in range(m_target):
        col = np.abs(W[:, j])
        col[used] = -1.0
        p = int(np.argmax(col))
        piv = W[p, j]
        if abs(piv) <= PIVOT_FLOOR:
            raise RankDeficiencyError(j, f"sample cannot support basis element {j} ({funcs[j].label})")
        total += math.log(abs(piv)) + logscale[j]
        selected.append(p)
        log_V.append(total)
        used[p] = True
        if j + 1 < m_target:
            W[:, j + 1 :] -= np.outer(W[:, j] / piv, W[p, j + 1 :])
    run = FeketeRun(kind, selected, log_V, [list(selected[: m + 1]) for m in range(m_target)])
    _attach_markers(run, funcs)
    return run


def _attach_markers(run: FeketeRun, funcs) -> None:
    top = max((f.degree for f in funcs), default=0)
    run.n_markers, run.l_n = [], []
    for n in range(top + 1):
        m, l = block_counts(funcs, n)
        if m > len(run.log_V):
            break
        run.n_markers.append(m)
        run.l_n.append(l)


def _refine_set(E: np.ndarray, S: list[int], passes: int) -> tuple[list[int], float]:
    """Pairwise exchange on one prefix.  ``E`` is the scaled ``|K| x m`` matrix."""
    S = list(S)
    m = len(S)
    gain_total = 0.0
    for _ in range(passes):
        swapped = False
        for pos in range(m):
            Wm = E[S, :]
            try:
                B = np.linalg.solve(Wm.T, E.T).T  # B[p, s]: det factor for replacing S[s] by p
            except np.linalg.LinAlgError:
                return S, gain_total
            col = np.abs(B[:, pos])
            col[S] = 0.0
            p = int(np.argmax(col))
            if col[p] > 0 and math.log(col[p]) > SWAP_GAIN:
                gain_total += math.log(col[p])
                S[pos] = p
                swapped = True
        if not swapped:
            break
    return S, gain_total


def exchange_refine(
    run: FeketeRun, K, R: CurveRing, dirs: Sequence[DirectionalPoly] = (), passes: int = 8, funcs=None
) -> FeketeRun:
    """Improve every prefix of a greedy run by single-point exchanges.

    For each prefix length ``m`` the start is the better of the greedy prefix
    and the refined ``(m-1)``-set plus its best extension.  A backward pass
    then lifts each ``V_{m-1}`` to at least the best ``(m-1)``-subset of the
    ``m``-set.  All values are monotone non-decreasing against the greedy run.
    """
    pts = _points(K)
    m_target = len(run.log_V)
    if funcs is None:
        n = 0
        while block_counts(basis_functions(R, n, run.basis_kind, dirs), n)[0] < m_target:
            n += 1
        funcs = basis_functions(R, n, run.basis_kind, dirs)
    funcs = list(funcs)[:m_target]
    E, logscale = _scaled_evals(funcs, pts, dirs)
    csum = np.cumsum(logscale)

    def logabs(S, m):
        ld = logdet(E[S, :m])
        return -math.inf if ld.zero else ld.log_abs

    sets: list[list[int]] = []
    vals: list[float] = []
    for m in range(1, m_target + 1):
        greedy = list(run.prefix_sets[m - 1]) if run.prefix_sets else list(run.selected[:m])
        cands = [greedy]
        if sets:
            prev = sets[-1]
            # best extension of the previous refined set
            Wm = E[prev, : m - 1]
            if m > 1:
                coef = np.linalg.solve(Wm.T, E[:, : m - 1].T).T
                resid = np.abs(E[:, m - 1] - coef @ E[prev, m - 1])
            else:
                resid = np.abs(E[:, 0]).copy()
            resid[prev] = -1.0
            cands.append(prev + [int(np.argmax(resid))])
        scored = [(logabs(S, m), S) for S in cands]
        base_val, S = max(scored, key=lambda x: x[0])
        S, _ = _refine_set(E[:, :m], S, passes)
        v = logabs(S, m)
        if v < base_val:  # rounding guard: never worse than the start
            v = base_val
            S = max(scored, key=lambda x: x[0])[1]
        sets.append(S)
        vals.append(v)
    # backward pass: V_{m-1} >= max_s |Van(S_m minus one point)|
    for m in range(m_target, 1, -1):
        S = sets[m - 1]
        for drop in range(m):
            T = S[:drop] + S[drop + 1 :]
            v = logabs(T, m - 1)
            if v > vals[m - 2]:
                vals[m - 2], sets[m - 2] = v, T
    greedy_vals = [v - csum[m] for m, v in enumerate(run.log_V)]
    log_V = [max(v, g) + csum[m] for m, (v, g) in enumerate(zip(vals, greedy_vals))]
    out = FeketeRun(run.basis_kind, list(run.selected), log_V, sets, run.n_markers, run.l_n, True)
    return out


def exhaustive_fekete(K, m: int, R: CurveRing, kind: str = "C", dirs: Sequence[DirectionalPoly] = ()) -> tuple[float, tuple]:
    """Exact discrete ``V_m``: maximum ``log|Van|`` over all ``m``-subsets of ``K``."""
    pts = _points(K)
    n = 0
    while block_counts(basis_functions(R, n, kind, dirs), n)[0] < m:
        n += 1
    funcs = basis_functions(R, n, kind, dirs)[:m]
    E = evaluate_basis(funcs, pts, dirs)
    combos = np.array(list(itertools.combinations(range(len(pts)), m)), dtype=int)
    best, arg = -math.inf, ()
    for chunk in np.array_split(combos, max(1, len(combos) // 20000)):
        mats = E[chunk]  # (c, m, m)
        dets = np.abs(np.linalg.det(mats))
        k = int(np.argmax(dets))
        if dets[k] > 0 and math.log(dets[k]) > best:
            best, arg = math.log(dets[k]), tuple(int(i) for i in chunk[k])
    return best, arg


# ---------------------------------------------------------------------------
# diameter ladder


@dataclass
class LadderRow:
    n: int
    m_n: int
    l_n: int
    log_V: float
    d_n: float
    cheb_side: float
    gap: float


@dataclass
class SandwichRow:
    n: int
    j: int
    m: int
    log_ratio: float  # log(V_{n,j} / V_{n,j-1})
    log_lower: float  # (n+1) log t_{n+1}(lambda_j)
    log_upper: float  # log(m_n + j) + (n+1) log tau_{n+1}(lambda_j)
    lower_ok: bool
    upper_ok: bool
    exhaustive: bool

    @property
    def status(self) -> str:
        if self.lower_ok and self.upper_ok:
            return "PASS"
        if self.exhaustive or not self.upper_ok:
            return "FAIL"
        return "SOFT-FAIL"


@dataclass
class DiameterReport:
    rows: list
    run: FeketeRun
    tau: dict  # (direction, s) -> ChebResult
    t: dict
    sandwich: list = field(default_factory=list)
    limits: dict = field(default_factory=dict)
    sample_warning: str = ""

    def row(self, n: int) -> LadderRow:
        for r in self.rows:
            if r.n == n:
                return r
        raise KeyError(n)

    def summary(self) -> dict:
        return {
            "rows": [r.__dict__ for r in self.rows],
            "sandwich": [dict(s.__dict__, status=s.status) for s in self.sandwich],
            "limits": self.limits,
            "sample_warning": self.sample_warning,
        }


def _cheb_side(tau: dict, ndirs: int, s: int) -> float:
    logs = [math.log(tau[(j, s)].normalized_constant) for j in range(ndirs)]
    return math.exp(sum(logs) / ndirs)


def diameter_ladder(
    K,
    n_max: int,
    R: CurveRing,
    dirs: Sequence[DirectionalPoly],
    refine: bool = True,
    passes: int = 8,
    with_t: bool = True,
    cheb_tol: float = 1e-10,
    threads: int = 1,
) -> DiameterReport:
    """Fekete run to ``m_{n_max} + d`` points, ``d_n`` at every degree, and the Chebyshev side.

    The Chebyshev side at degree ``n`` is the geometric mean over directions
    of ``tau_n``; ``tau_{n+1}`` and ``t_{n+1}`` also feed the sandwich check.
    """
    from concurrent.futures import ThreadPoolExecutor

    pts = _points(K)
    d = len(dirs)
    a = dirs[0].degree
    funcs = basis_functions(R, n_max + 1, "C", dirs)
    m_nmax, _ = block_counts(funcs, n_max)
    m_target = m_nmax + d
    warn = ""
    if len(pts) < 3 * m_nmax:
        warn = f"sample of {len(pts)} points is below 3*m_n = {3 * m_nmax}"
        log.warning(warn)
    run = greedy_fekete(pts, m_target, R, "C", dirs, funcs)
    if refine:
        run = exchange_refine(run, pts, R, dirs, passes, funcs)
    run.n_markers, run.l_n = [], []
    for n in range(n_max + 2):
        m, l = block_counts(funcs, n)
        run.n_markers.append(m)
        run.l_n.append(l)

    s_values = list(range(max(a, 1), n_max + 2))
    jobs = [(j, s) for j in range(d) for s in s_values]

    def solve(job):
        j, s = job
        tr = tau_s(R, pts, dirs, j, s, cheb_tol)
        tt = t_s(R, pts, dirs, j, s, cheb_tol, warm=tr) if with_t else None
        return tr, tt

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            out = list(ex.map(solve, jobs))
    else:
        out = [solve(j) for j in jobs]
    tau = {job: o[0] for job, o in zip(jobs, out)}
    tv = {job: o[1] for job, o in zip(jobs, out) if o[1] is not None}

    rows = []
    for n in range(1, n_max + 1):
        m, l = run.n_markers[n], run.l_n[n]
        if l == 0:
            continue
        lv = run.log_V_at(m)
        dn = math.exp(lv / l)
        cs = _cheb_side(tau, d, n) if n >= max(a, 1) else math.nan
        gap = abs(math.log(dn) - math.log(cs)) if cs == cs else math.nan
        rows.append(LadderRow(n, m, l, lv, dn, cs, gap))
    report = DiameterReport(rows, run, tau, tv, sample_warning=warn)
    report.sandwich = sandwich_check(report, R, dirs)
    for j in range(d):
        seq = [(s, tau[(j, s)].normalized_constant) for s in s_values if s <= n_max]
        if len(seq) >= 3:
            report.limits[j] = estimate_limit(seq).__dict__
    return report


def sandwich_check(
    report: DiameterReport, R: CurveRing, dirs: Sequence[DirectionalPoly], exhaustive_logV: dict | None = None,
    slack: float = 1e-9,
) -> list[SandwichRow]:
    """Both bounds on ``V_{n,j}/V_{n,j-1}`` for ``n > a``, ``j = 1..d``, in log form.

    ``exhaustive_logV`` maps prefix length to an exact ``log V``; when given
    for both ends the row is marked exhaustive and a lower-bound failure is
    a hard failure.
    """
    a = dirs[0].degree
    d = len(dirs)
    run = report.run
    rows = []
    for n in range(a + 1, len(run.n_markers) - 1):
        m_n = run.n_markers[n]
        for j in range(1, d + 1):
            m = m_n + j
            if m > len(run.log_V) or (j - 1, n + 1) not in report.tau:
                continue
            exh = exhaustive_logV is not None and m in exhaustive_logV and (m - 1) in exhaustive_logV
            if exh:
                ratio = exhaustive_logV[m] - exhaustive_logV[m - 1]
            else:
                ratio = run.log_V_at(m) - run.log_V_at(m - 1)
            tau = report.tau[(j - 1, n + 1)].minimax_value
            tval = report.t[(j - 1, n + 1)].minimax_value if (j - 1, n + 1) in report.t else tau
            lo = math.log(tval) if tval > 0 else -math.inf
            hi = math.log(m) + (math.log(tau) if tau > 0 else -math.inf)
            rows.append(SandwichRow(n, j, m, ratio, lo, hi, ratio >= lo - slack, ratio <= hi + slack, exh))
    return rows


# ---------------------------------------------------------------------------
# further diagnostics


@dataclass
class EquivalenceRow:
    n: int
    l_n: int
    log_van_C: float
    log_van_mono: float
    delta: float
    d_n_C: float
    d_n_mono: float


def monomial_equivalence_check(report: DiameterReport, K, R: CurveRing, dirs: Sequence[DirectionalPoly]) -> dict:
    """Compare C-basis and monomial-basis Vandermondes on the same point sets.

    The difference of logs is exactly affine in ``n`` once ``n >= a``; the
    report gives the fitted slope, the fit residual and ``|delta|/l_n``.
    """
    pts = _points(K)
    run = report.run
    n_max = report.rows[-1].n
    mono = basis_functions(R, n_max, "monomial", dirs)
    cb = basis_functions(R, n_max, "C", dirs)
    rows = []
    for r in report.rows:
        S = run.prefix_sets[r.m_n - 1]
        lc = logdet(evaluate_basis(cb[: r.m_n], pts[S], dirs))
        lm = logdet(evaluate_basis(mono[: r.m_n], pts[S], dirs))
        if lc.zero or lm.zero:
            raise NumericFailure(f"singular Vandermonde at n = {r.n}")
        delta = lc.log_abs - lm.log_abs
        rows.append(EquivalenceRow(r.n, r.l_n, lc.log_abs, lm.log_abs, delta,
                                   math.exp(lc.log_abs / r.l_n), math.exp(lm.log_abs / r.l_n)))
    a = dirs[0].degree
    fit = [r for r in rows if r.n >= a]
    slope = resid = 0.0
    if len(fit) >= 2:
        x = np.array([r.n for r in fit], float)
        y = np.array([r.delta for r in fit])
        coef = np.polyfit(x, y, 1)
        slope = float(coef[0])
        resid = float(np.max(np.abs(np.polyval(coef, x) - y)))
    return {
        "rows": [r.__dict__ for r in rows],
        "slope": slope,
        "fit_residual": resid,
        "relative_delta": [abs(r.delta) / r.l_n for r in rows],
    }


def relative_diameter(
    K1, K2, n_max: int, R: CurveRing, dirs: Sequence[DirectionalPoly], refine: bool = True
) -> float:
    """``exp(log d_n(K1) - log d_n(K2))`` at ``n = n_max`` with identical ladders."""
    r1 = diameter_ladder(K1, n_max, R, dirs, refine=refine, with_t=False)
    r2 = diameter_ladder(K2, n_max, R, dirs, refine=refine, with_t=False)
    d1, d2 = r1.row(n_max).d_n, r2.row(n_max).d_n
    if not d2 > 1e-300:
        raise NumericFailure("diameter estimate of the reference set is zero")
    return math.exp(math.log(d1) - math.log(d2))


def diameter_only(K, n_max: int, R: CurveRing, dirs, refine: bool = True, passes: int = 8) -> float:
    """``d_{n_max}`` from a (refined) Fekete run, without Chebyshev solves."""
    funcs = basis_functions(R, n_max, "C", dirs)
    m, l = block_counts(funcs, n_max)
    run = greedy_fekete(K, m, R, "C", dirs, funcs)
    if refine:
        run = exchange_refine(run, K, R, dirs, passes, funcs)
    return math.exp(run.log_V_at(m) / l)


def transform_law_check(
    K, K2, T: AffineMap, n_max: int, R: CurveRing, dirs, R2: CurveRing, dirs2, refine: bool = True
) -> dict:
    """``d`` of ``T(K)`` on ``T(V)`` against ``d`` of ``K`` on ``V`` at ``n_max``.

    ``root_law`` predicts the factor ``(prod |T_1(lambda_j)|)^(1/d)``;
    ``literal_law`` the factor ``prod T_1(lambda_j)`` (modulus taken).
    """
    t1 = check_admissible(T, [v.point.coords for v in dirs])
    d = len(dirs)
    lhs = diameter_only(K2, n_max, R2, dirs2, refine)
    base = diameter_only(K, n_max, R, dirs, refine)
    prod = float(np.prod([abs(x) for x in t1]))
    root = base * prod ** (1.0 / d)
    literal = base * abs(complex(np.prod(t1)))
    return {
        "n": n_max,
        "T1": [[x.real, x.imag] for x in t1],
        "d_image": lhs,
        "d_original": base,
        "root_law": root,
        "root_gap": abs(lhs - root) / root,
        "literal_law": literal,
        "literal_gap": abs(lhs - literal) / literal,
    }


def write_ladder_csv(path, report: DiameterReport, extra: dict | None = None) -> None:
    extra = extra or {}
    cols = ["n", "m_n", "l_n", "log_V_n", "d_n", "cheb_side", "gap"] + list(extra)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(cols)
        for r in report.rows:
            wr.writerow([r.n, r.m_n, r.l_n, repr(r.log_V), repr(r.d_n), repr(r.cheb_side), repr(r.gap)]
                        + [extra[k] for k in extra])


def write_summary_json(path, report: DiameterReport, extra: dict | None = None) -> None:
    data = report.summary()
    if extra:
        data.update(extra)
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, default=str)
