from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from curvecap.curve import build_ring, directions, evaluate_basis
from curvecap.errors import InputError, RankDeficiencyError
from curvecap.fekete import (
    basis_functions,
    block_counts,
    diameter_ladder,
    exchange_refine,
    exhaustive_fekete,
    greedy_fekete,
    monomial_equivalence_check,
    relative_diameter,
    sandwich_check,
    transform_law_check,
    vandermonde_logabs,
    write_ladder_csv,
)
from curvecap.numeric import logdet
from curvecap.sampler import AffineMap, apply_affine, build_set, rational_circle


@pytest.fixture(scope="module")
def line64(line):
    return build_set(line[0].G, rational_circle(64))


def test_vandermonde_small_cases(line):
    R, dirs = line
    assert vandermonde_logabs(np.array([[2, 2]]), R, "C", dirs).log_abs == 0
    pts = np.array([[1j, 1j], [3, 3]])
    assert vandermonde_logabs(pts, R, "C", dirs).log_abs == pytest.approx(math.log(abs(3 - 1j)))
    assert vandermonde_logabs(np.array([[1, 1], [1, 1]]), R, "C", dirs).zero


def test_vandermonde_permutation_invariance(hyperbola, hyperbola_K):
    R, dirs = hyperbola
    rng = np.random.default_rng(5)
    pts = hyperbola_K.points[rng.choice(len(hyperbola_K), 7, replace=False)]
    base = vandermonde_logabs(pts, R, "C", dirs)
    for _ in range(5):
        perm = vandermonde_logabs(pts[rng.permutation(7)], R, "C", dirs)
        assert perm.log_abs == pytest.approx(base.log_abs, abs=1e-12)
        assert abs(abs(perm.phase / base.phase) - 1) < 1e-12
        assert min(abs(perm.phase / base.phase - 1), abs(perm.phase / base.phase + 1)) < 1e-9


def test_row_operations_leave_determinant(hyperbola, hyperbola_K):
    R, dirs = hyperbola
    funcs = basis_functions(R, 3, "C", dirs)
    pts = hyperbola_K.points[:len(funcs)]
    E = evaluate_basis(funcs, pts, dirs)
    rng = np.random.default_rng(2)
    F = E.copy()
    for j in range(1, E.shape[1]):
        F[:, j] += E[:, :j] @ (rng.normal(size=j) + 1j * rng.normal(size=j))
    assert logdet(F).log_abs == pytest.approx(logdet(E).log_abs, abs=1e-10)


def test_greedy_two_points_are_antipodal(line, line64):
    R, dirs = line
    run = greedy_fekete(line64, 2, R, "C", dirs)
    assert run.log_V[0] == 0
    assert run.log_V[1] == pytest.approx(math.log(2), abs=1e-6)


def test_greedy_three_points_against_exhaustive(line, line64):
    R, dirs = line
    best, _ = exhaustive_fekete(line64, 3, R, "C", dirs)
    run = greedy_fekete(line64, 3, R, "C", dirs)
    gap = abs(run.log_V[2] - best)
    assert gap <= 0.05, (
        f"greedy log V_3 is {gap:.4f} below the exhaustive optimum: an antipodal first pair "
        "caps greedy V_3 at 4, the equilateral optimum is 3*sqrt(3)"
    )


def test_refined_three_points_match_exhaustive(line, line64):
    R, dirs = line
    best, _ = exhaustive_fekete(line64, 3, R, "C", dirs)
    refined = exchange_refine(greedy_fekete(line64, 3, R, "C", dirs), line64, R, dirs)
    assert abs(refined.log_V[2] - best) <= 1e-9


def test_refined_equals_exhaustive_small_hyperbola(hyperbola):
    R, dirs = hyperbola
    K = build_set(R.G, rational_circle(20))
    run = exchange_refine(greedy_fekete(K, 3, R, "C", dirs), K, R, dirs)
    for m in (1, 2, 3):
        best, _ = exhaustive_fekete(K, m, R, "C", dirs)
        assert abs(run.log_V[m - 1] - best) <= 1e-9


def test_refinement_is_monotone(hyperbola, hyperbola_K):
    R, dirs = hyperbola
    K = hyperbola_K.points[np.random.default_rng(11).permutation(len(hyperbola_K))]
    run = greedy_fekete(K, 15, R, "C", dirs)
    refined = exchange_refine(run, K, R, dirs, passes=3)
    assert all(r >= g for r, g in zip(refined.log_V, run.log_V))
    # stored sets realise the stored values
    funcs = basis_functions(R, 7, "C", dirs)
    for m in (5, 10, 15):
        S = refined.prefix_sets[m - 1]
        assert logdet(evaluate_basis(funcs[:m], K[S], dirs)).log_abs == pytest.approx(refined.log_V[m - 1])


def test_single_point_run_unchanged(line, line64):
    R, dirs = line
    run = greedy_fekete(line64, 1, R, "C", dirs)
    assert exchange_refine(run, line64, R, dirs).log_V == run.log_V == [0.0]


def test_sample_too_small_or_degenerate(line):
    R, dirs = line
    with pytest.raises(InputError):
        greedy_fekete(np.array([[1, 1]]), 2, R, "C", dirs)
    with pytest.raises(RankDeficiencyError):
        greedy_fekete(np.array([[1, 1]] * 3), 2, R, "C", dirs)


def test_block_structure(hyperbola, space_ring):
    for R, dirs in (hyperbola, (space_ring, directions(space_ring))):
        a = dirs[0].degree
        funcs = basis_functions(R, 9, "C", dirs)
        for n in range(a, 9):
            m0, _ = block_counts(funcs, n)
            m1, l1 = block_counts(funcs, n + 1)
            assert m1 - m0 == R.d
            assert l1 == sum(f.degree for f in funcs[:m1])


def test_line_ladder_and_exhaustive_sandwich(line):
    R, dirs = line
    K = build_set(R.G, rational_circle(32))
    rep = diameter_ladder(K, 3, R, dirs)
    exact = {m: exhaustive_fekete(K, m, R, "C", dirs)[0] for m in range(1, 6)}
    rows = sandwich_check(rep, R, dirs, exhaustive_logV=exact)
    assert [(r.n, r.j) for r in rows] == [(1, 1), (2, 1), (3, 1)]
    for r in rows:
        assert r.exhaustive and r.status == "PASS", r
    for n in (1, 2, 3):
        assert rep.run.n_markers[n] + 1 == rep.run.n_markers[n + 1]


def test_hyperbola_upper_bound_on_refined_runs(hyperbola, hyperbola_K):
    R, dirs = hyperbola
    rep = diameter_ladder(hyperbola_K, 8, R, dirs)
    assert rep.sandwich
    assert all(r.upper_ok for r in rep.sandwich)
    assert all(math.isfinite(r.d_n) and r.d_n > 0 for r in rep.rows)


def test_monomial_equivalence(line, line64, hyperbola, hyperbola_K):
    R, dirs = line
    rep = diameter_ladder(line64, 6, R, dirs, with_t=False)
    eq = monomial_equivalence_check(rep, line64, R, dirs)
    assert all(abs(r["delta"]) < 1e-12 for r in eq["rows"])

    R, dirs = hyperbola
    rep = diameter_ladder(hyperbola_K, 10, R, dirs, with_t=False)
    eq = monomial_equivalence_check(rep, hyperbola_K, R, dirs)
    assert eq["fit_residual"] < 1e-9
    rel = eq["relative_delta"]
    assert rel[-1] < rel[2]


def test_relative_diameter(line, line64):
    R, dirs = line
    assert relative_diameter(line64, line64, 12, R, dirs) == 1.0
    K2 = build_set(R.G, rational_circle(64, 2))
    assert relative_diameter(K2, line64, 12, R, dirs) == pytest.approx(2, rel=0.03)
    r = Fraction(math.sqrt(0.5)).limit_denominator(10**6)
    Kb = build_set(R.G, rational_circle(64, r))
    assert relative_diameter(line64, Kb, 12, R, dirs) == pytest.approx(math.sqrt(2), rel=0.03)


def test_transform_law_identity_and_dilation(line, line64):
    R, dirs = line
    T = AffineMap.identity(2)
    I2, K2 = apply_affine(T, line64, R.G)
    R2 = build_ring(I2)
    law = transform_law_check(line64, K2, T, 8, R, dirs, R2, directions(R2))
    assert law["root_gap"] == 0 and law["literal_gap"] == 0

    T = AffineMap(((2, 0), (0, 2)), ())
    I2, K2 = apply_affine(T, line64, R.G)
    R2 = build_ring(I2)
    law = transform_law_check(line64, K2, T, 8, R, dirs, R2, directions(R2))
    assert law["d_image"] == pytest.approx(2 * law["d_original"], rel=1e-9)
    assert law["root_gap"] < 1e-9


def test_space_curve_smoke(space_ring):
    dirs = directions(space_ring)
    K = build_set(space_ring.G, rational_circle(32))
    rep = diameter_ladder(K, 10, space_ring, dirs, with_t=False)
    assert not rep.sample_warning
    assert all(math.isfinite(r.d_n) and r.d_n > 0 for r in rep.rows)


def test_ladder_csv(tmp_path, line, line64):
    R, dirs = line
    rep = diameter_ladder(line64, 4, R, dirs, with_t=False)
    path = tmp_path / "f.csv"
    write_ladder_csv(path, rep, {"seed": 0})
    lines = path.read_text().splitlines()
    assert lines[0] == "n,m_n,l_n,log_V_n,d_n,cheb_side,gap,seed"
    assert len(lines) == 5
