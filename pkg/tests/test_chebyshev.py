from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from curvecap.chebyshev import (
    _correction_space,
    _reduced_direction,
    MinimaxProblem,
    brute_force_minimax,
    chebyshev_table,
    estimate_limit,
    minimax_solve,
    tau_Q,
    tau_s,
    t_s,
    transform_check,
    write_csv,
)
from curvecap.curve import build_ring, c_basis, directions, evaluate_basis
from curvecap.errors import InputError
from curvecap.poly import parse_poly
from curvecap.sampler import AffineMap, apply_affine, build_set, rational_circle

from conftest import random_minimax_instance


def recomputed(P, res):
    return float(P.residual(res.coefficients).max())


def test_no_corrections_on_circle():
    z = np.exp(2j * np.pi * np.arange(32) / 32)
    res = minimax_solve(MinimaxProblem(z**5, np.zeros((32, 0))))
    assert res.minimax_value == pytest.approx(1.0)


def test_monic_degree_one_on_symmetric_grid():
    t = np.linspace(-1, 1, 41)
    res = minimax_solve(MinimaxProblem(t, np.ones((41, 1))))
    assert res.minimax_value == pytest.approx(1.0, abs=1e-10)
    assert abs(res.coefficients[0]) < 1e-8


def test_degree_two_gives_classical_chebyshev():
    t = np.linspace(-1, 1, 401)
    res = minimax_solve(MinimaxProblem(t**2, np.stack([np.ones_like(t), t], axis=1)))
    assert res.converged
    assert res.minimax_value == pytest.approx(0.5, abs=1e-9)
    assert res.coefficients == pytest.approx([0.5, 0], abs=1e-7)


def test_too_few_points():
    with pytest.raises(InputError):
        MinimaxProblem(np.ones(2), np.ones((2, 3)))


@pytest.mark.parametrize("seed", range(12))
def test_agrees_with_brute_force(seed):
    P = random_minimax_instance(np.random.default_rng(seed))
    res = minimax_solve(P)
    ref, _ = brute_force_minimax(P)
    assert res.minimax_value == recomputed(P, res)
    assert abs(res.minimax_value - ref) <= 1e-4 * max(ref, 1.0)
    assert res.lower_bound <= res.minimax_value


def test_more_corrections_never_worse():
    rng = np.random.default_rng(3)
    z = np.exp(2j * np.pi * rng.random(50)) * rng.uniform(0.5, 1.2, 50)
    target = z**4
    prev = math.inf
    for k in range(5):
        A = np.stack([z**j for j in range(k)], axis=1) if k else np.zeros((50, 0))
        v = minimax_solve(MinimaxProblem(target, A)).minimax_value
        assert v <= prev + 1e-12
        prev = v


def test_line_constants_are_one(line, line_K):
    R, dirs = line
    for s in (1, 5, 20):
        tau = tau_s(R, line_K, dirs, 0, s)
        t = t_s(R, line_K, dirs, 0, s, warm=tau)
        assert tau.normalized_constant == pytest.approx(1.0, abs=1e-9)
        assert t.minimax_value == pytest.approx(tau.minimax_value, rel=1e-12)
    Q = parse_poly("z1", 2)
    for n in (1, 3, 7):
        assert tau_Q(R, line_K, Q, n, dirs).normalized_constant == pytest.approx(1.0, abs=1e-9)


def test_family_identities(hyperbola, hyperbola_K):
    R, dirs = hyperbola
    K = hyperbola_K
    Q = parse_poly("z2 + 2*z1", 2)
    Qhat = parse_poly("z2 + 2*z1 - 3/2", 2)
    alpha = Fraction(-5, 2)
    for n in (1, 2, 4):
        a = tau_Q(R, K, Q, n, dirs)
        b = tau_Q(R, K, Qhat, n, dirs)
        c = tau_Q(R, K, Q.scale(alpha), n, dirs)
        assert abs(a.minimax_value - b.minimax_value) <= 1e-10 * max(1, a.minimax_value)
        assert c.minimax_value == pytest.approx(abs(alpha) ** n * a.minimax_value, rel=1e-9)


def test_t_never_exceeds_tau(hyperbola, hyperbola_K):
    R, dirs = hyperbola
    rows = chebyshev_table(R, hyperbola_K, dirs, range(1, 9))
    by = {(r.direction, r.degree, r.family): r for r in rows}
    for j in range(2):
        for s in range(1, 9):
            assert by[(j, s, "t")].minimax_value <= by[(j, s, "tau")].minimax_value


def test_padding_by_z1_leaves_constants(hyperbola, hyperbola_K):
    R, dirs = hyperbola
    padded = [v.padded(1) for v in dirs]
    for s in range(2, 8):
        for j in range(2):
            a = tau_s(R, hyperbola_K, dirs, j, s).normalized_constant
            b = tau_s(R, hyperbola_K, padded, j, s).normalized_constant
            assert abs(a - b) <= 1e-9


def test_s_below_directional_degree(space_ring):
    dirs = directions(space_ring)
    K = build_set(space_ring.G, rational_circle(4))
    with pytest.raises(InputError, match=str(dirs[0].degree)):
        tau_s(space_ring, K, dirs, 0, 1)


def test_space_curve_power_bound(space_ring):
    """For s = n*a + r with 0 < r < a, z1^(a-r) times a degree-s competitor is a competitor for v^(n+1)."""
    R = space_ring
    dirs = directions(R)
    a = dirs[0].degree
    K = build_set(R.G, rational_circle(16))
    pts = K.points
    z1 = float(np.abs(pts[:, 0]).max())
    for s in (3, 5):
        n, r = divmod(s, a)
        assert 0 < r < a
        for j, v in enumerate(dirs):
            lhs = z1 ** (a - r) * tau_s(R, K, dirs, j, s).minimax_value
            funcs = c_basis(R, (n + 1) * a - 1, a=a, ndirections=len(dirs))
            P = MinimaxProblem(v.evaluate_many(pts) ** (n + 1), evaluate_basis(funcs, pts, dirs))
            rhs = minimax_solve(P).minimax_value
            assert lhs >= rhs - 1e-9 * max(1.0, rhs)


def test_transform_identity_and_dilation(line, line_K, hyperbola, hyperbola_K):
    R, dirs = hyperbola
    T = AffineMap.identity(2)
    I2, K2 = apply_affine(T, hyperbola_K, R.G)
    R2 = build_ring(I2)
    rows = transform_check(R, hyperbola_K, dirs, T, R2, K2, directions(R2), 6)
    assert all(r.gap == 0 for r in rows)

    R, dirs = line
    T = AffineMap(((2, 0), (0, 2)), ())
    I2, K2 = apply_affine(T, line_K, R.G)
    R2 = build_ring(I2)
    (row,) = transform_check(R, line_K, dirs, T, R2, K2, directions(R2), 10)
    assert row.lhs == pytest.approx(2.0, rel=1e-9)
    assert row.gap < 1e-9


def test_estimate_limit():
    e = estimate_limit([(1, 1.0), (2, 1.0), (3, 1.0)])
    assert (e.last, e.tail_geomean, e.diagnostic) == (1.0, 1.0, 0.0)
    seq = [(s, 2 * (1 + 1 / s)) for s in range(1, 41)]
    e = estimate_limit(seq)
    assert abs(e.tail_geomean - 2) < 2 * (1 / 31 - 1 / 40) + 2 / 31
    with pytest.raises(ValueError):
        estimate_limit([(1, 1.0)])


def test_csv_columns(tmp_path, line, line_K):
    R, dirs = line
    path = tmp_path / "c.csv"
    write_csv(path, chebyshev_table(R, line_K, dirs, [1, 2]), {"seed": 0})
    head = path.read_text().splitlines()[0].split(",")
    assert head == ["direction_index", "s", "family", "raw_value", "normalized_constant", "iterations",
                    "converged", "seed"]


def test_reduced_target_matches_direct_evaluation_modulo_lower_degrees(hyperbola):
    R, dirs = hyperbola
    pts = build_set(R.G, rational_circle(32)).points
    Q, ends = _correction_space(R, dirs, 8, pts)
    direct = evaluate_basis(c_basis(R, 7), pts, dirs)
    assert np.abs(direct - Q @ (Q.conj().T @ direct)).max() < 1e-10 * np.abs(direct).max()
    for v in dirs:
        raw = v.evaluate_many(pts, 8)
        diff = _reduced_direction(v, 8, pts, Q, ends) - raw
        assert np.abs(diff - Q @ (Q.conj().T @ diff)).max() < 1e-10 * np.abs(raw).max()


def test_sheared_hyperbola_small_direction_survives_high_degree(hyperbola):
    R, dirs = hyperbola
    K = build_set(R.G, rational_circle(64))
    T = AffineMap(((1, Fraction(1, 2)), (0, 1)), ())
    I2, K2 = apply_affine(T, K, R.G)
    R2 = build_ring(I2)
    rows = transform_check(R, K, dirs, T, R2, K2, directions(R2), 30)
    assert max(r.gap for r in rows) < 1e-5
