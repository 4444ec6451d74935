from __future__ import annotations

import numpy as np
import pytest

from curvecap.errors import RankDeficiencyError
from curvecap.numeric import eig, graded_basis, logdet, project_out, weighted_lstsq


def test_eig_diagonal_and_residual():
    res = eig(np.diag([1, 2j, -3]))
    assert sorted(res.values, key=lambda z: (z.real, z.imag)) == pytest.approx([-3, 2j, 1])
    A = np.random.default_rng(0).normal(size=(6, 6)) + 1j
    assert eig(A).residuals(A).max() < 1e-10


def test_eig_rejects_bad_input():
    with pytest.raises(ValueError):
        eig(np.ones((2, 3)))
    with pytest.raises(ValueError):
        eig(np.array([[np.nan]]))


def test_weighted_lstsq_matches_normal_equations():
    rng = np.random.default_rng(1)
    A = rng.normal(size=(20, 3)) + 1j * rng.normal(size=(20, 3))
    b = rng.normal(size=20) + 0j
    w = rng.uniform(0.1, 1, size=20)
    c = weighted_lstsq(A, b, w)
    W = np.diag(w)
    ref = np.linalg.solve(A.conj().T @ W @ A, A.conj().T @ W @ b)
    assert np.allclose(c, ref)


def test_weighted_lstsq_rank_deficiency_names_column():
    A = np.ones((5, 2), dtype=complex)
    with pytest.raises(RankDeficiencyError) as err:
        weighted_lstsq(A, np.ones(5), np.ones(5))
    assert err.value.column == 1


def test_logdet():
    A = np.array([[2, 0], [0, -3j]])
    ld = logdet(A)
    assert ld.log_abs == pytest.approx(np.log(6))
    assert ld.value == pytest.approx(np.linalg.det(A))
    assert logdet(np.array([[1, 2], [2, 4]])).zero
    big = np.diag([1e200] * 4)
    assert logdet(big).log_abs == pytest.approx(800 * np.log(10))


def test_graded_basis_spans_monomials_in_the_plane():
    # generic plane points: degree j adds j + 1 monomials
    pts = np.random.default_rng(3).normal(size=(40, 2)) + 0.3j
    Q = graded_basis(pts, [1, 2, 3, 4])
    assert np.allclose(Q.conj().T @ Q, np.eye(10), atol=1e-12)
    mono = np.stack([pts[:, 0] ** i * pts[:, 1] ** (j - i) for j in range(4) for i in range(j + 1)], axis=1)
    assert np.abs(project_out(Q, mono)).max() < 1e-12 * np.abs(mono).max()


def test_graded_basis_on_circle_and_rank_checks():
    t = np.exp(2j * np.pi * np.arange(16) / 16)
    pts = np.stack([(t + 1 / t) / 2, (t - 1 / t) / 2j], axis=1)
    # on x^2 + y^2 = 1 each positive degree adds two functions
    Q = graded_basis(pts, [1, 2, 2, 2])
    assert Q.shape == (16, 7)
    with pytest.raises(RankDeficiencyError):
        graded_basis(pts, [1, 2, 3])
    with pytest.raises(ValueError):
        graded_basis(pts[:3], [1, 2, 2])
