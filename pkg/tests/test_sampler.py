from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvecap.errors import HypothesisViolation, InputError
from curvecap.exactnum import GaussRational
from curvecap.groebner import buchberger
from curvecap.sampler import (
    AffineMap,
    apply_affine,
    build_set,
    check_admissible,
    circle_point,
    fiber_points,
    format_points,
    load_points,
    parse_points,
    rational_circle,
    residuals,
    save_points,
)

from conftest import SPACE_CURVE, ideal


def test_circle_points_exact():
    assert circle_point(Fraction(0)) == GaussRational(1)
    assert circle_point(Fraction(1)) == GaussRational(0, 1)
    assert circle_point(None, 2) == GaussRational(-2)
    pts = rational_circle(64, Fraction(3, 2))
    assert len(set(pts)) == 64
    assert all(c.norm2() == Fraction(9, 4) for c in pts)


@given(st.integers(1, 200))
@settings(max_examples=25, deadline=None)
def test_rational_circle_always_on_circle(m):
    assert all(c.norm2() == 1 for c in rational_circle(m))


def test_hyperbola_fibres_by_hand():
    I = ideal(["z2^2 - z1^2 - 1"], 2)
    assert np.allclose(fiber_points(I, 0), [[0, -1], [0, 1]])
    assert np.allclose(fiber_points(I, Fraction(3, 4)), [[0.75, -1.25], [0.75, 1.25]])


def test_space_curve_fibre_count():
    G = buchberger(ideal(SPACE_CURVE, 3))
    pts = fiber_points(G, 0)
    assert len(pts) == 4
    assert residuals(G, pts).max() < 1e-10


def test_build_set_sizes():
    assert len(build_set(ideal(["z2^2 - z1^2 - 1"], 2), rational_circle(64))) == 128
    K = build_set(ideal(["z2 - z1"], 2), rational_circle(64))
    assert len(K) == 64 and np.allclose(K.points[:, 0], K.points[:, 1])
    with pytest.raises(InputError):
        build_set(ideal(["z2 - z1"], 2), rational_circle(8), r_max=0.5)


def test_build_set_threads_identical():
    I = ideal(["z2^2 - z1^2 - 1"], 2)
    a = build_set(I, rational_circle(16), threads=1).points
    b = build_set(I, rational_circle(16), threads=4).points
    assert np.array_equal(a, b)


def test_affine_image_of_line():
    I = ideal(["z2 - z1"], 2)
    K = build_set(I, rational_circle(8))
    T = AffineMap(((1, 1), (0, 1)), ())
    I2, K2 = apply_affine(T, K, I)
    G2 = buchberger(I2)
    assert G2.elements[0] == ideal(["z2 - 1/2*z1"], 2).generators[0]
    assert np.allclose(K2.points, np.c_[2 * K.points[:, 0], K.points[:, 0]])


def test_random_affine_image_of_hyperbola():
    I = ideal(["z2^2 - z1^2 - 1"], 2)
    K = build_set(I, rational_circle(16))
    T = AffineMap(((Fraction(2, 3), Fraction(-1, 5)), (Fraction(1, 7), 3)), (1, Fraction(-1, 2)))
    I2, K2 = apply_affine(T, K, I)
    assert residuals(buchberger(I2), K2.points).max() < 1e-9


def test_inadmissible_map():
    T = AffineMap(((1, -1), (0, 1)), ())
    with pytest.raises(HypothesisViolation):
        check_admissible(T, [(1, 1)])


def test_point_file_roundtrip(tmp_path):
    G = buchberger(ideal(["z2^2 - z1^2 - 1"], 2))
    K = build_set(G, rational_circle(4))
    path = tmp_path / "k.txt"
    save_points(path, K)
    assert np.array_equal(load_points(path, G).points, K.points)


def test_point_file_validation(tmp_path):
    G = buchberger(ideal(["z2^2 - z1^2 - 1"], 2))
    good = tmp_path / "good.txt"
    good.write_text("# two points\n0:0, 1:0\n0:0, -1:0\n")
    assert len(load_points(good, G)) == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("0:0, 0.5:0\n")
    with pytest.raises(InputError, match="row"):
        load_points(bad, G)
    empty = tmp_path / "empty.txt"
    empty.write_text("# nothing\n")
    with pytest.raises(InputError):
        load_points(empty, G)


def test_format_parse_roundtrip():
    pts = np.array([[1 + 2j, -0.5j], [np.pi, 1e-20]])
    assert np.array_equal(parse_points(format_points(pts)), pts)
