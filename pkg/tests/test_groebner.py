from __future__ import annotations

import random

import pytest

from curvecap.errors import EmptyVarietyError, NotACurveError
from curvecap.groebner import (
    buchberger,
    hilbert_data,
    homogenize_basis,
    in_lt_ideal,
    quotient_basis,
    reduce,
    s_polynomial,
    verify_groebner,
)
from curvecap.poly import Poly, parse_poly

from conftest import SPACE_CURVE, ideal

HAND_G = [
    "z2*z3+z1*z3-3*z2^2-z1*z2+z1^2+2",
    "z3^2+z2^2-z1^2-1",
    "10*z2^3-2*z1*z2^2-6*z1^2*z2+z1^2*z3+z1^3-7*z2-2*z3+3*z1",
]


def test_space_curve_basis_matches_hand_computation():
    G = buchberger(ideal(SPACE_CURVE, 3))
    assert sorted(G.lt_exponents) == sorted([(0, 1, 1), (0, 0, 2), (0, 3, 0)])
    expected = {parse_poly(g, 3).monic() for g in HAND_G}
    assert set(G.elements) == expected


def test_space_curve_quotient_basis():
    G = buchberger(ideal(SPACE_CURVE, 3))
    for n in range(4, 9):
        qb = quotient_basis(G, n)
        assert qb.monomials == [(n, 0, 0), (n - 1, 1, 0), (n - 1, 0, 1), (n - 2, 2, 0)]


def test_certificate_all_s_polynomials_reduce_to_zero():
    G = buchberger(ideal(SPACE_CURVE, 3))
    assert verify_groebner(G)
    els = G.elements
    for i in range(len(els)):
        for j in range(i + 1, len(els)):
            assert reduce(s_polynomial(els[i], els[j]), G).is_zero()


def test_reduce_linear_and_idempotent():
    G = buchberger(ideal(SPACE_CURVE, 3))
    rng = random.Random(7)

    def rand_poly():
        return Poly(3, {tuple(rng.randint(0, 3) for _ in range(3)): rng.randint(-5, 5) for _ in range(4)})

    for _ in range(200):
        p, q = rand_poly(), rand_poly()
        c = rng.randint(-4, 4)
        rp = reduce(p, G)
        assert reduce(rp, G) == rp
        assert reduce(p + q.scale(c), G) == rp + reduce(q, G).scale(c)
        assert all(not in_lt_ideal(a, G) for a in rp.coeffs)


def test_constant_never_in_lt_ideal_of_proper_ideal():
    G = buchberger(ideal(["z2^2 - z1^2 - 1"], 2))
    assert not in_lt_ideal((0, 0), G)


def test_line_quotient_basis():
    G = buchberger(ideal(["z2 - z1"], 2))
    for n in range(6):
        assert quotient_basis(G, n).monomials == [(n, 0)]


def test_hilbert_data():
    assert hilbert_data(buchberger(ideal(["z2 - z1"], 2))).d == 1
    H = hilbert_data(buchberger(ideal(["z2^2 - z1^2 - 1"], 2)))
    assert (H.d, H.c) == (2, 1)
    with pytest.raises(EmptyVarietyError):
        hilbert_data(buchberger(ideal(["1"], 2)))
    with pytest.raises(NotACurveError):
        hilbert_data(buchberger(ideal(["z1^2-1", "z2^2-1"], 2)))


def test_homogenize_basis():
    G = buchberger(ideal(["z2^2 - z1^2 - 1"], 2))
    (h,) = homogenize_basis(G)
    assert h.is_homogeneous() and h.nvars == 3
