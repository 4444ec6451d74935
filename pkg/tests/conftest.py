from __future__ import annotations

import pytest

from curvecap.curve import build_ring, directions
from curvecap.groebner import Ideal
from curvecap.poly import parse_poly
from curvecap.sampler import build_set, rational_circle

SPACE_CURVE = ["z2^2+z3^2-z1^2-1", "z3^2+z2*z3-2*z2^2+z1*z3-z1*z2+1"]


def ideal(gens, n):
    return Ideal(tuple(parse_poly(g, n) for g in gens), n)


def ring(gens, n):
    return build_ring(ideal(gens, n))


@pytest.fixture(scope="session")
def space_ring():
    return ring(SPACE_CURVE, 3)


@pytest.fixture(scope="session")
def line():
    R = ring(["z2 - z1"], 2)
    return R, directions(R)


@pytest.fixture(scope="session")
def hyperbola():
    R = ring(["z2^2 - z1^2 - 1"], 2)
    return R, directions(R)


@pytest.fixture(scope="session")
def line_K(line):
    return build_set(line[0].G, rational_circle(128))


@pytest.fixture(scope="session")
def hyperbola_K(hyperbola):
    return build_set(hyperbola[0].G, rational_circle(64))


def random_minimax_instance(rng):
    """Small complex minimax problem: M <= 64 points, k <= 2 corrections."""
    import numpy as np

    from curvecap.chebyshev import MinimaxProblem

    M = int(rng.integers(4, 65))
    k = int(rng.integers(0, 3))
    z = np.exp(2j * np.pi * rng.random(M)) * rng.uniform(0.3, 1.5, M)
    target = z ** (k + 1) + 0.3 * (rng.normal(size=M) + 1j * rng.normal(size=M))
    A = np.stack([z**j for j in range(k)], axis=1) if k else np.zeros((M, 0))
    return MinimaxProblem(target, A)
