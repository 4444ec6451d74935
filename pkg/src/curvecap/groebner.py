"""Buchberger's algorithm, normal forms and standard-monomial bookkeeping.

All computations are exact over Q(i) and use the order from :mod:`curvecap.poly`.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from math import comb
from typing import NamedTuple, Sequence

from .errors import BudgetExceeded, EmptyVarietyError, NotACurveError
from .exactnum import GaussRational
from .poly import Poly, divides, grevlex_cmp, grevlex_key, monomials_of_degree

log = logging.getLogger(__name__)

__all__ = [
    "Ideal",
    "GroebnerBasis",
    "HilbertData",
    "QuotientBasis",
    "buchberger",
    "reduce",
    "s_polynomial",
    "in_lt_ideal",
    "quotient_basis",
    "full_quotient_basis",
    "hilbert_data",
    "homogenize_basis",
    "verify_groebner",
]


@dataclass(frozen=True)
class Ideal:
    generators: tuple
    nvars: int

    def __post_init__(self):
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        for g in gens:
            if g.is_zero():
                raise ValueError("ideal generators must be nonzero")
            if g.nvars != self.nvars:
                raise ValueError(f"generator {g} has {g.nvars} variables, expected {self.nvars}")


@dataclass(frozen=True)
class GroebnerBasis:
    """Reduced Groebner basis: monic elements sorted by ascending leading monomial."""

    elements: tuple
    nvars: int
    lt_exponents: tuple = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "lt_exponents", tuple(g.leading_monomial() for g in self.elements))

    def reduce(self, p: Poly) -> Poly:
        return reduce(p, self)

    def in_lt_ideal(self, alpha: Sequence[int]) -> bool:
        return in_lt_ideal(alpha, self)

    def is_unit(self) -> bool:
        return any(sum(a) == 0 for a in self.lt_exponents)

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)


class QuotientBasis(NamedTuple):
    monomials: list  # standard monomials of degree exactly n, ascending
    m: int  # number of standard monomials of degree <= n
    l: int  # sum of their degrees


@dataclass(frozen=True)
class HilbertData:
    dims: tuple  # dim C[V]_{<=s}, s = 0..s_max
    d: int
    c: int
    s0: int

    @property
    def increments(self) -> tuple:
        return tuple(b - a for a, b in zip((0,) + self.dims[:-1], self.dims))


# ---------------------------------------------------------------------------
# division


def _heap_key(alpha):
    # min-heap key whose order is the reverse of grevlex
    return (-sum(alpha), alpha)


def reduce(p: Poly, G) -> Poly:
    """Normal form of ``p`` modulo ``G`` (a :class:`GroebnerBasis` or a list of polys).

    Every leading term is divided by the first divisor (in list order) whose
    leading monomial divides it; terms with no divisor move to the remainder.
    """
    divisors = G.elements if isinstance(G, GroebnerBasis) else tuple(G)
    if divisors and divisors[0].nvars != p.nvars:
        raise ValueError("variable count mismatch between polynomial and basis")
    lts = []
    for g in divisors:
        c, a = g.leading_term()
        tail = {b: v for b, v in g.coeffs.items() if b != a}
        lts.append((a, c.inverse(), tail))

    work = dict(p.coeffs)
    heap = [_heap_key(a) for a in work]
    heapq.heapify(heap)
    queued = set(work)
    rem: dict = {}
    while heap:
        _, alpha = heapq.heappop(heap)
        queued.discard(alpha)
        c = work.pop(alpha, None)
        if c is None:
            continue
        for a, inv_lc, tail in lts:
            if divides(a, alpha):
                q = c * inv_lc
                shift = tuple(x - y for x, y in zip(alpha, a))
                for b, v in tail.items():
                    key = tuple(x + y for x, y in zip(b, shift))
                    s = work.get(key)
                    nv = -(q * v) if s is None else s - q * v
                    if nv:
                        work[key] = nv
                        if key not in queued:
                            heapq.heappush(heap, _heap_key(key))
                            queued.add(key)
                    elif s is not None:
                        del work[key]
                break
        else:
            rem[alpha] = c
    return Poly._from_clean(p.nvars, rem)


def in_lt_ideal(alpha: Sequence[int], G) -> bool:
    lts = G.lt_exponents if isinstance(G, GroebnerBasis) else [g.leading_monomial() for g in G]
    return any(divides(a, alpha) for a in lts)


def _lcm(a, b):
    return tuple(max(x, y) for x, y in zip(a, b))


def s_polynomial(f: Poly, g: Poly) -> Poly:
    cf, af = f.leading_term()
    cg, ag = g.leading_term()
    m = _lcm(af, ag)
    return f.shift(tuple(x - y for x, y in zip(m, af)), cf.inverse()) - g.shift(
        tuple(x - y for x, y in zip(m, ag)), cg.inverse()
    )


# ---------------------------------------------------------------------------
# Buchberger


def buchberger(ideal: Ideal | Sequence[Poly], max_pairs: int = 200_000, max_elements: int = 2_000) -> GroebnerBasis:
    """Reduced Groebner basis of the ideal.

    Pairs are processed smallest-lcm first (ties by insertion order).  The
    coprime-leading-term and chain criteria skip pairs known to reduce to 0.

    Raises
    ------
    BudgetExceeded
        If more than ``max_pairs`` pairs are reduced or the basis grows
        beyond ``max_elements`` before completion.
    """
    gens = ideal.generators if isinstance(ideal, Ideal) else tuple(ideal)
    if not gens:
        raise ValueError("empty generator list")
    nvars = gens[0].nvars

    basis: list[Poly] = []
    lts: list[tuple] = []
    pairs: list = []  # heap of (grevlex_key(lcm), i, j)
    done: set[tuple[int, int]] = set()
    counter = 0

    def add(poly: Poly):
        poly = poly.monic()
        k = len(basis)
        basis.append(poly)
        lts.append(poly.leading_monomial())
        for i in range(k):
            heapq.heappush(pairs, (grevlex_key(_lcm(lts[i], lts[k])), i, k))
        if len(basis) > max_elements:
            raise BudgetExceeded(f"Groebner basis exceeded {max_elements} elements")

    for g in gens:
        r = reduce(g, basis) if basis else g
        if r:
            add(r)

    while pairs:
        _, i, j = heapq.heappop(pairs)
        done.add((i, j))
        if not basis[i] or not basis[j]:
            continue
        a, b = lts[i], lts[j]
        m = _lcm(a, b)
        if all(x == 0 or y == 0 for x, y in zip(a, b)):
            continue  # coprime leading terms
        if _chain_criterion(i, j, m, lts, done):
            continue
        counter += 1
        if counter > max_pairs:
            raise BudgetExceeded(f"Buchberger exceeded {max_pairs} pair reductions")
        r = reduce(s_polynomial(basis[i], basis[j]), basis)
        if r:
            add(r)
            if r.degree == 0:
                break
    return GroebnerBasis(_interreduce(basis), nvars)


def _chain_criterion(i, j, m, lts, done) -> bool:
    for k in range(len(lts)):
        if k == i or k == j:
            continue
        if divides(lts[k], m):
            pik = (min(i, k), max(i, k))
            pjk = (min(j, k), max(j, k))
            if pik in done and pjk in done:
                return True
    return False


def _interreduce(basis: list[Poly]) -> tuple:
    if any(p.degree == 0 for p in basis):
        n = basis[0].nvars
        return (Poly.constant(1, n),)
    # minimal basis: drop elements whose leading monomial another divides
    order = sorted(range(len(basis)), key=lambda k: grevlex_key(basis[k].leading_monomial()))
    kept: list[Poly] = []
    for k in order:
        a = basis[k].leading_monomial()
        if any(divides(q.leading_monomial(), a) for q in kept):
            continue
        kept.append(basis[k])
    reduced = []
    for idx, g in enumerate(kept):
        others = kept[:idx] + kept[idx + 1:]
        lt_c, lt_a = g.leading_term()
        tail = g - Poly.monomial(lt_a, lt_c)
        reduced.append((Poly.monomial(lt_a, lt_c) + reduce(tail, others)).monic())
    reduced.sort(key=lambda p: grevlex_key(p.leading_monomial()))
    return tuple(reduced)


def verify_groebner(G: GroebnerBasis) -> bool:
    """Buchberger certificate: every S-polynomial reduces to zero."""
    els = G.elements
    for i in range(len(els)):
        for j in range(i + 1, len(els)):
            if reduce(s_polynomial(els[i], els[j]), G):
                return False
    return True


# ---------------------------------------------------------------------------
# standard monomials and Hilbert data


def standard_monomials(G: GroebnerBasis, n: int) -> list[tuple]:
    """Standard monomials of degree exactly ``n`` in ascending grevlex."""
    return [a for a in monomials_of_degree(G.nvars, n) if not in_lt_ideal(a, G)]


def quotient_basis(G: GroebnerBasis, n: int) -> QuotientBasis:
    if n < 0:
        raise ValueError("degree must be non-negative")
    m = l = 0
    mons: list = []
    for s in range(n + 1):
        mons = standard_monomials(G, s)
        m += len(mons)
        l += s * len(mons)
    return QuotientBasis(mons, m, l)


def full_quotient_basis(G: GroebnerBasis, max_degree: int = 200) -> list[tuple]:
    """All standard monomials of a zero-dimensional ideal, ascending.

    Raises
    ------
    NotACurveError
        Never for curves; a ``ValueError`` is raised when the quotient is
        infinite (standard monomials persist up to ``max_degree``).
    """
    out: list[tuple] = []
    for s in range(max_degree + 1):
        mons = standard_monomials(G, s)
        if not mons:
            return out
        out.extend(mons)
    raise ValueError(f"quotient is not finite-dimensional up to degree {max_degree}")


def hilbert_data(G: GroebnerBasis, s_max: int = 16) -> HilbertData:
    """Affine Hilbert function ``dim C[V]_{<=s}`` and its linear tail ``d*s + c``.

    Raises
    ------
    EmptyVarietyError
        For the unit ideal.
    NotACurveError
        When the increments do not settle to a positive constant at least
        three degrees before ``s_max``.
    """
    if G.is_unit():
        raise EmptyVarietyError("the ideal is <1>: the variety is empty")
    incs = [len(standard_monomials(G, s)) for s in range(s_max + 1)]
    dims = []
    total = 0
    for h in incs:
        total += h
        dims.append(total)
    d = incs[-1]
    s0 = s_max
    while s0 > 0 and incs[s0 - 1] == d:
        s0 -= 1
    if d == 0:
        raise NotACurveError("Hilbert function is eventually constant: the variety is finite")
    if s0 > s_max - 2:
        raise NotACurveError(
            f"increments {incs[-4:]} do not stabilise by s_max={s_max}; not a curve or s_max too small"
        )
    c = dims[s_max] - d * s_max
    return HilbertData(tuple(dims), d, c, s0)


def homogenize_basis(G: GroebnerBasis) -> list[Poly]:
    return [g.homogenize() for g in G.elements]


def count_all_monomials(nvars: int, n: int) -> int:
    """Number of monomials of degree exactly ``n`` in ``nvars`` variables."""
    return comb(nvars + n - 1, n)
