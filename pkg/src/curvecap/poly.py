"""Sparse multivariate polynomials over Q(i) with the curve-friendly grevlex order.

Monomial order
--------------
Monomials are compared by total degree first.  At equal degree the monomial
with the *larger* exponent at the first differing variable is the *smaller*
one.  In two variables the ascending sequence is::

    1, z1, z2, z1^2, z1*z2, z2^2, z1^3, z1^2*z2, ...

so pure powers of ``z1`` are the smallest monomials of each degree.  This
reverses variable significance relative to the usual textbook ``grevlex``
(there ``z1`` is the most significant variable); it is deliberate and the
rest of the package depends on it.

Multi-indices are plain tuples of non-negative ints.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .exactnum import ONE, ZERO, GaussRational, as_gauss, format_rational

__all__ = [
    "grevlex_key",
    "grevlex_cmp",
    "Poly",
    "parse_poly",
    "monomials_of_degree",
    "divides",
]

MultiIndex = tuple


def grevlex_key(alpha: Sequence[int]) -> tuple:
    """Sort key: ``grevlex_key(a) < grevlex_key(b)`` iff ``z^a`` precedes ``z^b``."""
    return (sum(alpha), tuple(-a for a in alpha))


def grevlex_cmp(alpha: Sequence[int], beta: Sequence[int]) -> int:
    """Return -1, 0 or 1 as ``z^alpha`` is smaller than, equal to or larger than ``z^beta``."""
    if len(alpha) != len(beta):
        raise ValueError(f"multi-index length mismatch: {len(alpha)} vs {len(beta)}")
    da, db = sum(alpha), sum(beta)
    if da != db:
        return -1 if da < db else 1
    for a, b in zip(alpha, beta):
        if a != b:
            return -1 if a > b else 1
    return 0


def monomials_of_degree(nvars: int, degree: int) -> list[tuple]:
    """All exponent tuples of the given total degree, ascending in grevlex."""
    out: list[tuple] = []

    def rec(prefix, left, k):
        if k == nvars - 1:
            out.append(prefix + (left,))
            return
        for e in range(left, -1, -1):
            rec(prefix + (e,), left - e, k + 1)

    if nvars == 0:
        return [()] if degree == 0 else []
    rec((), degree, 0)
    # rec emits largest first-exponent first, which is ascending already
    return out


def divides(alpha: Sequence[int], beta: Sequence[int]) -> bool:
    return all(a <= b for a, b in zip(alpha, beta))


class Poly:
    """Immutable sparse polynomial in ``nvars`` variables over Q(i).

    ``terms`` is a tuple of ``(coefficient, exponents)`` pairs in strictly
    descending grevlex order with no zero coefficients.
    """

    __slots__ = ("nvars", "_coeffs", "_terms")

    def __init__(self, nvars: int, coeffs: Mapping[tuple, object] | Iterable = ()):
        self.nvars = nvars
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        d: dict[tuple, GaussRational] = {}
        for alpha, c in items:
            alpha = tuple(alpha)
            if len(alpha) != nvars:
                raise ValueError(f"exponent {alpha} does not have {nvars} entries")
            c = as_gauss(c)
            if alpha in d:
                c = d[alpha] + c
            d[alpha] = c
        self._coeffs = {a: c for a, c in d.items() if c}
        self._terms = None

    @classmethod
    def _from_clean(cls, nvars: int, coeffs: dict) -> Poly:
        obj = object.__new__(cls)
        obj.nvars = nvars
        obj._coeffs = coeffs
        obj._terms = None
        return obj

    # constructors --------------------------------------------------------
    @classmethod
    def zero(cls, nvars: int) -> Poly:
        return cls._from_clean(nvars, {})

    @classmethod
    def constant(cls, c, nvars: int) -> Poly:
        c = as_gauss(c)
        return cls._from_clean(nvars, {(0,) * nvars: c} if c else {})

    @classmethod
    def var(cls, k: int, nvars: int) -> Poly:
        """The coordinate ``z_k`` (1-based)."""
        if not 1 <= k <= nvars:
            raise ValueError(f"variable index {k} outside 1..{nvars}")
        alpha = [0] * nvars
        alpha[k - 1] = 1
        return cls._from_clean(nvars, {tuple(alpha): ONE})

    @classmethod
    def monomial(cls, alpha: Sequence[int], coeff=1) -> Poly:
        return cls(len(alpha), {tuple(alpha): coeff})

    # basic queries -------------------------------------------------------
    @property
    def terms(self) -> tuple:
        if self._terms is None:
            keys = sorted(self._coeffs, key=grevlex_key, reverse=True)
            self._terms = tuple((self._coeffs[a], a) for a in keys)
        return self._terms

    @property
    def coeffs(self) -> dict:
        """Read-only view: exponent tuple -> coefficient (do not mutate)."""
        return self._coeffs

    def coeff(self, alpha: Sequence[int]) -> GaussRational:
        return self._coeffs.get(tuple(alpha), ZERO)

    def is_zero(self) -> bool:
        return not self._coeffs

    def __bool__(self):
        return bool(self._coeffs)

    def __len__(self):
        return len(self._coeffs)

    @property
    def degree(self) -> int:
        """Total degree; ``-1`` for the zero polynomial."""
        return max((sum(a) for a in self._coeffs), default=-1)

    def is_homogeneous(self) -> bool:
        return len({sum(a) for a in self._coeffs}) <= 1

    def leading_term(self) -> tuple[GaussRational, tuple]:
        if not self._coeffs:
            raise ValueError("the zero polynomial has no leading term")
        alpha = max(self._coeffs, key=grevlex_key)
        return self._coeffs[alpha], alpha

    def leading_monomial(self) -> tuple:
        return self.leading_term()[1]

    def leading_coefficient(self) -> GaussRational:
        return self.leading_term()[0]

    def leading_homogeneous_part(self) -> Poly:
        if not self._coeffs:
            raise ValueError("the zero polynomial has no leading homogeneous part")
        deg = self.degree
        return Poly._from_clean(self.nvars, {a: c for a, c in self._coeffs.items() if sum(a) == deg})

    def homogeneous_part(self, degree: int) -> Poly:
        return Poly._from_clean(self.nvars, {a: c for a, c in self._coeffs.items() if sum(a) == degree})

    def check_invariants(self) -> None:
        terms = self.terms
        for c, a in terms:
            assert c, "zero coefficient stored"
            assert len(a) == self.nvars
        for (_, a), (_, b) in zip(terms, terms[1:]):
            assert grevlex_cmp(a, b) == 1, "terms not strictly descending"

    # arithmetic ----------------------------------------------------------
    def _check_compatible(self, other: Poly) -> None:
        if other.nvars != self.nvars:
            raise ValueError(f"variable count mismatch: {self.nvars} vs {other.nvars}")

    def _lift(self, other) -> Poly:
        if isinstance(other, Poly):
            self._check_compatible(other)
            return other
        return Poly.constant(other, self.nvars)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self._coeffs == other._coeffs
        if isinstance(other, (int, Fraction, GaussRational)):
            return self == Poly.constant(other, self.nvars)
        return NotImplemented

    def __hash__(self):
        return hash((self.nvars, frozenset(self._coeffs.items())))

    def __neg__(self):
        return Poly._from_clean(self.nvars, {a: -c for a, c in self._coeffs.items()})

    def __add__(self, other):
        other = self._lift(other)
        d = dict(self._coeffs)
        for a, c in other._coeffs.items():
            s = d.get(a)
            if s is None:
                d[a] = c
            else:
                s = s + c
                if s:
                    d[a] = s
                else:
                    del d[a]
        return Poly._from_clean(self.nvars, d)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def scale(self, c) -> Poly:
        c = as_gauss(c)
        if not c:
            return Poly.zero(self.nvars)
        return Poly._from_clean(self.nvars, {a: c * v for a, v in self._coeffs.items()})

    def shift(self, alpha: Sequence[int], c=ONE) -> Poly:
        """Return ``c * z^alpha * self``."""
        c = as_gauss(c)
        if not c:
            return Poly.zero(self.nvars)
        alpha = tuple(alpha)
        return Poly._from_clean(
            self.nvars,
            {tuple(x + y for x, y in zip(a, alpha)): c * v for a, v in self._coeffs.items()},
        )

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scale(other)
        self._check_compatible(other)
        d: dict[tuple, GaussRational] = {}
        for a, ca in self._coeffs.items():
            for b, cb in other._coeffs.items():
                g = tuple(x + y for x, y in zip(a, b))
                v = ca * cb
                s = d.get(g)
                d[g] = v if s is None else s + v
        return Poly._from_clean(self.nvars, {a: c for a, c in d.items() if c})

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        result = Poly.constant(1, self.nvars)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def monic(self) -> Poly:
        return self.scale(self.leading_coefficient().inverse())

    # evaluation ----------------------------------------------------------
    def __call__(self, *point):
        if len(point) == 1 and isinstance(point[0], (list, tuple, np.ndarray)):
            point = tuple(point[0])
        return self.evaluate(point)

    def evaluate(self, point: Sequence):
        """Evaluate at one point.

        Exact if every coordinate is ``int``/``Fraction``/``GaussRational``;
        otherwise complex double precision by direct term summation (no Horner;
        each term is a product of powers, rounding error grows with the number
        of terms and their magnitude).
        """
        if len(point) != self.nvars:
            raise ValueError(f"point has {len(point)} coordinates, expected {self.nvars}")
        if all(isinstance(x, (int, Fraction, GaussRational)) for x in point):
            pt = [as_gauss(x) for x in point]
            total = ZERO
            for a, c in self._coeffs.items():
                term = c
                for x, e in zip(pt, a):
                    if e:
                        term = term * x**e
                total = total + term
            return total
        return complex(self.evaluate_many(np.asarray(point, dtype=complex)[None, :])[0])

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """Vectorised complex evaluation at the rows of ``points`` (shape M x N)."""
        pts = np.asarray(points, dtype=complex)
        if pts.ndim != 2 or pts.shape[1] != self.nvars:
            raise ValueError(f"points must have shape (M, {self.nvars})")
        out = np.zeros(pts.shape[0], dtype=complex)
        if not self._coeffs:
            return out
        maxdeg = max(max(a) for a in self._coeffs) if self.nvars else 0
        powers = [np.ones_like(pts)]
        for _ in range(maxdeg):
            powers.append(powers[-1] * pts)
        for a, c in self._coeffs.items():
            term = np.full(pts.shape[0], complex(c), dtype=complex)
            for k, e in enumerate(a):
                if e:
                    term = term * powers[e][:, k]
            out += term
        return out

    def coefficient_vector(self, basis: Sequence[tuple]) -> list[GaussRational]:
        return [self.coeff(b) for b in basis]

    # structure -----------------------------------------------------------
    def homogenize(self) -> Poly:
        """Homogenise with ``z0`` prepended (result has ``nvars + 1`` variables)."""
        if not self._coeffs:
            return Poly.zero(self.nvars + 1)
        deg = self.degree
        return Poly._from_clean(
            self.nvars + 1, {(deg - sum(a),) + a: c for a, c in self._coeffs.items()}
        )

    def dehomogenize_at(self, j: int) -> Poly:
        """Set variable ``j`` (0-based position) to 1 and drop it."""
        if not 0 <= j < self.nvars:
            raise ValueError(f"variable position {j} outside 0..{self.nvars - 1}")
        d: dict[tuple, GaussRational] = {}
        for a, c in self._coeffs.items():
            b = a[:j] + a[j + 1:]
            s = d.get(b)
            d[b] = c if s is None else s + c
        return Poly._from_clean(self.nvars - 1, {a: c for a, c in d.items() if c})

    def compose(self, subs: Sequence[Poly]) -> Poly:
        """Substitute ``z_k -> subs[k-1]``; all ``subs`` share one variable count."""
        if len(subs) != self.nvars:
            raise ValueError("need one substitution per variable")
        m = subs[0].nvars if subs else 0
        cache: dict[tuple[int, int], Poly] = {}

        def power(k: int, e: int) -> Poly:
            key = (k, e)
            if key not in cache:
                cache[key] = subs[k] ** e
            return cache[key]

        result = Poly.zero(m)
        for a, c in self._coeffs.items():
            term = Poly.constant(c, m)
            for k, e in enumerate(a):
                if e:
                    term = term * power(k, e)
            result = result + term
        return result

    # text ----------------------------------------------------------------
    def to_str(self, names: Sequence[str] | None = None) -> str:
        names = list(names) if names is not None else [f"z{k + 1}" for k in range(self.nvars)]
        if not self._coeffs:
            return "0"
        parts: list[str] = []
        for c, a in self.terms:
            mono = "*".join(
                names[k] if e == 1 else f"{names[k]}^{e}" for k, e in enumerate(a) if e
            )
            sign = "+"
            if c.is_real():
                r = c.re
                if r < 0:
                    sign, r = "-", -r
                if mono and r == 1:
                    body = mono
                else:
                    body = format_rational(r) + ("*" + mono if mono else "")
            else:
                cs = _format_complex_coeff(c)
                body = f"({cs})" + ("*" + mono if mono else "")
            parts.append((sign, body))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __str__(self):
        return self.to_str()

    def __repr__(self):
        return f"Poly({self.nvars}, {self.to_str()!r})"


def _format_complex_coeff(c: GaussRational) -> str:
    im = c.im
    if im == 1:
        ims = "i"
    elif im == -1:
        ims = "-i"
    else:
        ims = f"{format_rational(im)}*i"
    if not c.re:
        return ims
    if ims.startswith("-"):
        return f"{format_rational(c.re)} - {ims[1:]}"
    return f"{format_rational(c.re)} + {ims}"


# parser --------------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z_]\w*)|(\S))")


def parse_poly(text: str, nvars: int, names: Sequence[str] | None = None) -> Poly:
    """Parse generator syntax: rational coefficients, ``z1..zN``, ``+ - * / ^``, ``i``, parentheses.

    Division is only allowed by a nonzero constant.
    """
    names = list(names) if names is not None else [f"z{k + 1}" for k in range(nvars)]
    index = {n: k for k, n in enumerate(names)}
    tokens: list[str] = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            break
        tokens.append(m.group(1) or m.group(2) or m.group(3))
        pos = m.end()
    if not tokens:
        raise ValueError("empty polynomial text")
    p = _Parser(tokens, nvars, index)
    result = p.expr()
    if p.i != len(tokens):
        raise ValueError(f"unexpected token {tokens[p.i]!r} in {text!r}")
    return result


class _Parser:
    def __init__(self, tokens, nvars, index):
        self.t = tokens
        self.i = 0
        self.nvars = nvars
        self.index = index

    def peek(self):
        return self.t[self.i] if self.i < len(self.t) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise ValueError(f"expected {expected!r}, got {tok!r}")
        self.i += 1
        return tok

    def expr(self) -> Poly:
        sign = 1
        if self.peek() in ("+", "-"):
            sign = -1 if self.take() == "-" else 1
        result = self.term()
        if sign < 0:
            result = -result
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.term()
            result = result + rhs if op == "+" else result - rhs
        return result

    def term(self) -> Poly:
        result = self.factor()
        while self.peek() in ("*", "/"):
            op = self.take()
            rhs = self.factor()
            if op == "*":
                result = result * rhs
            else:
                if rhs.degree > 0 or rhs.is_zero():
                    raise ValueError("division only by a nonzero constant")
                result = result.scale(rhs.coeff((0,) * self.nvars).inverse())
        return result

    def factor(self) -> Poly:
        if self.peek() == "-":
            self.take()
            return -self.factor()
        base = self.atom()
        if self.peek() == "^":
            self.take()
            exp = self.take()
            if not exp.isdigit():
                raise ValueError(f"exponent must be a non-negative integer, got {exp!r}")
            base = base ** int(exp)
        return base

    def atom(self) -> Poly:
        tok = self.peek()
        if tok is None:
            raise ValueError("unexpected end of input")
        if tok == "(":
            self.take()
            e = self.expr()
            self.take(")")
            return e
        if tok.isdigit():
            self.take()
            return Poly.constant(int(tok), self.nvars)
        if tok == "i":
            self.take()
            return Poly.constant(GaussRational(0, 1), self.nvars)
        if tok in self.index:
            self.take()
            return Poly.var(self.index[tok] + 1, self.nvars)
        raise ValueError(f"unknown symbol {tok!r}")
