"""Coefficient rings for exact differentiation.

``Polynomial`` is a sparse multivariate polynomial with float coefficients
and exact partial derivatives. ``Jet`` is a batched first-order jet
(value plus gradient over a set of points), enough to push exact first
derivatives through the double-form algebra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Tuple

import numpy as np

Exponent = Tuple[int, ...]


class Polynomial:
    __slots__ = ("nvars", "terms")
    __array_ufunc__ = None

    def __init__(self, nvars: int, terms: Mapping[Exponent, float] | None = None):
        self.nvars = int(nvars)
        clean: Dict[Exponent, float] = {}
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != self.nvars or any(e < 0 for e in exp):
                raise ValueError(f"bad exponent {exp} for {self.nvars} variables")
            if c != 0.0:
                clean[exp] = clean.get(exp, 0.0) + float(c)
        self.terms = clean

    @classmethod
    def constant(cls, nvars: int, value: float) -> "Polynomial":
        return cls(nvars, {(0,) * nvars: value})

    @classmethod
    def variable(cls, nvars: int, i: int, coefficient: float = 1.0) -> "Polynomial":
        exp = [0] * nvars
        exp[i] = 1
        return cls(nvars, {tuple(exp): coefficient})

    @classmethod
    def from_terms(cls, nvars: int, terms: Iterable[Mapping]) -> "Polynomial":
        """Build from ``[{"coeff": c, "powers": [...]}, ...]``."""
        out: Dict[Exponent, float] = {}
        for t in terms:
            exp = tuple(int(p) for p in t["powers"])
            out[exp] = out.get(exp, 0.0) + float(t["coeff"])
        return cls(nvars, out)

    def to_terms(self) -> list:
        return [{"coeff": c, "powers": list(e)} for e, c in sorted(self.terms.items())]

    @classmethod
    def random(cls, rng: np.random.Generator, nvars: int, degree: int, scale: float = 1.0) -> "Polynomial":
        """Dense random polynomial of total degree <= ``degree``."""
        terms = {exp: scale * rng.standard_normal() for exp in _exponents(nvars, degree)}
        return cls(nvars, terms)

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise ValueError("variable count mismatch")
            return other
        return Polynomial.constant(self.nvars, float(other))

    def __add__(self, other):
        if isinstance(other, Jet):
            return NotImplemented
        other = self._coerce(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, 0.0) + c
        return Polynomial(self.nvars, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, Jet):
            return NotImplemented
        if not isinstance(other, Polynomial):
            f = float(other)
            return Polynomial(self.nvars, {e: c * f for e, c in self.terms.items()})
        other = self._coerce(other)
        terms: Dict[Exponent, float] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, 0.0) + c1 * c2
        return Polynomial(self.nvars, terms)

    __rmul__ = __mul__

    def diff(self, i: int) -> "Polynomial":
        terms = {}
        for e, c in self.terms.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                terms[tuple(ne)] = c * e[i]
        return Polynomial(self.nvars, terms)

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def __call__(self, points) -> np.ndarray:
        """Evaluate at ``points`` of shape ``(N, nvars)``."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[-1] != self.nvars:
            raise ValueError(f"expected points with {self.nvars} coordinates")
        out = np.zeros(pts.shape[0])
        if not self.terms:
            return out
        deg = self.degree
        powers = [np.ones((deg + 1, pts.shape[0])) for _ in range(self.nvars)]
        for v in range(self.nvars):
            for d in range(1, deg + 1):
                powers[v][d] = powers[v][d - 1] * pts[:, v]
        for e, c in self.terms.items():
            term = np.full(pts.shape[0], c)
            for v, d in enumerate(e):
                if d:
                    term = term * powers[v][d]
            out += term
        return out

    def jet(self, points) -> "Jet":
        return Jet(self(points), np.stack([self.diff(i)(points) for i in range(self.nvars)]))

    def substitute(self, i: int, value: float) -> "Polynomial":
        """Fix variable ``i`` to ``value``, dropping it."""
        terms: Dict[Exponent, float] = {}
        for e, c in self.terms.items():
            ne = e[:i] + e[i + 1:]
            terms[ne] = terms.get(ne, 0.0) + c * value ** e[i]
        return Polynomial(self.nvars - 1, terms)

    def affine_substitute(self, i: int, scale: float, shift: float) -> "Polynomial":
        """Replace variable ``x_i`` by ``scale * x_i + shift``."""
        terms: Dict[Exponent, float] = {}
        for e, c in self.terms.items():
            d = e[i]
            for j in range(d + 1):
                coef = c * math.comb(d, j) * scale**j * shift ** (d - j)
                ne = e[:i] + (j,) + e[i + 1:]
                terms[ne] = terms.get(ne, 0.0) + coef
        return Polynomial(self.nvars, terms)

    def insert_variables(self, position: int, count: int) -> "Polynomial":
        """Same polynomial viewed in ``nvars + count`` variables."""
        pad = (0,) * count
        return Polynomial(
            self.nvars + count,
            {e[:position] + pad + e[position:]: c for e, c in self.terms.items()},
        )

    def max_abs_coefficient(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def __repr__(self):
        return f"Polynomial({self.nvars}, {len(self.terms)} terms)"


def _exponents(nvars: int, degree: int):
    if nvars == 0:
        yield ()
        return
    for first in range(degree + 1):
        for rest in _exponents(nvars - 1, degree - first):
            yield (first,) + rest


@dataclass
class Jet:
    """Values ``v`` (shape ``(N,)``) with gradients ``g`` (shape ``(m, N)``)."""

    v: np.ndarray
    g: np.ndarray

    __array_ufunc__ = None

    @classmethod
    def constant(cls, value, m: int, n: int) -> "Jet":
        return cls(np.full(n, float(value)), np.zeros((m, n)))

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.v + other.v, self.g + other.g)
        return Jet(self.v + other, self.g)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.v, -self.g)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            return Jet(self.v * other.v, self.g * other.v + self.v * other.g)
        return Jet(self.v * other, self.g * other)

    __rmul__ = __mul__

    def partial(self, i: int) -> np.ndarray:
        return self.g[i]
