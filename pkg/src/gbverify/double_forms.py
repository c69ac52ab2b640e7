"""Double forms ``Omega^{u,v}``: base u-forms valued in ``Lambda^v`` of a fiber.

A :class:`DoubleForm` stores coefficients on pairs ``(I, J)`` of strictly
increasing multi-indices (base, fiber). The product multiplies both
gradings with the product of the two shuffle signs and no extra sign
between the base and fiber slots, so that

    a.b = (-1)^(u u' + v v') b.a.

Only the exterior product lives here; composition of endomorphism-valued
forms never goes through this type.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from .multilinear import BilinearForm, ExteriorElement, Index, merge_index, merge_sign

Key = Tuple[Index, Index]


@dataclass
class DoubleForm:
    base_dim: int
    fiber_rank: int
    bidegree: Tuple[int, int]
    coefficients: Dict[Key, Any] = field(default_factory=dict)

    def __post_init__(self):
        u, v = self.bidegree
        if not (0 <= u <= self.base_dim and 0 <= v <= self.fiber_rank):
            # Out-of-range bidegrees are legal but identically zero.
            if self.coefficients:
                raise ValueError(f"bidegree {self.bidegree} exceeds ({self.base_dim}, {self.fiber_rank})")
        for (i, j) in self.coefficients:
            if len(i) != u or len(j) != v:
                raise ValueError(f"key {(i, j)} does not match bidegree {self.bidegree}")
            if any(a >= b for a, b in zip(i, i[1:])) or any(a >= b for a, b in zip(j, j[1:])):
                raise ValueError(f"key {(i, j)} is not strictly increasing")
            if (i and (i[0] < 0 or i[-1] >= self.base_dim)) or (j and (j[0] < 0 or j[-1] >= self.fiber_rank)):
                raise ValueError(f"key {(i, j)} out of range")

    @classmethod
    def one(cls, base_dim: int, fiber_rank: int) -> "DoubleForm":
        return cls(base_dim, fiber_rank, (0, 0), {((), ()): 1.0})

    @classmethod
    def zero(cls, base_dim: int, fiber_rank: int, bidegree: Tuple[int, int]) -> "DoubleForm":
        return cls(base_dim, fiber_rank, tuple(bidegree), {})

    @classmethod
    def pure(cls, base_dim, fiber_rank, base: Iterable[int], fiber: Iterable[int], coefficient=1.0):
        base, fiber = tuple(base), tuple(fiber)
        return cls(base_dim, fiber_rank, (len(base), len(fiber)), {(base, fiber): coefficient})

    @classmethod
    def section(cls, components: Sequence, h: Optional[BilinearForm] = None, base_dim: int = 0) -> "DoubleForm":
        """Bidegree (0,1) form ``h(w, .)`` of a fiber vector ``w``."""
        signs = h.signs if h is not None else (1,) * len(components)
        coeffs = {((), (a,)): s * c for a, (s, c) in enumerate(zip(signs, components))}
        return cls(base_dim, len(components), (0, 1), coeffs)

    def __getitem__(self, key: Key):
        return self.coefficients.get((tuple(key[0]), tuple(key[1])), 0.0)

    def _check(self, other: "DoubleForm"):
        if self.base_dim != other.base_dim or self.fiber_rank != other.fiber_rank:
            raise ValueError(
                f"dimension mismatch: ({self.base_dim},{self.fiber_rank}) vs "
                f"({other.base_dim},{other.fiber_rank})"
            )

    def __add__(self, other: "DoubleForm") -> "DoubleForm":
        self._check(other)
        if self.bidegree != other.bidegree:
            raise ValueError(f"cannot add bidegrees {self.bidegree} and {other.bidegree}")
        out = dict(self.coefficients)
        for k, val in other.coefficients.items():
            out[k] = out[k] + val if k in out else val
        return DoubleForm(self.base_dim, self.fiber_rank, self.bidegree, out)

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor) -> "DoubleForm":
        return DoubleForm(
            self.base_dim, self.fiber_rank, self.bidegree,
            {k: val * factor for k, val in self.coefficients.items()},
        )

    def __mul__(self, other):
        if isinstance(other, DoubleForm):
            return df_product(self, other)
        return self.scale(other)

    def __rmul__(self, factor):
        return self.scale(factor)

    def map_coefficients(self, fn) -> "DoubleForm":
        return DoubleForm(
            self.base_dim, self.fiber_rank, self.bidegree,
            {k: fn(val) for k, val in self.coefficients.items()},
        )

    def max_abs(self) -> float:
        if not self.coefficients:
            return 0.0
        return max(float(np.max(np.abs(np.asarray(v, dtype=float)))) for v in self.coefficients.values())


def df_product(a: DoubleForm, b: DoubleForm) -> DoubleForm:
    a._check(b)
    u = a.bidegree[0] + b.bidegree[0]
    v = a.bidegree[1] + b.bidegree[1]
    out: Dict[Key, Any] = {}
    if u > a.base_dim or v > a.fiber_rank:
        return DoubleForm(a.base_dim, a.fiber_rank, (u, v), out)
    for (i1, j1), x in a.coefficients.items():
        for (i2, j2), y in b.coefficients.items():
            s = merge_sign(i1, i2)
            if s == 0:
                continue
            t = merge_sign(j1, j2)
            if t == 0:
                continue
            key = (merge_index(i1, i2), merge_index(j1, j2))
            term = x * y if s * t > 0 else -(x * y)
            out[key] = out[key] + term if key in out else term
    return DoubleForm(a.base_dim, a.fiber_rank, (u, v), out)


def df_power(a: DoubleForm, p: int, method: str = "squaring") -> DoubleForm:
    """``a^p``; ``p = 0`` gives the unit."""
    if p < 0:
        raise ValueError("power must be nonnegative")
    result = DoubleForm.one(a.base_dim, a.fiber_rank)
    if method == "naive":
        for _ in range(p):
            result = df_product(result, a)
        return result
    if method != "squaring":
        raise ValueError(f"unknown method {method!r}")
    base = a
    while p:
        if p & 1:
            result = df_product(result, base)
        p >>= 1
        if p:
            base = df_product(base, base)
    return result


def fiber_berezin(a: DoubleForm, h: BilinearForm, orientation: int = 1) -> ExteriorElement:
    """Base form multiplying ``vol_h`` in the fiber slot."""
    if a.fiber_rank != h.dimension:
        raise ValueError("fiber rank does not match the bilinear form")
    if a.bidegree[1] != a.fiber_rank:
        raise ValueError(f"fiber degree {a.bidegree[1]} is not the top degree {a.fiber_rank}")
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1 or -1")
    top = tuple(range(a.fiber_rank))
    coeffs = {}
    for (i, j), val in a.coefficients.items():
        if j == top:
            coeffs[i] = val if orientation == 1 else -val
    return ExteriorElement(a.base_dim, a.bidegree[0], coeffs)


def gauss_contraction(first: Sequence[DoubleForm], second: Sequence[DoubleForm], g_normal: BilinearForm) -> DoubleForm:
    """``g(B, C)`` for normal-valued (1,1) forms given as component lists.

    On pure tensors ``g(b1 x b2 x nu1, c1 x c2 x nu2) = g(nu1, nu2) (b1^c1) x (b2^c2)``,
    which is the double-form product of the scalar parts.
    """
    if len(first) != len(second) or len(first) != g_normal.dimension:
        raise ValueError("mismatched normal rank")
    if not first:
        raise ValueError("empty normal frame")
    base_dim, rank = first[0].base_dim, first[0].fiber_rank
    total = DoubleForm.zero(base_dim, rank, (2, 2))
    for a, (b, c) in enumerate(zip(first, second)):
        for form in (b, c):
            if form.bidegree != (1, 1):
                raise ValueError("second fundamental forms must have bidegree (1,1)")
        # diagonal normal metric
        total = total + df_product(b, c).scale(float(g_normal.signs[a]))
    return total


def exterior_derivative(form: ExteriorElement, partial: Callable[[Any, int], Any]) -> ExteriorElement:
    """``d`` of a base form whose coefficients support ``partial(coef, i)``."""
    m = form.rank
    total = ExteriorElement.zero(m, form.degree + 1)
    for i in range(m):
        dx = ExteriorElement.basis(m, (i,))
        d_i = form.map_coefficients(lambda c, i=i: partial(c, i))
        total = total + dx.wedge(d_i)
    return total


@dataclass(frozen=True)
class Box:
    """Axis-aligned box chart ``prod [lo_i, hi_i]``."""

    lo: Tuple[float, ...]
    hi: Tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(x) for x in self.lo)
        hi = tuple(float(x) for x in self.hi)
        if len(lo) != len(hi) or any(a >= b for a, b in zip(lo, hi)):
            raise ValueError("box needs lo < hi on every axis")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def cube(cls, dim: int, lo: float = 0.0, hi: float = 1.0) -> "Box":
        return cls((lo,) * dim, (hi,) * dim)

    @property
    def dim(self) -> int:
        return len(self.lo)

    def gauss_legendre(self, points_per_axis: int = 16) -> Tuple[np.ndarray, np.ndarray]:
        """Tensor-product Gauss-Legendre nodes ``(N, dim)`` and weights ``(N,)``."""
        x, w = np.polynomial.legendre.leggauss(points_per_axis)
        axes, weights = [], []
        for a, b in zip(self.lo, self.hi):
            axes.append(0.5 * (b - a) * x + 0.5 * (b + a))
            weights.append(0.5 * (b - a) * w)
        if not axes:
            return np.zeros((1, 0)), np.ones(1)
        nodes = np.array(list(itertools.product(*axes)))
        wts = np.array([math.prod(c) for c in itertools.product(*weights)])
        return nodes, wts

    def probe_grid(self, points_per_axis: int = 9) -> np.ndarray:
        axes = [np.linspace(a, b, points_per_axis) for a, b in zip(self.lo, self.hi)]
        return np.array(list(itertools.product(*axes)))

    def contains(self, points, tol: float = 1e-12) -> np.ndarray:
        pts = np.atleast_2d(points)
        return np.all((pts >= np.array(self.lo) - tol) & (pts <= np.array(self.hi) + tol), axis=1)


@dataclass
class DoubleFormField:
    """A double form of fixed bidegree over a box chart.

    ``value(points)`` returns a :class:`DoubleForm` (or, for fiber degree 0,
    an :class:`ExteriorElement`) whose coefficients are arrays over the
    points.
    """

    chart: Box
    bidegree: Tuple[int, int]
    value: Callable[[np.ndarray], Any]
    derivative_mode: str = "exact"
    step: float = 1e-5

    def __call__(self, points):
        return self.value(np.atleast_2d(np.asarray(points, dtype=float)))

    def integrate(self, points_per_axis: int = 16, orientation: int = 1) -> float:
        """Integral of a top-degree scalar form over the chart."""
        if self.bidegree != (self.chart.dim, 0):
            raise ValueError("only top-degree scalar forms can be integrated over the chart")
        nodes, weights = self.chart.gauss_legendre(points_per_axis)
        form = self(nodes)
        coef = form[tuple(range(self.chart.dim))] if isinstance(form, ExteriorElement) else form[(tuple(range(self.chart.dim)), ())]
        return orientation * float(np.sum(np.asarray(coef) * weights))
