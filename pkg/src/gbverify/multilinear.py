"""Finite-dimensional exterior algebra: signatures, skew forms, Pfaffians.

Multi-indices are 0-based strictly increasing tuples. Coefficients are
ring-generic: anything supporting ``+`` and ``*`` (floats, numpy arrays,
:class:`~gbverify.calculus.Polynomial`, :class:`~gbverify.calculus.Jet`)
works, which lets the same algebra run pointwise, batched over a grid,
or symbolically.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, Iterable, Sequence, Tuple

import numpy as np

Index = Tuple[int, ...]


@lru_cache(maxsize=None)
def merge_sign(first: Index, second: Index) -> int:
    """Sign of the shuffle sorting ``first + second``; 0 if they overlap."""
    if set(first) & set(second):
        return 0
    inversions = sum(1 for i in first for j in second if i > j)
    return -1 if inversions % 2 else 1


@lru_cache(maxsize=None)
def merge_index(first: Index, second: Index) -> Index:
    return tuple(sorted(first + second))


def _is_increasing(index: Sequence[int]) -> bool:
    return all(a < b for a, b in zip(index, index[1:]))


@dataclass(frozen=True)
class BilinearForm:
    """Diagonal nondegenerate symmetric form ``h = diag(signs)``."""

    signs: Tuple[int, ...]

    def __post_init__(self):
        signs = tuple(int(s) for s in self.signs)
        if any(s not in (1, -1) for s in signs):
            raise ValueError(f"signature entries must be +1 or -1, got {self.signs}")
        object.__setattr__(self, "signs", signs)

    @classmethod
    def euclidean(cls, dimension: int) -> "BilinearForm":
        return cls((1,) * dimension)

    @property
    def dimension(self) -> int:
        return len(self.signs)

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(np.asarray(self.signs, dtype=float))

    def __call__(self, u, v) -> float:
        return float(np.dot(np.asarray(u) * np.asarray(self.signs), np.asarray(v)))

    def volume_form(self, orientation: int = 1) -> "ExteriorElement":
        """``vol_h``: value 1 on the (oriented) standard orthogonal basis."""
        top = tuple(range(self.dimension))
        return ExteriorElement(self.dimension, self.dimension, {top: float(orientation)})


@dataclass(frozen=True)
class SkewForm:
    """An h-skew endomorphism ``A``: ``(HA)^T = -HA`` with ``H = diag(signs)``."""

    form: BilinearForm
    entries: np.ndarray
    tol: float = 1e-12

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        n = self.form.dimension
        if entries.shape != (n, n):
            raise ValueError(
                f"dimension mismatch: form has dimension {n}, entries have shape {entries.shape}"
            )
        ha = self.form.matrix @ entries
        scale = max(1.0, float(np.abs(entries).max(initial=0.0)))
        if not np.allclose(ha.T, -ha, atol=self.tol * scale, rtol=0.0):
            raise ValueError("entries are not skew with respect to the bilinear form")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @classmethod
    def euclidean(cls, entries) -> "SkewForm":
        entries = np.asarray(entries, dtype=float)
        return cls(BilinearForm.euclidean(entries.shape[0]), entries)


@dataclass
class ExteriorElement:
    """Homogeneous element of degree ``degree`` in the exterior algebra of ``R^rank``.

    Absent keys are zero coefficients.
    """

    rank: int
    degree: int
    coefficients: Dict[Index, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.degree:
            raise ValueError("degree must be nonnegative")
        clean = {}
        for key, value in self.coefficients.items():
            key = tuple(int(k) for k in key)
            if len(key) != self.degree or not _is_increasing(key):
                raise ValueError(f"malformed multi-index {key} for degree {self.degree}")
            if key and (key[0] < 0 or key[-1] >= self.rank):
                raise ValueError(f"multi-index {key} out of range for rank {self.rank}")
            clean[key] = value
        self.coefficients = clean

    @classmethod
    def zero(cls, rank: int, degree: int) -> "ExteriorElement":
        return cls(rank, degree, {})

    @classmethod
    def one(cls, rank: int) -> "ExteriorElement":
        return cls(rank, 0, {(): 1.0})

    @classmethod
    def basis(cls, rank: int, index: Iterable[int], coefficient=1.0) -> "ExteriorElement":
        index = tuple(index)
        return cls(rank, len(index), {index: coefficient})

    def __getitem__(self, index: Index):
        return self.coefficients.get(tuple(index), 0.0)

    def _check_compatible(self, other: "ExteriorElement"):
        if self.rank != other.rank:
            raise ValueError(f"rank mismatch: {self.rank} vs {other.rank}")

    def __add__(self, other: "ExteriorElement") -> "ExteriorElement":
        self._check_compatible(other)
        if self.degree != other.degree:
            raise ValueError("cannot add elements of different degree")
        out = dict(self.coefficients)
        for key, value in other.coefficients.items():
            out[key] = out[key] + value if key in out else value
        return ExteriorElement(self.rank, self.degree, out)

    def __neg__(self) -> "ExteriorElement":
        return self.scale(-1.0)

    def __sub__(self, other: "ExteriorElement") -> "ExteriorElement":
        return self + (-other)

    def scale(self, factor) -> "ExteriorElement":
        return ExteriorElement(
            self.rank, self.degree, {k: v * factor for k, v in self.coefficients.items()}
        )

    def __rmul__(self, factor) -> "ExteriorElement":
        return self.scale(factor)

    def wedge(self, other: "ExteriorElement") -> "ExteriorElement":
        self._check_compatible(other)
        out: Dict[Index, Any] = {}
        if self.degree + other.degree > self.rank:
            return ExteriorElement(self.rank, self.degree + other.degree, out)
        for k1, v1 in self.coefficients.items():
            for k2, v2 in other.coefficients.items():
                sign = merge_sign(k1, k2)
                if sign == 0:
                    continue
                key = merge_index(k1, k2)
                term = v1 * v2 if sign > 0 else -(v1 * v2)
                out[key] = out[key] + term if key in out else term
        return ExteriorElement(self.rank, self.degree + other.degree, out)

    __xor__ = wedge

    def map_coefficients(self, fn) -> "ExteriorElement":
        return ExteriorElement(
            self.rank, self.degree, {k: fn(v) for k, v in self.coefficients.items()}
        )

    def max_abs(self) -> float:
        if not self.coefficients:
            return 0.0
        return max(float(np.max(np.abs(np.asarray(v, dtype=float)))) for v in self.coefficients.values())


def wedge_power(x: ExteriorElement, p: int) -> ExteriorElement:
    if p < 0:
        raise ValueError("power must be nonnegative")
    result = ExteriorElement.one(x.rank)
    for _ in range(p):
        result = result.wedge(x)
    return result


def omega_from_skew(a: SkewForm) -> ExteriorElement:
    """The 2-form ``omega_A(u, v) = h(u, A v)`` of a skew endomorphism."""
    n = a.form.dimension
    if a.entries.shape != (n, n):
        raise ValueError("dimension mismatch between form and entries")
    signs = a.form.signs
    coefficients = {}
    for i, j in itertools.combinations(range(n), 2):
        value = signs[i] * a.entries[i, j]
        if value != 0.0:
            coefficients[(i, j)] = float(value)
    return ExteriorElement(n, 2, coefficients)


def berezin(x: ExteriorElement, h: BilinearForm, orientation: int = 1):
    """Coefficient of ``vol_h`` in a top-degree element."""
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1 or -1")
    if x.rank != h.dimension:
        raise ValueError(f"rank {x.rank} does not match form dimension {h.dimension}")
    if x.degree != x.rank:
        raise ValueError(f"Berezin integral needs top degree {x.rank}, got {x.degree}")
    top = tuple(range(x.rank))
    # vol_h has coefficient 1 on the standard h-orthogonal basis.
    value = x.coefficients.get(top, 0.0)
    return value if orientation == 1 else -value


def pfaffian(a: SkewForm, orientation: int = 1) -> float:
    """``Pf(A) = B_h[(omega_A)^n] / n!``."""
    dim = a.form.dimension
    if dim % 2:
        raise ValueError("Pfaffian needs an even-dimensional space")
    n = dim // 2
    power = wedge_power(omega_from_skew(a), n)
    return float(berezin(power, a.form, orientation)) / math.factorial(n)


def pfaffian_matching(matrix) -> float:
    """Pfaffian of an antisymmetric matrix by perfect-matching expansion.

    Independent of the wedge-power route; used as an oracle.
    """
    m = np.asarray(matrix, dtype=float)
    if m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    return _matching_sum(tuple(range(m.shape[0])), m)


def _matching_sum(rows: Tuple[int, ...], m: np.ndarray) -> float:
    if not rows:
        return 1.0
    if len(rows) % 2:
        return 0.0
    first, rest = rows[0], rows[1:]
    total = 0.0
    for pos, partner in enumerate(rest):
        if m[first, partner] == 0.0:
            continue
        sign = -1.0 if pos % 2 else 1.0
        remaining = rest[:pos] + rest[pos + 1:]
        total += sign * m[first, partner] * _matching_sum(remaining, m)
    return total


def universal_constant(n: int, k: int, l: int) -> Fraction:
    """``c(n,k,l) = 2^k k! / ((n-1-k)! (2k+1-l)!)`` for ``0 <= l <= 2k+1 <= 2n-1``."""
    if not (0 <= l <= 2 * k + 1 <= 2 * n - 1) or k < 0:
        raise ValueError(f"need 0 <= l <= 2k+1 <= 2n-1, got n={n}, k={k}, l={l}")
    return Fraction(
        2**k * math.factorial(k),
        math.factorial(n - 1 - k) * math.factorial(2 * k + 1 - l),
    )


def double_factorial(n: int) -> int:
    """``n!!`` with ``(-1)!! = 0!! = 1``."""
    if n < -1:
        raise ValueError("double factorial defined for n >= -1")
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def wallis_constants(k: int) -> Tuple[Fraction, float]:
    """Return ``(int_0^1 (1-t^2)^k dt, int_{-pi/2}^{pi/2} cos^{2k})``.

    Closed forms ``(2k)!!/(2k+1)!!`` and ``pi (2k-1)!!/(2k)!!``.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    interval = Fraction(double_factorial(2 * k), double_factorial(2 * k + 1))
    cosine = math.pi * double_factorial(2 * k - 1) / double_factorial(2 * k)
    return interval, cosine


def random_skew(rng: np.random.Generator, dim: int, signs: Sequence[int] | None = None) -> SkewForm:
    """Random h-skew matrix: ``A = H S`` with ``S`` antisymmetric."""
    form = BilinearForm(tuple(signs) if signs is not None else (1,) * dim)
    s = rng.standard_normal((dim, dim))
    s = s - s.T
    return SkewForm(form, form.matrix @ s)

