"""Constant-curvature models and geodesic simplices.

Models: the unit sphere in ``R^{d+1}`` (curvature +1), ``R^d`` (0), and
the upper sheet of ``<x,x> = -1`` in Minkowski space with
``<x,y> = -x0 y0 + x1 y1 + ...`` (curvature -1). Geodesic hyperplanes are
linear, so the facet normals of a simplex come from linear algebra, and
the outer cone at a face is spanned by the normals of its facets in the
tangent space at any of its points. Ideal hyperbolic vertices are null
vectors scaled to ``x0 = 1``.

Four-dimensional volumes are estimated by Monte Carlo in a projective
chart (Klein for hyperbolic, gnomonic for spherical) where the simplex
is affine. To keep the variance finite at ideal vertices the simplex is
split by a partition of unity ``w_i = lam_i^p / sum_j lam_j^p`` and each
piece is sampled as a cone from its vertex.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm

from . import montecarlo
from .polytope import DEFAULT_SAMPLES, SolidAngle, cone_fraction
from .report import Report

EXACT_TOL = 1e-8
MC_TOL = 1e-3
PARTITION_POWER = 4


def sphere_volume(k: int) -> float:
    """``vol(S^k)``, with ``vol(S^-1) = 1``."""
    if k < -1:
        raise ValueError("sphere dimension must be >= -1")
    if k == -1:
        return 1.0
    return 2 * math.pi ** ((k + 1) / 2) / math.gamma((k + 1) / 2)


@dataclass(frozen=True)
class SpaceForm:
    curvature: int
    dim: int

    def __post_init__(self):
        if self.curvature not in (-1, 0, 1):
            raise ValueError("curvature must be -1, 0 or +1")
        if self.dim < 1:
            raise ValueError("dimension must be positive")

    @property
    def ambient_dim(self) -> int:
        return self.dim if self.curvature == 0 else self.dim + 1

    @property
    def signs(self) -> np.ndarray:
        s = np.ones(self.ambient_dim)
        if self.curvature == -1:
            s[0] = -1.0
        return s

    def inner(self, x, y) -> np.ndarray:
        return np.einsum("...i,i,...i->...", np.asarray(x, dtype=float), self.signs, np.asarray(y, dtype=float))

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.ambient_dim:
            return False
        if self.curvature == 0:
            return True
        target = 1.0 if self.curvature == 1 else -1.0
        ok = abs(float(self.inner(x, x)) - target) <= tol * max(1.0, float(np.dot(x, x)))
        return ok and (self.curvature == 1 or x[0] > 0)

    def normalize(self, x) -> np.ndarray:
        """Scale onto the model (or the ``x0 = 1`` slice of the light cone for null vectors)."""
        x = np.asarray(x, dtype=float)
        if self.curvature == 0:
            return x
        q = float(self.inner(x, x))
        if self.curvature == 1:
            return x / math.sqrt(q)
        if x[0] <= 0:
            raise ValueError("hyperbolic points must have x0 > 0")
        if abs(q) <= 1e-12 * float(np.dot(x, x)):
            return x / x[0]
        if q >= 0:
            raise ValueError("vector is spacelike, not a hyperbolic point")
        return x / math.sqrt(-q)

    def from_klein(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        if self.curvature != -1:
            raise ValueError("Klein coordinates only apply to hyperbolic space")
        r2 = float(k @ k)
        if r2 > 1 + 1e-12:
            raise ValueError("Klein point outside the unit ball")
        if r2 >= 1 - 1e-12:
            return np.concatenate([[1.0], k])
        return np.concatenate([[1.0], k]) / math.sqrt(1 - r2)

    def random_isometry(self, rng: np.random.Generator, boost: float = 0.5) -> np.ndarray:
        """Random orthogonal map, or a Lorentz-orthochronous one for curvature -1."""
        n = self.ambient_dim
        if self.curvature != -1:
            q, r = np.linalg.qr(rng.standard_normal((n, n)))
            return q * np.sign(np.diag(r))
        # spatial rotation, boost along x1, another spatial rotation
        rots = []
        for _ in range(2):
            qs, rs = np.linalg.qr(rng.standard_normal((n - 1, n - 1)))
            rot = np.eye(n)
            rot[1:, 1:] = qs * np.sign(np.diag(rs))
            rots.append(rot)
        t = boost * rng.standard_normal()
        b = np.eye(n)
        b[0, 0] = b[1, 1] = math.cosh(t)
        b[0, 1] = b[1, 0] = math.sinh(t)
        return rots[0] @ b @ rots[1]


@dataclass
class GeodesicPolytope:
    """Geodesic simplex; facet ``i`` is opposite vertex ``i``."""

    space: SpaceForm
    vertices: np.ndarray
    ideal: Tuple[bool, ...] = ()

    def __post_init__(self):
        sp = self.space
        verts = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if verts.shape != (sp.dim + 1, sp.ambient_dim):
            raise ValueError(f"a {sp.dim}-simplex needs {sp.dim + 1} vertices in R^{sp.ambient_dim}")
        ideal = tuple(bool(b) for b in self.ideal) or (False,) * len(verts)
        if len(ideal) != len(verts):
            raise ValueError("one ideal flag per vertex")
        if any(ideal) and sp.curvature != -1:
            raise ValueError("ideal vertices are only allowed in hyperbolic space")
        clean = []
        for v, is_ideal in zip(verts, ideal):
            if sp.curvature == -1:
                q = float(sp.inner(v, v))
                if v[0] <= 0:
                    raise ValueError("hyperbolic vertices need x0 > 0")
                if is_ideal:
                    if abs(q) > 1e-9 * float(v @ v):
                        raise ValueError("ideal vertex is not a null vector")
                    v = v / v[0]
                elif abs(q + 1) > 1e-9 * max(1.0, float(v @ v)):
                    raise ValueError("finite vertex is not on the hyperboloid")
            elif sp.curvature == 1 and abs(float(v @ v) - 1) > 1e-9:
                raise ValueError("spherical vertex is not a unit vector")
            clean.append(v)
        verts = np.array(clean)
        if sp.curvature == 0:
            edge = verts[1:] - verts[0]
            if abs(np.linalg.det(edge)) < 1e-12 * max(1.0, np.abs(edge).max()) ** sp.dim:
                raise ValueError("degenerate simplex")
        else:
            if abs(np.linalg.det(verts)) < 1e-12 * max(1.0, np.abs(verts).max()) ** len(verts):
                raise ValueError("degenerate simplex")
            if sp.curvature == 1:
                gram = verts @ verts.T
                if np.any(gram[np.triu_indices(len(verts), 1)] <= -1 + 1e-12):
                    raise ValueError("spherical vertices must lie in an open hemisphere")
        self.vertices = verts
        self.ideal = ideal
        self.normals = self._facet_normals()

    @property
    def dim(self) -> int:
        return self.space.dim

    def _facet_normals(self) -> np.ndarray:
        sp, v = self.space, self.vertices
        out = []
        for i in range(len(v)):
            others = np.delete(v, i, axis=0)
            if sp.curvature == 0:
                rows = others[1:] - others[0]
                ref = v[i] - others[0]
            else:
                rows = others * sp.signs
                ref = v[i]
            if len(rows):
                _, _, vt = np.linalg.svd(rows)
                n = vt[-1]
            else:
                n = np.ones(sp.ambient_dim)
            if sp.curvature == 0:
                n = n / np.linalg.norm(n)
                if n @ ref > 0:
                    n = -n
            else:
                q = float(sp.inner(n, n))
                if q <= 0:
                    raise ValueError("facet does not meet the model")
                n = n / math.sqrt(q)
                if sp.inner(n, ref) > 0:
                    n = -n
            out.append(n)
        return np.array(out)

    def faces(self, dim: int) -> List[Tuple[int, ...]]:
        return list(itertools.combinations(range(len(self.vertices)), dim + 1))

    def active_facets(self, face: Sequence[int]) -> Tuple[int, ...]:
        return tuple(i for i in range(len(self.vertices)) if i not in face)

    def is_ideal_face(self, face: Sequence[int]) -> bool:
        return any(self.ideal[i] for i in face)

    def point_on_face(self, face: Sequence[int]) -> np.ndarray:
        """Model point at the vertex barycenter (finite even for ideal faces of dim >= 1)."""
        return self.space.normalize(self.vertices[list(face)].mean(axis=0))

    def transform(self, isometry) -> "GeodesicPolytope":
        g = np.asarray(isometry, dtype=float)
        verts = self.vertices @ g.T
        return GeodesicPolytope(self.space, verts, self.ideal)

    def to_json(self) -> dict:
        return {
            "curvature": self.space.curvature,
            "dim": self.dim,
            "vertices": [{"coords": v.tolist(), "ideal": b} for v, b in zip(self.vertices, self.ideal)],
        }

    @classmethod
    def from_json(cls, data: dict) -> "GeodesicPolytope":
        sp = SpaceForm(int(data["curvature"]), int(data["dim"]))
        verts = np.array([v["coords"] for v in data["vertices"]], dtype=float)
        ideal = tuple(bool(v.get("ideal", False)) for v in data["vertices"])
        if sp.curvature != 0:
            verts = np.array([sp.normalize(v) if not b else v / v[0] for v, b in zip(verts, ideal)])
        return cls(sp, verts, ideal)


# ---------------------------------------------------------------- angles


def outer_gram(poly: GeodesicPolytope, face: Sequence[int]) -> np.ndarray:
    active = list(poly.active_facets(face))
    n = poly.normals[active]
    return np.einsum("ai,i,bi->ab", n, poly.space.signs, n)


def tangent_outer_angle(
    poly: GeodesicPolytope,
    face: Sequence[int],
    at: Optional[np.ndarray] = None,
    seed=0,
    samples: int = DEFAULT_SAMPLES,
) -> SolidAngle:
    """Outer solid-angle fraction of ``face`` from its facet normals at a face point.

    The facet normals are tangent at every point of their hyperplane, so
    the Gram matrix, and with it the angle, is the same all along the face.
    """
    face = tuple(sorted(face))
    if len(face) == len(poly.vertices):
        return SolidAngle(1.0, 0.0, "exact")
    if len(face) == 1 and poly.ideal[face[0]]:
        raise ValueError("outer angle at an ideal vertex is only defined as a limit")
    x = poly.point_on_face(face) if at is None else np.asarray(at, dtype=float)
    sp = poly.space
    if not sp.contains(x):
        raise ValueError("evaluation point is not in the model")
    active = list(poly.active_facets(face))
    if sp.curvature == 0:
        offsets = np.einsum("ai,ai->a", poly.normals[active], poly.vertices[list(face)][[0] * len(active)])
        off_plane = poly.normals[active] @ x - offsets
    else:
        off_plane = sp.inner(poly.normals[active], x)
    if np.max(np.abs(off_plane), initial=0.0) > 1e-8 * max(1.0, float(np.abs(x).max())):
        raise ValueError("evaluation point is not on the face")
    return cone_fraction(outer_gram(poly, face), seed, samples, path=face + (97,))


def outer_dihedral_angle(poly: GeodesicPolytope, face: Sequence[int]) -> float:
    """Angle between the two outer normals at a codimension-2 face, in radians."""
    g = outer_gram(poly, face)
    if g.shape != (2, 2):
        raise ValueError("dihedral angles need a codimension-2 face")
    return math.acos(max(-1.0, min(1.0, g[0, 1] / math.sqrt(g[0, 0] * g[1, 1]))))


# ---------------------------------------------------------------- volumes


def _tangent_toward(sp: SpaceForm, a, b) -> np.ndarray:
    if sp.curvature == 0:
        return b - a
    if sp.curvature == 1:
        return b - sp.inner(a, b) * a
    return b + sp.inner(a, b) * a


def triangle_angles(poly: GeodesicPolytope, face: Sequence[int]) -> List[float]:
    sp = poly.space
    out = []
    for k in range(3):
        a = face[k]
        b, c = face[(k + 1) % 3], face[(k + 2) % 3]
        if poly.ideal[a]:
            out.append(0.0)
            continue
        va, vb, vc = poly.vertices[a], poly.vertices[b], poly.vertices[c]
        ub, uc = _tangent_toward(sp, va, vb), _tangent_toward(sp, va, vc)
        cos = float(sp.inner(ub, uc)) / math.sqrt(float(sp.inner(ub, ub)) * float(sp.inner(uc, uc)))
        out.append(math.acos(max(-1.0, min(1.0, cos))))
    return out


def _projective_simplex(poly: GeodesicPolytope, face: Sequence[int]):
    """Affine chart image of the face and the volume density there."""
    sp = poly.space
    v = poly.vertices[list(face)]
    d = len(face) - 1
    if sp.curvature == -1:
        # the face spans a (d+1)-dimensional timelike subspace; use an orthonormal frame of it
        center = sp.normalize(v.mean(axis=0))
        frame = _lorentz_frame(sp, center, v)
        coords = np.array([[sp.inner(x, e) / -sp.inner(x, center) for e in frame] for x in v])
        exponent = -(d + 1) / 2

        def density(y):
            return np.power(np.maximum(1.0 - np.einsum("ni,ni->n", y, y), 0.0), exponent)

        return coords, density
    center = v.mean(axis=0)
    center = center / np.linalg.norm(center)
    basis = _orthonormal_complement(center, v)
    coords = np.array([(x / (x @ center)) @ basis.T for x in v])
    exponent = -(d + 1) / 2

    def density(y):
        return np.power(1.0 + np.einsum("ni,ni->n", y, y), exponent)

    return coords, density


def _orthonormal_complement(center, v) -> np.ndarray:
    span = v - np.outer(v @ center, center)
    u, s, vt = np.linalg.svd(span)
    rank = len(v) - 1
    return vt[:rank]


def _lorentz_frame(sp: SpaceForm, center, v) -> np.ndarray:
    """Orthonormal spacelike vectors spanning the face directions at ``center``."""
    span = v + np.outer(sp.inner(v, center), center)
    basis: List[np.ndarray] = []
    for w in span:
        for e in basis:
            w = w - sp.inner(w, e) * e
        q = float(sp.inner(w, w))
        if q > 1e-12 * max(1.0, float(w @ w)):
            basis.append(w / math.sqrt(q))
    if len(basis) != len(v) - 1:
        raise ValueError("degenerate face")
    return np.array(basis)


def simplex_integral(coords: np.ndarray, density, seq: np.random.SeedSequence, samples: int, power: int = PARTITION_POWER):
    """``int_simplex density`` by vertex-centered cone sampling with a partition of unity."""
    coords = np.asarray(coords, dtype=float)
    d = coords.shape[1]
    if coords.shape[0] != d + 1:
        raise ValueError("need d+1 vertices")
    vol = abs(np.linalg.det(coords[1:] - coords[0])) / math.factorial(d)
    k = d + 1

    def draw(rng, n):
        i = rng.integers(0, k, size=n)
        s = rng.random(n)
        mu = rng.dirichlet(np.ones(d), size=n)
        # barycentric coordinates: lam_i = 1 - s, the others s * mu
        lam = np.empty((n, k))
        rows = np.arange(n)
        others = np.array([[j for j in range(k) if j != a] for a in range(k)])[i]
        lam[rows[:, None], others] = s[:, None] * mu
        lam[rows, i] = 1.0 - s
        y = lam @ coords
        lp = lam**power
        w = lp[rows, i] / lp.sum(axis=1)
        return k * vol * d * s ** (d - 1) * w * density(y)

    return montecarlo.run_blocks(draw, seq, samples)


def face_volume(
    poly: GeodesicPolytope,
    face: Sequence[int],
    seed=0,
    samples: int = DEFAULT_SAMPLES,
) -> Tuple[float, float, str]:
    """``(value, abs_error, method)`` for the metric volume of a face."""
    face = tuple(sorted(face))
    sp = poly.space
    dim = len(face) - 1
    if dim == 0:
        return 1.0, 0.0, "exact"
    if dim == 1:
        a, b = poly.vertices[list(face)]
        if poly.is_ideal_face(face):
            return math.inf, 0.0, "exact"
        if sp.curvature == 0:
            return float(np.linalg.norm(b - a)), 0.0, "exact"
        c = float(sp.inner(a, b))
        return (math.acos(max(-1.0, min(1.0, c))) if sp.curvature == 1 else math.acosh(max(1.0, -c))), 0.0, "exact"
    if dim == 2:
        if sp.curvature == 0:
            a, b, c = poly.vertices[list(face)]
            e1, e2 = b - a, c - a
            g = np.array([[e1 @ e1, e1 @ e2], [e1 @ e2, e2 @ e2]])
            return 0.5 * math.sqrt(max(np.linalg.det(g), 0.0)), 0.0, "exact"
        angles = sum(triangle_angles(poly, face))
        area = angles - math.pi if sp.curvature == 1 else math.pi - angles
        return area, 0.0, "exact"
    if sp.curvature == 0:
        v = poly.vertices[list(face)]
        e = v[1:] - v[0]
        return math.sqrt(max(np.linalg.det(e @ e.T), 0.0)) / math.factorial(dim), 0.0, "exact"
    if dim % 2:
        raise ValueError("odd-dimensional curved faces above dimension 1 are not supported")
    coords, density = _projective_simplex(poly, face)
    est = simplex_integral(coords, density, montecarlo.seed_sequence(seed, *face, 211), samples)
    return est.mean, est.three_sigma, "monte-carlo"


# ---------------------------------------------------------------- Gauss-Bonnet


@dataclass
class GBReport(Report):
    faces: List[Dict] = field(default_factory=list)

    def to_dict(self):
        out = super().to_dict()
        out["faces"] = Report("", 0.0, 0.0, details={"faces": self.faces}).to_dict()["faces"]
        return out


def gauss_bonnet_constant_curvature(
    poly: GeodesicPolytope,
    seed=0,
    samples: int = DEFAULT_SAMPLES,
    tol: Optional[float] = None,
    euler_characteristic: int = 1,
) -> GBReport:
    """Sum over even-dimensional faces of ``k^j vol_2j / vol(S^2j) * outer fraction``."""
    if any(poly.ideal):
        raise ValueError("face-sum check needs a compact polytope; use the ideal 4-simplex check")
    d, k = poly.dim, poly.space.curvature
    if d > 4:
        raise ValueError("dimension > 4 is not supported")
    rows, errors, total = [], [], 0.0
    monte_carlo = False
    for j in range(d // 2 + 1):
        for face in poly.faces(2 * j):
            coef = float(k**j) / sphere_volume(2 * j)
            if coef == 0.0:
                vol, verr, vmeth = 0.0, 0.0, "skipped"
            else:
                vol, verr, vmeth = face_volume(poly, face, seed, samples)
            angle = tangent_outer_angle(poly, face, seed=seed, samples=samples)
            term = coef * vol * angle.fraction
            err = abs(coef) * (verr * angle.fraction + abs(vol) * angle.abs_error)
            monte_carlo |= vmeth == "monte-carlo" or angle.method == "monte-carlo"
            rows.append({
                "face": list(face), "dim": 2 * j, "volume": vol, "volume_error": verr,
                "fraction": angle.fraction, "fraction_error": angle.abs_error, "term": term,
            })
            errors.append(err)
            total += term
    tol = tol if tol is not None else (MC_TOL if monte_carlo else EXACT_TOL)
    return GBReport(
        "gauss_bonnet_constant_curvature", euler_characteristic / 2, total,
        math.sqrt(sum(e * e for e in errors)), tol, seed=int(seed),
        details={"curvature": k, "dim": d, "samples": samples, "euler_characteristic": euler_characteristic},
        faces=rows,
    )


def ideal_4simplex_volume_check(
    poly: GeodesicPolytope,
    seed=0,
    samples: int = 10_000_000,
    rel_tol: float = 0.01,
) -> Report:
    """MC volume against ``-2 pi^2 + (pi/3) * sum of outer 2-face angles``.

    Passes when the gap is within ``max(rel_tol * |rhs|, 3 sigma)``; the
    tolerance field stores the part of that allowance beyond ``abs_error``.
    """
    if poly.space.curvature != -1 or poly.dim != 4 or not all(poly.ideal):
        raise ValueError("need a hyperbolic 4-simplex with five ideal vertices")
    angles = {face: outer_dihedral_angle(poly, face) for face in poly.faces(2)}
    total_angle = sum(angles.values())
    rhs = -2 * math.pi**2 + math.pi / 3 * total_angle
    vol, err, _ = face_volume(poly, tuple(range(5)), seed, samples)
    allowed = max(rel_tol * abs(rhs), err)
    return Report(
        "ideal_4simplex_volume", vol, rhs, err, allowed - err, seed=int(seed),
        details={
            "samples": samples,
            "sum_outer_angles": total_angle,
            "outer_angles": [{"face": list(f), "angle": a} for f, a in angles.items()],
            "partition_power": PARTITION_POWER,
        },
    )


# ---------------------------------------------------------------- builders


def octant_triangle() -> GeodesicPolytope:
    return GeodesicPolytope(SpaceForm(1, 2), np.eye(3))


def regular_hyperbolic_triangle(angle: float = math.pi / 4) -> GeodesicPolytope:
    """Regular triangle centered at the apex of the hyperboloid with the given interior angle."""
    if not 0 < angle < math.pi / 3:
        raise ValueError("a regular hyperbolic triangle needs angle in (0, pi/3)")
    # side from the angle form of the law of cosines, then the circumradius
    side = math.acosh((math.cos(angle) + math.cos(angle) ** 2) / math.sin(angle) ** 2)
    radius = math.asinh(math.sinh(side / 2) / math.sin(math.pi / 3))
    t = 2 * math.pi * np.arange(3) / 3
    verts = np.stack([np.full(3, math.cosh(radius)), math.sinh(radius) * np.cos(t), math.sinh(radius) * np.sin(t)], axis=1)
    return GeodesicPolytope(SpaceForm(-1, 2), verts)


def regular_ideal_4simplex() -> GeodesicPolytope:
    return ideal_simplex_from_directions(_regular_simplex_directions(4))


def _regular_simplex_directions(d: int) -> np.ndarray:
    e = np.eye(d + 1) - 1.0 / (d + 1)
    _, _, vt = np.linalg.svd(e)
    dirs = e @ vt[:d].T
    return dirs / np.linalg.norm(dirs, axis=1, keepdims=True)


def ideal_simplex_from_directions(directions) -> GeodesicPolytope:
    dirs = np.asarray(directions, dtype=float)
    dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
    verts = np.hstack([np.ones((len(dirs), 1)), dirs])
    return GeodesicPolytope(SpaceForm(-1, dirs.shape[1]), verts, (True,) * len(dirs))


def perturbed_ideal_4simplex(rng: np.random.Generator, scale: float = 0.15) -> GeodesicPolytope:
    """Regular ideal simplex with one vertex ray moved by a small random rotation."""
    dirs = _regular_simplex_directions(4)
    a = scale * rng.standard_normal((4, 4))
    dirs[0] = expm(a - a.T) @ dirs[0]
    return ideal_simplex_from_directions(dirs)


def random_simplex(rng: np.random.Generator, curvature: int, dim: int, spread: float = 0.6) -> GeodesicPolytope:
    sp = SpaceForm(curvature, dim)
    for _ in range(1000):
        if curvature == 0:
            verts = rng.standard_normal((dim + 1, dim))
        elif curvature == 1:
            # a cap around the north pole keeps the simplex inside a hemisphere
            tang = spread * rng.standard_normal((dim + 1, dim))
            verts = np.hstack([tang, np.ones((dim + 1, 1))])
            verts = verts / np.linalg.norm(verts, axis=1, keepdims=True)
        else:
            k = rng.standard_normal((dim + 1, dim))
            k = spread * k / np.maximum(1.0, np.linalg.norm(k, axis=1, keepdims=True) / 0.95)
            verts = np.array([sp.from_klein(x) for x in k])
        try:
            poly = GeodesicPolytope(sp, verts)
        except ValueError:
            continue
        if _well_shaped(poly):
            return poly
    raise RuntimeError("could not draw a nondegenerate simplex")


def _well_shaped(poly: GeodesicPolytope) -> bool:
    g = np.einsum("ai,i,bi->ab", poly.normals, poly.space.signs, poly.normals)
    off = g[np.triu_indices(len(g), 1)]
    return bool(np.all(off < 0.98) and np.all(off > -0.98))
