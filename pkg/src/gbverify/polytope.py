"""Convex polytopes from paired V- and H-representations.

Faces are read off the vertex/facet incidence: for a simple polytope every
subset of the facets active at a vertex cuts out a face, with codimension
equal to the subset size. The outer cone of a face is the positive span
of the outward unit normals of its active facets, and its normalized
solid angle is the fraction of the unit sphere of the normal space it
covers.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import nnls

from . import montecarlo
from .report import Report

INCIDENCE_TOL = 1e-9
DEFAULT_SAMPLES = 1_000_000


@dataclass
class Polytope:
    """``{x : normals @ x <= offsets}`` together with its vertex list."""

    vertices: np.ndarray
    normals: np.ndarray
    offsets: np.ndarray
    tol: float = INCIDENCE_TOL

    def __post_init__(self):
        self.vertices = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        self.normals = np.atleast_2d(np.asarray(self.normals, dtype=float))
        self.offsets = np.asarray(self.offsets, dtype=float).reshape(-1)
        d = self.vertices.shape[1]
        if self.normals.shape[1] != d:
            raise ValueError("halfspace normals and vertices have different dimensions")
        if len(self.offsets) != len(self.normals):
            raise ValueError("one offset per halfspace required")
        if np.any(np.linalg.norm(self.normals, axis=1) == 0):
            raise ValueError("zero halfspace normal")
        slack = self.vertices @ self.normals.T - self.offsets
        scale = np.linalg.norm(self.normals, axis=1)[None, :] * np.maximum(1.0, np.linalg.norm(self.vertices, axis=1))[:, None]
        if np.any(slack > self.tol * scale):
            bad = np.argwhere(slack > self.tol * scale)[0]
            raise ValueError(f"vertex {bad[0]} violates halfspace {bad[1]}")
        self.incidence = np.abs(slack) <= self.tol * scale
        per_vertex = self.incidence.sum(axis=1)
        if np.any(per_vertex < d):
            raise ValueError(f"vertex {int(np.argmin(per_vertex))} lies on fewer than {d} facets")
        if np.any(self.incidence.all(axis=0)):
            raise ValueError("a halfspace is tight at every vertex (polytope is not full-dimensional)")

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def unit_normals(self) -> np.ndarray:
        return self.normals / np.linalg.norm(self.normals, axis=1, keepdims=True)

    @classmethod
    def simplex(cls, vertices) -> "Polytope":
        """Facet ``j`` is opposite vertex ``j``."""
        v = np.asarray(vertices, dtype=float)
        d = v.shape[1]
        if v.shape[0] != d + 1:
            raise ValueError(f"a {d}-simplex needs {d + 1} vertices")
        normals, offsets = [], []
        for j in range(d + 1):
            others = np.delete(v, j, axis=0)
            basis = others[1:] - others[0]
            # null vector of the facet directions
            _, sv, vt = np.linalg.svd(basis) if d > 1 else (None, np.array([1.0]), np.eye(1))
            if d > 1 and sv[-1] < 1e-12 * max(1.0, sv[0]):
                raise ValueError("degenerate simplex")
            n = vt[-1] if d > 1 else np.array([1.0])
            a = float(n @ others[0])
            if n @ v[j] > a:
                n, a = -n, -a
            if abs(n @ v[j] - a) < 1e-12:
                raise ValueError("degenerate simplex")
            normals.append(n)
            offsets.append(a)
        return cls(v, np.array(normals), np.array(offsets))

    @classmethod
    def box(cls, lo: Sequence[float], hi: Sequence[float]) -> "Polytope":
        lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
        d = len(lo)
        verts = np.array([[hi[i] if bits[i] else lo[i] for i in range(d)] for bits in itertools.product((0, 1), repeat=d)])
        eye = np.eye(d)
        return cls(verts, np.vstack([eye, -eye]), np.concatenate([hi, -lo]))

    def transform(self, rotation, shift=None) -> "Polytope":
        q = np.asarray(rotation, dtype=float)
        t = np.zeros(self.dim) if shift is None else np.asarray(shift, dtype=float)
        return Polytope(self.vertices @ q.T + t, self.normals @ q.T, self.offsets + self.normals @ q.T @ t, self.tol)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "vertices": self.vertices.tolist(),
            "halfspaces": [{"normal": n.tolist(), "offset": float(a)} for n, a in zip(self.normals, self.offsets)],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Polytope":
        d = int(data["dim"])
        verts = np.asarray(data["vertices"], dtype=float)
        if verts.ndim != 2 or verts.shape[1] != d:
            raise ValueError("vertex coordinates do not match dim")
        normals = np.asarray([h["normal"] for h in data["halfspaces"]], dtype=float)
        offsets = np.asarray([h["offset"] for h in data["halfspaces"]], dtype=float)
        return cls(verts, normals, offsets)


@dataclass(frozen=True)
class FaceRecord:
    codim: int
    active_facets: Tuple[int, ...]
    vertex_set: Tuple[int, ...]
    barycenter: np.ndarray = field(compare=False)
    outer_generators: np.ndarray = field(compare=False)

    @property
    def dim(self) -> int:
        return len(self.barycenter) - self.codim


def _affine_rank(points: np.ndarray) -> int:
    if len(points) <= 1:
        return 0
    return int(np.linalg.matrix_rank(points[1:] - points[0], tol=1e-9 * max(1.0, np.abs(points).max())))


def build_face_lattice(poly: Polytope) -> Dict[int, List[FaceRecord]]:
    """Faces grouped by codimension; codim 0 is the interior."""
    d = poly.dim
    per_vertex = poly.incidence.sum(axis=1)
    if np.any(per_vertex > d):
        v = int(np.argmax(per_vertex))
        raise ValueError(f"vertex {v} lies on {per_vertex[v]} > {d} facets; only simple polytopes are supported")
    active = [tuple(np.flatnonzero(row)) for row in poly.incidence]
    seen: Dict[Tuple[int, ...], FaceRecord] = {}
    normals = poly.unit_normals
    for facets in active:
        for l in range(d + 1):
            for subset in itertools.combinations(facets, l):
                if subset in seen:
                    continue
                verts = tuple(int(i) for i in np.flatnonzero(poly.incidence[:, list(subset)].all(axis=1))) if l else tuple(range(len(poly.vertices)))
                pts = poly.vertices[list(verts)]
                if _affine_rank(pts) != d - l:
                    raise ValueError(f"facets {subset} do not cut out a face of codimension {l}")
                seen[subset] = FaceRecord(l, subset, verts, pts.mean(axis=0), normals[list(subset)].reshape(l, d))
    lattice: Dict[int, List[FaceRecord]] = {l: [] for l in range(d + 1)}
    for key in sorted(seen, key=lambda k: (len(k), k)):
        lattice[len(key)].append(seen[key])
    return lattice


def euler_sum(lattice: Dict[int, List[FaceRecord]], dim: int) -> int:
    return sum((-1) ** (dim - l) * len(faces) for l, faces in lattice.items())


def cone_contains(generators, v, tol: float = 1e-9, mode: str = "auto") -> bool:
    """Whether ``v`` lies in the closed positive span of ``generators``."""
    g = np.atleast_2d(np.asarray(generators, dtype=float))
    v = np.asarray(v, dtype=float)
    if g.size == 0:
        raise ValueError("empty generator set")
    mat = g.T
    rank = np.linalg.matrix_rank(mat)
    simplicial = rank == g.shape[0]
    if mode == "simplicial" and not simplicial:
        raise ValueError("rank-deficient generator matrix in simplicial mode")
    scale = max(1.0, float(np.linalg.norm(v)))
    if mode in ("auto", "simplicial") and simplicial:
        c, *_ = np.linalg.lstsq(mat, v, rcond=None)
        resid = float(np.linalg.norm(mat @ c - v))
        return bool(resid <= tol * scale and np.all(c >= -tol * scale))
    if mode not in ("auto", "nnls"):
        raise ValueError(f"unknown mode {mode!r}")
    _, resid = nnls(mat, v)
    return bool(resid <= tol * scale)


@dataclass(frozen=True)
class SolidAngle:
    fraction: float
    abs_error: float
    method: str
    seed: Optional[int] = None
    samples: int = 0

    def __post_init__(self):
        if not (-1e-15 <= self.fraction <= 1 + 1e-15) or self.abs_error < 0:
            raise ValueError("solid angle fraction must lie in [0, 1] with nonnegative error")


def cone_fraction(gram, seed=0, samples: int = DEFAULT_SAMPLES, path: Sequence[int] = ()) -> SolidAngle:
    """Normalized measure of the positive span of ``l`` independent unit vectors.

    Only the Gram matrix enters: the generators are realized as the columns
    of the Cholesky factor, so the same routine serves Euclidean and
    tangent-space cones.
    """
    gram = np.atleast_2d(np.asarray(gram, dtype=float))
    l = gram.shape[0]
    if l == 0:
        return SolidAngle(1.0, 0.0, "exact")
    if l == 1:
        return SolidAngle(0.5, 0.0, "exact")
    if l == 2:
        c = gram[0, 1] / math.sqrt(gram[0, 0] * gram[1, 1])
        return SolidAngle(math.acos(max(-1.0, min(1.0, c))) / (2 * math.pi), 0.0, "exact")
    try:
        lower = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:
        raise ValueError("outer generators are linearly dependent") from exc
    inverse = np.linalg.inv(lower.T)

    def draw(rng, n):
        y = rng.standard_normal((n, l))
        return np.all(y @ inverse.T >= 0.0, axis=1)

    est = montecarlo.run_blocks(draw, montecarlo.seed_sequence(seed, *path), samples)
    p = est.mean
    sigma = math.sqrt(max(p * (1 - p), 0.25 / samples) / samples)
    return SolidAngle(p, 3.0 * sigma, "monte-carlo", int(seed), samples)


def outer_solid_angle(poly: Polytope, face: FaceRecord, seed=0, samples: int = DEFAULT_SAMPLES) -> SolidAngle:
    gens = face.outer_generators
    if face.codim == 0:
        return SolidAngle(1.0, 0.0, "exact")
    if len(gens) == 0:
        raise ValueError("proper face without outer generators")
    pts = poly.vertices[list(face.vertex_set)]
    if len(pts) > 1:
        tangents = pts[1:] - pts[0]
        lengths = np.maximum(np.linalg.norm(tangents, axis=1, keepdims=True), 1e-300)
        if np.max(np.abs((tangents / lengths) @ gens.T)) > 1e-8:
            raise ValueError("outer generators are not normal to the face")
    return cone_fraction(gens @ gens.T, seed, samples, path=face.active_facets + (len(poly.normals),))


def triangle_angles_exact(poly: Polytope) -> List[float]:
    """Interior angles of a polygon's vertices, a test oracle."""
    out = []
    for face in build_face_lattice(poly)[poly.dim]:
        n1, n2 = face.outer_generators
        out.append(math.pi - math.acos(max(-1.0, min(1.0, float(n1 @ n2)))))
    return out


def euclidean_angle_sum(poly: Polytope, seed=0, samples: int = DEFAULT_SAMPLES, tol: Optional[float] = None) -> Report:
    """Vertex outer-angle fractions summed; equals the Euler characteristic 1."""
    vertices = build_face_lattice(poly)[poly.dim]
    angles = [outer_solid_angle(poly, f, seed, samples) for f in vertices]
    total = float(sum(a.fraction for a in angles))
    # abs_error entries are 3 sigma each
    err = math.sqrt(sum(a.abs_error**2 for a in angles))
    monte_carlo = any(a.method != "exact" for a in angles)
    if tol is None:
        tol = 1e-3 if monte_carlo else 1e-12
    return Report(
        "euclidean_angle_sum", total, 1.0, err, tol, seed=int(seed),
        details={
            "dim": poly.dim,
            "samples": samples,
            "vertices": [{"vertex": f.vertex_set[0], "fraction": a.fraction, "abs_error": a.abs_error, "method": a.method} for f, a in zip(vertices, angles)],
        },
    )


def random_simplex(rng: np.random.Generator, dim: int, min_volume: float = 0.05) -> Polytope:
    while True:
        v = rng.standard_normal((dim + 1, dim))
        vol = abs(np.linalg.det(v[1:] - v[0])) / math.factorial(dim)
        if vol > min_volume:
            return Polytope.simplex(v)


def regular_polygon(k: int, radius: float = 1.0) -> Polytope:
    t = 2 * math.pi * np.arange(k) / k
    verts = radius * np.stack([np.cos(t), np.sin(t)], axis=1)
    mid = t + math.pi / k
    normals = np.stack([np.cos(mid), np.sin(mid)], axis=1)
    return Polytope(verts, normals, np.full(k, radius * math.cos(math.pi / k)))
