"""Gauss-Bonnet with corners on 2-dimensional space forms.

A region is a counterclockwise closed chain of arcs in model coordinates.
For a disk-type region

    2 pi = k * area - int a dl + sum of corner turning angles,

where ``a`` is the geodesic curvature measured against the outer normal
(so a counterclockwise circle in the plane has ``a = -1``). Area comes
from Green's theorem in a conformal chart: ``int G(|y|^2)(y1 dy2 - y2 dy1)``
with ``G = 1/2`` (plane), ``2/(1+rho)`` (stereographic) or ``2/(1-rho)``
(Poincare disk).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.integrate import quad

from .report import Report
from .spaceforms import GeodesicPolytope, SpaceForm

CLOSURE_TOL = 1e-8
QUAD_TOL = 1e-11

Curve = Callable[[float], np.ndarray]


@dataclass
class Arc:
    gamma: Curve
    d1: Curve
    d2: Curve
    t0: float
    t1: float
    kind: str = "parametric"

    def start(self) -> np.ndarray:
        return np.asarray(self.gamma(self.t0), dtype=float)

    def end(self) -> np.ndarray:
        return np.asarray(self.gamma(self.t1), dtype=float)

    def reparametrize(self, phi: Callable, dphi: Callable, ddphi: Callable, u0: float, u1: float) -> "Arc":
        """``t = phi(u)`` with ``phi`` increasing from ``t0`` to ``t1``."""
        return Arc(
            lambda u: self.gamma(phi(u)),
            lambda u: self.d1(phi(u)) * dphi(u),
            lambda u: self.d2(phi(u)) * dphi(u) ** 2 + self.d1(phi(u)) * ddphi(u),
            u0, u1, self.kind,
        )


def outer_normal(space: SpaceForm, p, tangent) -> np.ndarray:
    """Unit normal to the right of a unit tangent (outward for counterclockwise chains)."""
    t = np.asarray(tangent, dtype=float)
    if space.curvature == 0:
        return np.array([t[1], -t[0]])
    c = np.cross(t, np.asarray(p, dtype=float))
    return c if space.curvature == 1 else c * np.array([-1.0, 1.0, 1.0])


def _unit_tangent(space: SpaceForm, v) -> np.ndarray:
    return v / math.sqrt(float(space.inner(v, v)))


def geodesic_arc(space: SpaceForm, a, b) -> Arc:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    k = space.curvature
    if k == 0:
        d = b - a
        zero = np.zeros_like(a)
        return Arc(lambda t: a + t * d, lambda t: d, lambda t: zero, 0.0, 1.0, "geodesic")
    c = float(space.inner(a, b))
    if k == 1:
        length = math.acos(max(-1.0, min(1.0, c)))
        u = _unit_tangent(space, b - c * a)
        return Arc(
            lambda t: math.cos(t) * a + math.sin(t) * u,
            lambda t: -math.sin(t) * a + math.cos(t) * u,
            lambda t: -math.cos(t) * a - math.sin(t) * u,
            0.0, length, "geodesic",
        )
    length = math.acosh(max(1.0, -c))
    u = _unit_tangent(space, b + c * a)
    return Arc(
        lambda t: math.cosh(t) * a + math.sinh(t) * u,
        lambda t: math.sinh(t) * a + math.cosh(t) * u,
        lambda t: math.cosh(t) * a + math.sinh(t) * u,
        0.0, length, "geodesic",
    )


def _tangent_frame(space: SpaceForm, center) -> tuple:
    c = np.asarray(center, dtype=float)
    if space.curvature == 0:
        return np.array([1.0, 0.0]), np.array([0.0, 1.0])
    for e in np.eye(3):
        w = e - (space.inner(e, c) / space.inner(c, c)) * c
        if space.inner(w, w) > 1e-6:
            e1 = _unit_tangent(space, w)
            break
    e2 = -outer_normal(space, c, e1)
    return e1, e2


def circle_arc(space: SpaceForm, center, radius: float, t0: float = 0.0, t1: float = 2 * math.pi) -> Arc:
    """Counterclockwise geodesic circle of the given radius about a model point."""
    c = np.asarray(center, dtype=float)
    e1, e2 = _tangent_frame(space, c)
    k = space.curvature
    if k == 0:
        base, rad = c, radius
    elif k == 1:
        base, rad = math.cos(radius) * c, math.sin(radius)
    else:
        base, rad = math.cosh(radius) * c, math.sinh(radius)
    return Arc(
        lambda t: base + rad * (math.cos(t) * e1 + math.sin(t) * e2),
        lambda t: rad * (-math.sin(t) * e1 + math.cos(t) * e2),
        lambda t: rad * (-math.cos(t) * e1 - math.sin(t) * e2),
        float(t0), float(t1), "circle",
    )


@dataclass
class Region:
    space: SpaceForm
    arcs: List[Arc]
    interior_angles: Optional[Sequence[float]] = None

    def __post_init__(self):
        if self.space.dim != 2:
            raise ValueError("surface regions live in 2-dimensional space forms")
        if not self.arcs:
            raise ValueError("empty boundary")
        for i, arc in enumerate(self.arcs):
            nxt = self.arcs[(i + 1) % len(self.arcs)]
            gap = float(np.linalg.norm(arc.end() - nxt.start()))
            if gap > CLOSURE_TOL:
                raise ValueError(f"boundary chain is not closed: arc {i} ends {gap:.3g} away from arc {(i + 1) % len(self.arcs)}")
            if not self.space.contains(arc.start(), tol=1e-8):
                raise ValueError(f"arc {i} does not start on the model")
        if self.interior_angles is not None and len(self.interior_angles) != len(self.arcs):
            raise ValueError("one declared interior angle per junction")


# ---------------------------------------------------------------- integrals


def _chart(space: SpaceForm, sample_points: np.ndarray):
    """Conformal chart ``x -> y``, its derivative, and the Green factor ``G(rho)``."""
    k = space.curvature
    if k == 0:
        return (lambda x: x), (lambda x, dx: dx), (lambda rho: 0.5)
    if k == -1:
        def y(x):
            return x[1:] / (1 + x[0])

        def dy(x, dx):
            return dx[1:] / (1 + x[0]) - x[1:] * dx[0] / (1 + x[0]) ** 2

        return y, dy, (lambda rho: 2.0 / (1.0 - rho))
    # stereographic from the antipode of the boundary's mean direction
    c = sample_points.mean(axis=0)
    c = c / np.linalg.norm(c)
    e1 = np.eye(3)[np.argmin(np.abs(c))]
    e1 = e1 - (e1 @ c) * c
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(c, e1)
    rot = np.array([e1, e2, c])

    def y(x):
        z = rot @ x
        return z[:2] / (1 + z[2])

    def dy(x, dx):
        z, dz = rot @ x, rot @ dx
        return dz[:2] / (1 + z[2]) - z[:2] * dz[2] / (1 + z[2]) ** 2

    return y, dy, (lambda rho: 2.0 / (1.0 + rho))


def _integrate(fn, arc: Arc) -> float:
    val, _ = quad(fn, arc.t0, arc.t1, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=400)
    return float(val)


def region_area(region: Region) -> float:
    sp = region.space
    samples = np.array([a.gamma(t) for a in region.arcs for t in np.linspace(a.t0, a.t1, 9)])
    y, dy, g = _chart(sp, samples)
    total = 0.0
    for arc in region.arcs:
        def f(t, arc=arc):
            x, dx = np.asarray(arc.gamma(t)), np.asarray(arc.d1(t))
            yy, yd = y(x), dy(x, dx)
            return g(float(yy @ yy)) * (yy[0] * yd[1] - yy[1] * yd[0])

        total += _integrate(f, arc)
    return total


def geodesic_curvature_integral(space: SpaceForm, arc: Arc) -> float:
    """``int a dl`` with ``a`` taken against the outer normal."""

    def f(t):
        p, v, acc = arc.gamma(t), arc.d1(t), arc.d2(t)
        speed = math.sqrt(float(space.inner(v, v)))
        nu = outer_normal(space, p, v / speed)
        return float(space.inner(acc, nu)) / speed

    if arc.kind == "geodesic":
        return 0.0 if space.curvature == 0 else _integrate(f, arc)
    return _integrate(f, arc)


def turning_angle(space: SpaceForm, p, t_in, t_out) -> float:
    t_in = _unit_tangent(space, np.asarray(t_in, dtype=float))
    t_out = _unit_tangent(space, np.asarray(t_out, dtype=float))
    left = -outer_normal(space, p, t_in)
    return math.atan2(float(space.inner(t_out, left)), float(space.inner(t_out, t_in)))


def surface_gauss_bonnet(region: Region, tol: float = 1e-6, euler_characteristic: int = 1) -> Report:
    sp = region.space
    area = region_area(region)
    boundary = sum(geodesic_curvature_integral(sp, a) for a in region.arcs)
    corners = []
    for i, arc in enumerate(region.arcs):
        nxt = region.arcs[(i + 1) % len(region.arcs)]
        corners.append(turning_angle(sp, nxt.start(), arc.d1(arc.t1), nxt.d1(nxt.t0)))
    if region.interior_angles is not None:
        for i, (tau, declared) in enumerate(zip(corners, region.interior_angles)):
            if abs((math.pi - tau) - declared) > 1e-8:
                raise ValueError(f"junction {i}: declared interior angle {declared} but boundary gives {math.pi - tau}")
    interior = sp.curvature * area
    total = interior - boundary + sum(corners)
    return Report(
        "surface_gauss_bonnet", total, 2 * math.pi * euler_characteristic, 0.0, tol,
        details={
            "curvature": sp.curvature,
            "area": area,
            "interior_term": interior,
            "boundary_term": -boundary,
            "corner_angles": corners,
            "arcs": [a.kind for a in region.arcs],
        },
    )


# ---------------------------------------------------------------- builders


def polygon_region(space: SpaceForm, vertices: Sequence, interior_angles=None) -> Region:
    verts = [np.asarray(v, dtype=float) for v in vertices]
    arcs = [geodesic_arc(space, verts[i], verts[(i + 1) % len(verts)]) for i in range(len(verts))]
    return Region(space, arcs, interior_angles)


def triangle_region(poly: GeodesicPolytope) -> Region:
    """Counterclockwise boundary of a geodesic triangle."""
    if poly.dim != 2 or any(poly.ideal):
        raise ValueError("need a compact geodesic triangle")
    v = poly.vertices
    if poly.space.curvature == 0:
        e1, e2 = v[1] - v[0], v[2] - v[0]
        orient = e1[0] * e2[1] - e1[1] * e2[0]
    else:
        orient = np.linalg.det(v)
    order = [0, 1, 2] if orient > 0 else [0, 2, 1]
    return polygon_region(poly.space, [v[i] for i in order])


def flat_square() -> Region:
    return polygon_region(SpaceForm(0, 2), [[0, 0], [1, 0], [1, 1], [0, 1]], [math.pi / 2] * 4)


def flat_disk(radius: float = 1.0) -> Region:
    return Region(SpaceForm(0, 2), [circle_arc(SpaceForm(0, 2), [0.0, 0.0], radius)])


def spherical_octant() -> Region:
    return polygon_region(SpaceForm(1, 2), np.eye(3), [math.pi / 2] * 3)


def square_with_arc() -> Region:
    """Unit square whose top edge bulges out along a circle about its center."""
    sp = SpaceForm(0, 2)
    r = math.sqrt(0.5)
    arcs = [
        geodesic_arc(sp, [0, 0], [1, 0]),
        geodesic_arc(sp, [1, 0], [1, 1]),
        circle_arc(sp, [0.5, 0.5], r, math.pi / 4, 3 * math.pi / 4),
        geodesic_arc(sp, [0, 1], [0, 0]),
    ]
    return Region(sp, arcs)


def region_from_json(data: dict) -> Region:
    sp = SpaceForm(int(data["curvature"]), 2)
    arcs = []
    for spec in data["arcs"]:
        kind = spec["kind"]
        if kind == "geodesic":
            arcs.append(geodesic_arc(sp, spec["from"], spec["to"]))
        elif kind == "parametric":
            shape = spec.get("shape", "circle")
            if shape != "circle":
                raise ValueError(f"unknown parametric shape {shape!r}")
            arcs.append(circle_arc(sp, spec["center"], float(spec["radius"]), float(spec.get("t0", 0.0)), float(spec.get("t1", 2 * math.pi))))
        else:
            raise ValueError(f"unknown arc kind {kind!r}")
    return Region(sp, arcs, data.get("corners"))
