"""Connections on a trivialized rank-2n bundle over a box chart.

A :class:`ConnectionChart` holds polynomial connection matrices
``omega_i`` (one per base direction), so curvature

    F_ij = d_i omega_j - d_j omega_i + omega_i omega_j - omega_j omega_i

is exact (the products here are matrix compositions, never the exterior
product of double forms). The curvature double form has coefficient
``h(e_a, F_ij e_b) = s_a F_ij[a, b]`` on ``dx^i ^ dx^j (x) e^a ^ e^b``.

Transgressions are assembled with whichever coefficient ring the caller
needs: arrays for values, :class:`~gbverify.calculus.Jet` for exact first
derivatives along the chart. Families whose second derivatives are not
available fall back to central differences.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from .calculus import Jet, Polynomial
from .double_forms import Box, DoubleForm, DoubleFormField, df_power, df_product, fiber_berezin
from .multilinear import BilinearForm, ExteriorElement, universal_constant
from .report import Report

EXACT_TOL = 1e-6
FD_TOL = 1e-4
FD_STEP = 1e-5


# ---------------------------------------------------------------- charts


@dataclass
class ConnectionChart:
    """Polynomial connection ``nabla = d + omega`` on ``chart x R^{2n}``."""

    h: BilinearForm
    omega: List[List[List[Polynomial]]]
    chart: Box
    skew_tol: float = 1e-10

    def __post_init__(self):
        m, r = self.chart.dim, self.h.dimension
        if r % 2:
            raise ValueError("fiber rank must be even")
        if len(self.omega) != m:
            raise ValueError(f"need {m} connection matrices, got {len(self.omega)}")
        for mat in self.omega:
            if len(mat) != r or any(len(row) != r for row in mat):
                raise ValueError(f"connection matrices must be {r}x{r}")
            for row in mat:
                for p in row:
                    if not isinstance(p, Polynomial) or p.nvars != m:
                        raise ValueError("connection entries must be polynomials in the chart coordinates")
        self.check_skew()

    @property
    def base_dim(self) -> int:
        return self.chart.dim

    @property
    def fiber_rank(self) -> int:
        return self.h.dimension

    def check_skew(self, points_per_axis: int = 5):
        """Metric compatibility: ``H omega_i`` antisymmetric on a probe grid."""
        pts = self.chart.probe_grid(points_per_axis)
        s = self.h.signs
        r = self.fiber_rank
        for i, mat in enumerate(self.omega):
            for a in range(r):
                for b in range(a, r):
                    resid = s[a] * mat[a][b](pts) + s[b] * mat[b][a](pts)
                    if np.max(np.abs(resid)) > self.skew_tol:
                        raise ValueError(f"omega_{i} is not h-skew at entry ({a},{b})")

    def omega_values(self, points) -> np.ndarray:
        """Array ``(m, r, r, N)``."""
        pts = np.atleast_2d(points)
        return np.array([[[p(pts) for p in row] for row in mat] for mat in self.omega])

    def omega_jets(self, points) -> List[List[List[Jet]]]:
        return [[[p.jet(points) for p in row] for row in mat] for mat in self.omega]

    def gauge(self, g) -> "ConnectionChart":
        """Conjugate by a constant h-orthogonal ``g``: ``omega -> g omega g^-1``."""
        g = np.asarray(g, dtype=float)
        hm = self.h.matrix
        if not np.allclose(g.T @ hm @ g, hm, atol=1e-12):
            raise ValueError("gauge matrix is not h-orthogonal")
        ginv = hm @ g.T @ hm
        r = self.fiber_rank
        out = []
        for mat in self.omega:
            new = [[Polynomial(self.base_dim) for _ in range(r)] for _ in range(r)]
            for a, b, c, d in itertools.product(range(r), repeat=4):
                coef = g[a, b] * ginv[c, d]
                if coef != 0.0 and mat[b][c].terms:
                    new[a][d] = new[a][d] + mat[b][c] * coef
            out.append(new)
        return ConnectionChart(self.h, out, self.chart, self.skew_tol)

    @classmethod
    def flat(cls, chart: Box, h: BilinearForm) -> "ConnectionChart":
        r, m = h.dimension, chart.dim
        zero = [[[Polynomial(m) for _ in range(r)] for _ in range(r)] for _ in range(m)]
        return cls(h, zero, chart)

    @classmethod
    def random(
        cls,
        rng: np.random.Generator,
        base_dim: int,
        fiber_rank: int,
        degree: int = 2,
        scale: float = 0.5,
        h: Optional[BilinearForm] = None,
        chart: Optional[Box] = None,
    ) -> "ConnectionChart":
        """``omega_i = H S_i`` with ``S_i`` antisymmetric random polynomials."""
        h = h or BilinearForm.euclidean(fiber_rank)
        chart = chart or Box.cube(base_dim, -1.0, 1.0)
        s = h.signs
        omega = []
        for _ in range(base_dim):
            mat = [[Polynomial(base_dim) for _ in range(fiber_rank)] for _ in range(fiber_rank)]
            for a in range(fiber_rank):
                for b in range(a + 1, fiber_rank):
                    p = Polynomial.random(rng, base_dim, degree, scale)
                    mat[a][b] = p * float(s[a])
                    mat[b][a] = p * float(-s[b])
            omega.append(mat)
        return cls(h, omega, chart)

    @classmethod
    def sphere(cls) -> "ConnectionChart":
        """Levi-Civita connection of the unit 2-sphere in ``(z, phi)``.

        The chart ``[-1,1] x [0, 2 pi]`` has full measure and the frame
        ``(d_z / |d_z|, d_phi / |d_phi|)`` gives connection ``omega_phi = z J``.
        """
        z = Polynomial.variable(2, 0)
        zero = Polynomial(2)
        omega = [[[zero, zero], [zero, zero]], [[zero, z], [-z, zero]]]
        return cls(BilinearForm.euclidean(2), omega, Box((-1.0, 0.0), (1.0, 2 * math.pi)))

    @classmethod
    def block_diagonal(cls, first: "ConnectionChart", second: "ConnectionChart") -> "ConnectionChart":
        if first.chart != second.chart:
            raise ValueError("blocks must share the chart")
        m = first.base_dim
        r1, r2 = first.fiber_rank, second.fiber_rank
        omega = []
        for i in range(m):
            mat = [[Polynomial(m) for _ in range(r1 + r2)] for _ in range(r1 + r2)]
            for a, b in itertools.product(range(r1), repeat=2):
                mat[a][b] = first.omega[i][a][b]
            for a, b in itertools.product(range(r2), repeat=2):
                mat[r1 + a][r1 + b] = second.omega[i][a][b]
            omega.append(mat)
        return cls(BilinearForm(first.h.signs + second.h.signs), omega, first.chart)

    def to_json(self) -> Dict[str, Any]:
        return {
            "base_dim": self.base_dim,
            "fiber_rank": self.fiber_rank,
            "signature": list(self.h.signs),
            "omega": [[[p.to_terms() for p in row] for row in mat] for mat in self.omega],
            "chart": {"lo": list(self.chart.lo), "hi": list(self.chart.hi)},
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "ConnectionChart":
        m, r = int(data["base_dim"]), int(data["fiber_rank"])
        signs = tuple(data.get("signature", [1] * r))
        if len(signs) != r:
            raise ValueError("signature length does not match fiber_rank")
        omega = [[[Polynomial.from_terms(m, entry) for entry in row] for row in mat] for mat in data["omega"]]
        chart = data.get("chart")
        box = Box(tuple(chart["lo"]), tuple(chart["hi"])) if chart else Box.cube(m, -1.0, 1.0)
        if box.dim != m:
            raise ValueError("chart dimension does not match base_dim")
        return cls(BilinearForm(signs), omega, box)


def curvature_polynomials(chart: ConnectionChart) -> DoubleForm:
    """``omega_R`` with polynomial coefficients, bidegree (2,2)."""
    m, r, s = chart.base_dim, chart.fiber_rank, chart.h.signs
    om = chart.omega
    coeffs = {}
    for i, j in itertools.combinations(range(m), 2):
        for a, b in itertools.combinations(range(r), 2):
            f = om[j][a][b].diff(i) - om[i][a][b].diff(j)
            for c in range(r):
                f = f + om[i][a][c] * om[j][c][b] - om[j][a][c] * om[i][c][b]
            if f.terms:
                coeffs[((i, j), (a, b))] = f * float(s[a])
    return DoubleForm(m, r, (2, 2), coeffs)


def curvature_form(chart: ConnectionChart) -> DoubleFormField:
    poly = curvature_polynomials(chart)
    return DoubleFormField(chart.chart, (2, 2), lambda pts: poly.map_coefficients(lambda p: p(pts)))


# ---------------------------------------------------------------- form fields


@dataclass
class FormField(DoubleFormField):
    """Scalar ``k``-form on a chart with an exterior derivative.

    ``derivative(points)`` returns ``d`` of the form at the points, exactly
    when the coefficients carry jets and by central differences otherwise.
    """

    derivative: Optional[Callable[[np.ndarray], ExteriorElement]] = None

    @property
    def degree(self) -> int:
        return self.bidegree[0]

    def d(self, points) -> ExteriorElement:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.derivative is not None and self.derivative_mode == "exact":
            return self.derivative(pts)
        return central_difference_d(self.value, pts, self.chart.dim, self.degree, self.step)


def central_difference_d(value, points, m: int, degree: int, step: float) -> ExteriorElement:
    total = ExteriorElement.zero(m, degree + 1)
    for i in range(m):
        shift = np.zeros(m)
        shift[i] = step
        plus, minus = value(points + shift), value(points - shift)
        partial = (plus - minus).scale(0.5 / step)
        total = total + ExteriorElement.basis(m, (i,)).wedge(partial)
    return total


def d_from_jets(form: ExteriorElement) -> ExteriorElement:
    m = form.rank
    total = ExteriorElement.zero(m, form.degree + 1)
    for i in range(m):
        total = total + ExteriorElement.basis(m, (i,)).wedge(form.map_coefficients(lambda j, i=i: j.partial(i)))
    return total


def jet_values(form: ExteriorElement) -> ExteriorElement:
    return form.map_coefficients(lambda j: j.v if isinstance(j, Jet) else j)


# ---------------------------------------------------------------- Pfaffian form


def pfaffian_polynomial(chart: ConnectionChart, orientation: int = 1) -> ExteriorElement:
    r = curvature_polynomials(chart)
    n = chart.fiber_rank // 2
    m = chart.base_dim
    if 2 * n > m:
        return ExteriorElement.zero(m, 2 * n)
    top = fiber_berezin(df_power(r, n), chart.h, orientation)
    return top.scale(1.0 / math.factorial(n))


def pfaffian_form(chart: ConnectionChart, orientation: int = 1) -> FormField:
    """``Pf_h(R) = B_h(omega_R^n) / n!`` with exact polynomial derivative."""
    pf = pfaffian_polynomial(chart, orientation)
    m = chart.base_dim

    def value(pts):
        if pf.degree > m:
            return ExteriorElement.zero(m, pf.degree)
        return pf.map_coefficients(lambda p: p(pts))

    def derivative(pts):
        if pf.degree + 1 > m:
            return ExteriorElement.zero(m, pf.degree + 1)
        d = ExteriorElement.zero(m, pf.degree + 1)
        for i in range(m):
            d = d + ExteriorElement.basis(m, (i,)).wedge(pf.map_coefficients(lambda p, i=i: p.diff(i)))
        return d.map_coefficients(lambda p: p(pts))

    return FormField(chart.chart, (pf.degree, 0), value, derivative=derivative)


def _max_coeff(form: ExteriorElement) -> float:
    return form.max_abs() if form.coefficients else 0.0


def pf_closed_check(chart: ConnectionChart, points_per_axis: int = 9, tol: float = 1e-9) -> Report:
    pts = chart.chart.probe_grid(points_per_axis)
    pf = pfaffian_form(chart)
    resid = _max_coeff(pf.d(pts))
    return Report(
        "pf_closed", resid, 0.0, 0.0, tol,
        details={"max_pf": _max_coeff(pf(pts)), "grid_points": len(pts), "mode": "exact"},
    )


def covariant_derivative(chart: ConnectionChart, section: Sequence[Polynomial]) -> List[List[Polynomial]]:
    """``(nabla_i s)_a = d_i s_a + sum_b omega_i[a, b] s_b`` as polynomials."""
    r = chart.fiber_rank
    if len(section) != r:
        raise ValueError("section length does not match fiber rank")
    out = []
    for i, mat in enumerate(chart.omega):
        row = []
        for a in range(r):
            p = section[a].diff(i)
            for b in range(r):
                p = p + mat[a][b] * section[b]
            row.append(p)
        out.append(row)
    return out


def parallel_section_check(
    chart: ConnectionChart,
    section: Sequence[Polynomial],
    points_per_axis: int = 9,
    parallel_tol: float = 1e-10,
    tol: float = 1e-9,
) -> Report:
    pts = chart.chart.probe_grid(points_per_axis)
    nabla = covariant_derivative(chart, section)
    worst = max(float(np.max(np.abs(p(pts)))) for row in nabla for p in row)
    if worst > parallel_tol:
        raise ValueError(f"section is not parallel: max |nabla s| = {worst:.3g}")
    pf = pfaffian_form(chart)(pts)
    return Report(
        "parallel_section_pf", _max_coeff(pf), 0.0, 0.0, tol,
        details={"max_nabla_s": worst, "grid_points": len(pts)},
    )


# ---------------------------------------------------------------- unit families


@dataclass
class Frame:
    """Section data on points ``z = (x, p)``.

    ``V`` has shape ``(r, N)``; ``dV[c]`` is the derivative along coordinate
    ``c`` of ``z``; ``d2V[c, e]`` second derivatives when available.
    """

    V: np.ndarray
    dV: np.ndarray
    d2V: Optional[np.ndarray] = None


class UnitFamily:
    """Family of unit sections indexed by a box ``X`` of dimension ``param_dim``.

    Points are concatenations ``(x_1..x_l, p_1..p_m)``.
    """

    param_dim: int
    base_dim: int
    h: BilinearForm

    def frame(self, z: np.ndarray) -> Frame:
        raise NotImplementedError

    @property
    def exact(self) -> bool:
        return False

    @property
    def parameter_box(self) -> Box:
        return Box.cube(self.param_dim, 0.0, 1.0)

    def check_unit(self, points: np.ndarray, tol: float = 1e-10) -> float:
        v = self.frame(points).V
        norm = np.einsum("a,an->n", np.asarray(self.h.signs, dtype=float), v * v)
        worst = float(np.max(np.abs(norm - 1.0)))
        if worst > tol:
            raise ValueError(f"family is not h-unit: max |h(V,V) - 1| = {worst:.3g}")
        return worst

    def restrict(self, axis: int, value: float) -> "UnitFamily":
        return AffineParameter(self, axis, 0.0, float(value))

    def reverse(self, axis: int = 0) -> "UnitFamily":
        return AffineParameter(self, axis, -1.0, 1.0)


@dataclass
class AngleFamily(UnitFamily):
    """``V = (cos theta, sin theta)`` in a rank-2 Euclidean fiber."""

    theta: Polynomial
    param_dim: int = 0

    def __post_init__(self):
        self.base_dim = self.theta.nvars - self.param_dim
        if self.base_dim < 0:
            raise ValueError("angle polynomial has fewer variables than the parameter space")
        self.h = BilinearForm.euclidean(2)
        q = self.theta.nvars
        self._d1 = [self.theta.diff(c) for c in range(q)]
        self._d2 = [[self._d1[c].diff(e) for e in range(q)] for c in range(q)]

    @property
    def exact(self) -> bool:
        return True

    def frame(self, z):
        z = np.atleast_2d(z)
        t = self.theta(z)
        c, s = np.cos(t), np.sin(t)
        u = np.stack([c, s])
        w = np.stack([-s, c])
        g = np.array([d(z) for d in self._d1])
        hess = np.array([[d(z) for d in row] for row in self._d2])
        dv = g[:, None, :] * w[None]
        d2v = -(g[:, None, :] * g[None, :, :])[:, :, None, :] * u[None, None] + hess[:, :, None, :] * w[None, None]
        return Frame(u, dv, d2v)


@dataclass
class NormalizedFamily(UnitFamily):
    """``V = P / |P|_h`` for a polynomial vector ``P`` with no zeros on the domain.

    First derivatives are exact; second derivatives are not provided, so
    derivatives of transgressions use central differences.
    """

    components: List[Polynomial]
    h: BilinearForm
    param_dim: int = 0

    def __post_init__(self):
        if len(self.components) != self.h.dimension:
            raise ValueError("component count does not match the fiber rank")
        q = self.components[0].nvars
        if any(p.nvars != q for p in self.components):
            raise ValueError("components must share variables")
        self.base_dim = q - self.param_dim
        self._d1 = [[p.diff(c) for p in self.components] for c in range(q)]
        self._signs = np.asarray(self.h.signs, dtype=float)

    @classmethod
    def random(cls, rng, fiber_rank: int, base_dim: int, param_dim: int = 0, degree: int = 2, scale: float = 0.3):
        """Constant offset along ``e_1`` keeps ``|P|`` away from zero on ``[-1,1]``."""
        q = base_dim + param_dim
        comps = [Polynomial.random(rng, q, degree, scale) for _ in range(fiber_rank)]
        comps[0] = comps[0] + 2.0
        return cls(comps, BilinearForm.euclidean(fiber_rank), param_dim)

    def frame(self, z):
        z = np.atleast_2d(z)
        p = np.array([c(z) for c in self.components])
        norm2 = np.einsum("a,an->n", self._signs, p * p)
        if np.any(norm2 <= 0):
            raise ValueError("polynomial vector is not h-positive on the domain")
        norm = np.sqrt(norm2)
        v = p / norm
        dp = np.array([[c(z) for c in row] for row in self._d1])
        proj = np.einsum("a,an,can->cn", self._signs, v, dp)
        dv = (dp - v[None] * proj[:, None, :]) / norm
        return Frame(v, dv, None)


@dataclass
class AffineParameter(UnitFamily):
    """Reparametrize ``x_axis -> scale x_axis + shift``; ``scale = 0`` drops the axis."""

    parent: UnitFamily
    axis: int
    scale: float
    shift: float

    def __post_init__(self):
        if not 0 <= self.axis < self.parent.param_dim:
            raise ValueError("no such parameter axis")
        self.h = self.parent.h
        self.base_dim = self.parent.base_dim
        self.param_dim = self.parent.param_dim - (1 if self.scale == 0.0 else 0)

    @property
    def exact(self) -> bool:
        return self.parent.exact

    def frame(self, z):
        z = np.atleast_2d(z)
        a = self.axis
        if self.scale == 0.0:
            full = np.insert(z, a, self.shift, axis=1)
        else:
            full = z.copy()
            full[:, a] = self.scale * z[:, a] + self.shift
        fr = self.parent.frame(full)
        dv, d2v = fr.dV, fr.d2V
        if self.scale == 0.0:
            dv = np.delete(dv, a, axis=0)
            if d2v is not None:
                d2v = np.delete(np.delete(d2v, a, axis=0), a, axis=1)
        else:
            dv = dv.copy()
            dv[a] *= self.scale
            if d2v is not None:
                d2v = d2v.copy()
                d2v[a] *= self.scale
                d2v[:, a] *= self.scale
        return Frame(fr.V, dv, d2v)


# ---------------------------------------------------------------- transgression


def _section(coeffs, base_dim: int, rank: int) -> DoubleForm:
    return DoubleForm(base_dim, rank, (0, 1), {((), (a,)): c for a, c in enumerate(coeffs)})


def _bracket_terms(n: int, l: int):
    return [k for k in range(n) if l <= 2 * k + 1 <= 2 * n - 1]


def transgression_integrand(
    chart: ConnectionChart,
    family: UnitFamily,
    z: np.ndarray,
    p: np.ndarray,
    curvature: DoubleForm,
    use_jets: bool,
) -> ExteriorElement:
    """Sum over k of ``c(n,k,l) B[V d_1V..d_lV (nabla V)^(2k+1-l) R^(n-1-k)]`` at ``z``.

    ``(d^X V)^l / l!`` supplies ``dx^1..dx^l (x) d_1V ^ .. ^ d_lV``; the
    ``dx`` volume is stripped here and restored by quadrature over ``X``.
    """
    l, m, r = family.param_dim, chart.base_dim, chart.fiber_rank
    n = r // 2
    if l > 2 * n - 1:
        raise ValueError(f"parameter dimension {l} exceeds 2n-1 = {2 * n - 1}")
    s = np.asarray(chart.h.signs, dtype=float)
    fr = family.frame(z)
    if use_jets:
        if fr.d2V is None:
            raise ValueError("family has no second derivatives; use finite differences")
        vj = [Jet(s[a] * fr.V[a], s[a] * fr.dV[l:, a]) for a in range(r)]
        dxj = [[Jet(s[a] * fr.dV[j, a], s[a] * fr.d2V[j, l:, a]) for a in range(r)] for j in range(l)]
        raw = [Jet(fr.V[b], fr.dV[l:, b]) for b in range(r)]
        dpj = [[Jet(fr.dV[l + i, a], fr.d2V[l + i, l:, a]) for a in range(r)] for i in range(m)]
        om = chart.omega_jets(p)
    else:
        vj = [s[a] * fr.V[a] for a in range(r)]
        dxj = [[s[a] * fr.dV[j, a] for a in range(r)] for j in range(l)]
        raw = [fr.V[b] for b in range(r)]
        dpj = [[fr.dV[l + i, a] for a in range(r)] for i in range(m)]
        om = chart.omega_values(p)

    prefix = _section(vj, m, r)
    for j in range(l):
        prefix = df_product(prefix, _section(dxj[j], m, r))

    nabla = {}
    for i in range(m):
        for a in range(r):
            c = dpj[i][a]
            for b in range(r):
                if chart.omega[i][a][b].terms:
                    c = c + om[i][a][b] * raw[b]
            nabla[((i,), (a,))] = c * float(s[a])
    nabla_v = DoubleForm(m, r, (1, 1), nabla)

    if use_jets:
        curv = curvature.map_coefficients(lambda q: q.jet(p))
    else:
        curv = curvature.map_coefficients(lambda q: q(p))

    total = ExteriorElement.zero(m, 2 * n - 1 - l)
    for k in _bracket_terms(n, l):
        const = float(universal_constant(n, k, l))
        term = df_product(prefix, df_power(nabla_v, 2 * k + 1 - l))
        term = df_product(term, df_power(curv, n - 1 - k))
        total = total + fiber_berezin(term, chart.h).scale(const)
    return total


def transgression_form(
    chart: ConnectionChart,
    family: UnitFamily,
    quad_points: int = 32,
    mode: Optional[str] = None,
    step: float = FD_STEP,
) -> FormField:
    """``T^(l+1)_V``, a ``(2n - l - 1)``-form on the chart.

    ``mode`` is ``"exact"`` (jets; needs second derivatives of the family)
    or ``"fd"``; the default picks exact when the family supports it.
    """
    if family.base_dim != chart.base_dim or family.h != chart.h:
        raise ValueError("family does not match the chart")
    l = family.param_dim
    n = chart.fiber_rank // 2
    if l > 2 * n - 1:
        raise ValueError(f"parameter dimension {l} exceeds 2n-1 = {2 * n - 1}")
    mode = mode or ("exact" if family.exact else "fd")
    if mode not in ("exact", "fd"):
        raise ValueError(f"unknown mode {mode!r}")
    curvature = curvature_polynomials(chart)
    xnodes, xweights = family.parameter_box.gauss_legendre(quad_points) if l else (np.zeros((1, 0)), np.ones(1))
    q = len(xweights)

    def assemble(pts, use_jets):
        pts = np.atleast_2d(pts)
        npts = len(pts)
        p = np.repeat(pts, q, axis=0)
        z = np.hstack([np.tile(xnodes, (npts, 1)), p])
        form = transgression_integrand(chart, family, z, p, curvature, use_jets)

        def integrate(c):
            if isinstance(c, Jet):
                v = c.v.reshape(npts, q) @ xweights
                g = c.g.reshape(c.g.shape[0], npts, q) @ xweights
                return Jet(v, g)
            return np.asarray(c).reshape(npts, q) @ xweights

        return form.map_coefficients(integrate)

    def value(pts):
        return assemble(pts, False)

    def derivative(pts):
        return jet_values(d_from_jets(assemble(pts, True)))

    return FormField(
        chart.chart, (2 * n - 1 - l, 0), value,
        derivative_mode=mode, step=step,
        derivative=derivative if mode == "exact" else None,
    )


def _residual(a: ExteriorElement, b: ExteriorElement) -> float:
    return _max_coeff(a - b)


def _inner(a: ExteriorElement, b: ExteriorElement) -> float:
    keys = set(a.coefficients) | set(b.coefficients)
    return float(sum(np.sum(np.asarray(a[k]) * np.asarray(b[k])) for k in keys))


def boundary_transgression(chart, family, quad_points=32, mode=None) -> Callable[[np.ndarray], ExteriorElement]:
    """Evaluator of ``T^(l)`` summed over the oriented hyperfaces of ``X``."""
    l = family.param_dim
    faces = []
    for axis in range(l):
        for value, base_sign in ((1.0, 1), (0.0, -1)):
            # outward normal first: (-1)^axis fixes the induced orientation
            faces.append((base_sign * (-1) ** axis, family.restrict(axis, value)))
    fields = [(sign, transgression_form(chart, f, quad_points, mode)) for sign, f in faces]

    def value(pts):
        total = None
        for sign, fld in fields:
            term = fld(pts).scale(float(sign))
            total = term if total is None else total + term
        return total

    return value


def verify_transgression_derivative(
    chart: ConnectionChart,
    family: UnitFamily,
    points_per_axis: int = 9,
    quad_points: int = 32,
    mode: Optional[str] = None,
    tol: Optional[float] = None,
    step: float = FD_STEP,
    allow_experimental: bool = False,
) -> Report:
    """Compare ``dT^(l+1)`` with ``-Pf`` (l = 0) or ``-T^(l)`` on the boundary (l >= 1).

    The report also carries ``sign_constant``, the least-squares ``c`` in
    ``dT = c * (boundary term without its minus sign)``, and the residual the
    check would have with the opposite sign convention.
    """
    l = family.param_dim
    if l > 1 and not allow_experimental:
        raise ValueError("only l in {0, 1} is wired in; pass allow_experimental for l = 2")
    pts = chart.chart.probe_grid(points_per_axis)
    family.check_unit(np.hstack([np.full((len(pts), l), 0.5), pts]))
    field_ = transgression_form(chart, family, quad_points, mode, step)
    mode = field_.derivative_mode
    tol = tol if tol is not None else (EXACT_TOL if mode == "exact" else FD_TOL)
    lhs = field_.d(pts)
    if l == 0:
        base = pfaffian_form(chart)(pts)
        identity = "dT1 = -Pf"
    else:
        base = boundary_transgression(chart, family, quad_points, mode)(pts)
        identity = f"dT{l + 1} = -T{l}(boundary)"
    rhs = base.scale(-1.0)
    resid = _residual(lhs, rhs)
    flipped = _residual(lhs, base)
    denom = _inner(base, base)
    sign_constant = _inner(lhs, base) / denom if denom > 0 else float("nan")
    return Report(
        f"transgression_l{l}", resid, 0.0, 0.0, tol,
        details={
            "identity": identity,
            "mode": mode,
            "grid_points": len(pts),
            "max_dT": _max_coeff(lhs),
            "max_rhs": _max_coeff(rhs),
            "sign_constant": sign_constant,
            "residual_if_sign_flipped": flipped,
        },
    )


def fiber_circle_index(turns: int = 1, quad_points: int = 64) -> float:
    """``int T^(1)`` over a circle for the angle model ``V = (cos k phi, sin k phi)``, flat fiber."""
    chart = ConnectionChart.flat(Box((0.0,), (2 * math.pi,)), BilinearForm.euclidean(2))
    family = AngleFamily(Polynomial.variable(1, 0, float(turns)))
    t1 = transgression_form(chart, family)
    return t1.integrate(quad_points)
