"""Seeded check suites shared by the CLI, the experiment scripts and the tests.

Every suite takes a :class:`SuiteConfig` and returns a list of reports in
a fixed order. Per-case generators are spawned from the suite seed, so
one seed reproduces the whole run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List

import numpy as np
from scipy.integrate import quad

from . import montecarlo
from .calculus import Polynomial
from .multilinear import SkewForm, pfaffian, pfaffian_matching, random_skew, wallis_constants
from .polytope import Polytope, euclidean_angle_sum, random_simplex as random_euclidean_simplex, regular_polygon
from .report import Report
from .spaceforms import (
    gauss_bonnet_constant_curvature,
    ideal_4simplex_volume_check,
    octant_triangle,
    perturbed_ideal_4simplex,
    random_simplex,
    regular_hyperbolic_triangle,
    regular_ideal_4simplex,
)
from .surface import flat_disk, flat_square, spherical_octant, square_with_arc, surface_gauss_bonnet
from .transgression import (
    AngleFamily,
    ConnectionChart,
    NormalizedFamily,
    pf_closed_check,
    verify_transgression_derivative,
)


@dataclass
class SuiteConfig:
    seed: int = 7
    samples: int = 1_000_000
    quad_points: int = 32
    points_per_axis: int = 9
    tolerances: Dict[str, float] = field(default_factory=dict)

    def rng(self, *path: int) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(montecarlo.seed_sequence(self.seed, *path)))


def _named(report: Report, name: str) -> Report:
    report.details = {"case": name, **report.details}
    return report


# ---------------------------------------------------------------- algebra


def example_matrix_4(a, b, c, d, f, g) -> np.ndarray:
    return np.array([[0, a, b, c], [-a, 0, d, f], [-b, -d, 0, g], [-c, -f, -g, 0]], dtype=float)


def pf_examples(cfg: SuiteConfig, draws: int = 100) -> List[Report]:
    rng = cfg.rng(1)
    err2 = err4 = 0.0
    for _ in range(draws):
        a, b, c, d, f, g = rng.standard_normal(6)
        err2 = max(err2, abs(pfaffian(SkewForm.euclidean([[0, a], [-a, 0]])) - a))
        err4 = max(err4, abs(pfaffian(SkewForm.euclidean(example_matrix_4(a, b, c, d, f, g))) - (a * g - b * f + c * d)))
    return [
        Report("pf_example_2x2", err2, 0.0, 0.0, 1e-12, cfg.seed, {"draws": draws, "identity": "Pf = a"}),
        Report("pf_example_4x4", err4, 0.0, 0.0, 1e-12, cfg.seed, {"draws": draws, "identity": "Pf = ag - bf + cd"}),
    ]


def pf_det_sweep(cfg: SuiteConfig, draws: int = 1000) -> List[Report]:
    rng = cfg.rng(2)
    worst_det = worst_match = 0.0
    for i in range(draws):
        n = 1 + i % 4
        a = random_skew(rng, 2 * n)
        pf = pfaffian(a)
        det = float(np.linalg.det(a.entries))
        worst_det = max(worst_det, abs(pf * pf - det) / max(abs(det), 1e-300))
        worst_match = max(worst_match, abs(pf - pfaffian_matching(a.entries)))
    return [
        Report("pf_squared_det", worst_det, 0.0, 0.0, 1e-9, cfg.seed, {"draws": draws, "measure": "max relative error"}),
        Report("pf_matching_oracle", worst_match, 0.0, 0.0, 1e-12, cfg.seed, {"draws": draws}),
    ]


def wallis_suite(cfg: SuiteConfig, kmax: int = 10) -> List[Report]:
    worst = 0.0
    for k in range(kmax + 1):
        interval, cosine = wallis_constants(k)
        qi, _ = quad(lambda t: (1 - t * t) ** k, 0, 1, epsabs=1e-13, epsrel=1e-13)
        qc, _ = quad(lambda t: math.cos(t) ** (2 * k), -math.pi / 2, math.pi / 2, epsabs=1e-13, epsrel=1e-13)
        worst = max(worst, abs(float(interval) - qi), abs(cosine - qc))
    return [Report("wallis_constants", worst, 0.0, 0.0, 1e-10, None, {"kmax": kmax})]


# ---------------------------------------------------------------- transgression


def pf_closed_suite(cfg: SuiteConfig, charts: int = 25) -> List[Report]:
    out = []
    for i in range(charts):
        chart = ConnectionChart.random(cfg.rng(3, i), 3, 2, degree=3)
        out.append(_named(pf_closed_check(chart, cfg.points_per_axis), f"chart{i}"))
        out[-1].seed = cfg.seed
    return out


def angle_family(rng, base_dim: int, param_dim: int = 0, degree: int = 2, winding: float = 0.0) -> AngleFamily:
    theta = Polynomial.random(rng, base_dim + param_dim, degree, 1.0)
    if param_dim and winding:
        theta = theta + Polynomial.variable(base_dim + param_dim, 0, winding)
    return AngleFamily(theta, param_dim)


def transgression_l0_suite(cfg: SuiteConfig, pairs: int = 10, include_fd: bool = True) -> List[Report]:
    out = []
    sphere = ConnectionChart.sphere()
    rep = verify_transgression_derivative(sphere, angle_family(cfg.rng(4, 99), 2), cfg.points_per_axis, cfg.quad_points)
    out.append(_named(rep, "sphere"))
    for i in range(pairs):
        rng = cfg.rng(4, i)
        chart = ConnectionChart.random(rng, 2, 2)
        rep = verify_transgression_derivative(chart, angle_family(rng, 2), cfg.points_per_axis, cfg.quad_points)
        out.append(_named(rep, f"pair{i}"))
    if include_fd:
        rng = cfg.rng(4, 1000)
        chart = ConnectionChart.random(rng, 4, 4, degree=1)
        family = NormalizedFamily.random(rng, 4, 4)
        rep = verify_transgression_derivative(chart, family, cfg.points_per_axis, cfg.quad_points, mode="fd")
        out.append(_named(rep, "rank4_fd"))
    for r in out:
        r.seed = cfg.seed
    return out


def transgression_l1_suite(cfg: SuiteConfig, families: int = 10) -> List[Report]:
    out = []
    for i in range(families):
        rng = cfg.rng(5, i)
        chart = ConnectionChart.random(rng, 2, 2)
        family = angle_family(rng, 2, param_dim=1, winding=2 * math.pi)
        rep = verify_transgression_derivative(chart, family, cfg.points_per_axis, cfg.quad_points)
        rep.seed = cfg.seed
        out.append(_named(rep, f"interval{i}"))
    return out


def transgression_l2_experimental(cfg: SuiteConfig) -> List[Report]:
    rng = cfg.rng(6)
    chart = ConnectionChart.random(rng, 2, 4, degree=1)
    family = NormalizedFamily.random(rng, 4, 2, param_dim=2)
    rep = verify_transgression_derivative(chart, family, 5, 16, mode="fd", allow_experimental=True)
    rep.seed = cfg.seed
    return [_named(rep, "square_fd")]


# ---------------------------------------------------------------- polytopes


def angle_sum_suite(cfg: SuiteConfig, per_dim: int = 20, triangles: int = 10) -> List[Report]:
    out = [
        _named(euclidean_angle_sum(Polytope.box([0, 0], [1, 1])), "square"),
        _named(euclidean_angle_sum(regular_polygon(3)), "equilateral"),
    ]
    rng = cfg.rng(7)
    for i in range(triangles):
        out.append(_named(euclidean_angle_sum(random_euclidean_simplex(rng, 2)), f"triangle{i}"))
    for d in (3, 4):
        for i in range(per_dim):
            poly = random_euclidean_simplex(cfg.rng(7, d, i), d)
            out.append(_named(euclidean_angle_sum(poly, cfg.seed + 1000 * d + i, cfg.samples), f"simplex_d{d}_{i}"))
    return out


def gb_const_suite(cfg: SuiteConfig, mc_cases: int = 5) -> List[Report]:
    out = [
        _named(gauss_bonnet_constant_curvature(octant_triangle()), "spherical_octant"),
        _named(gauss_bonnet_constant_curvature(regular_hyperbolic_triangle(math.pi / 4)), "hyperbolic_pi_over_4"),
    ]
    for k in (0, 1, -1):
        for i in range(3):
            poly = random_simplex(cfg.rng(8, k + 1, i), k, 2)
            out.append(_named(gauss_bonnet_constant_curvature(poly), f"triangle_k{k}_{i}"))
    for i in range(mc_cases):
        poly = random_simplex(cfg.rng(9, i), 1, 3)
        out.append(_named(gauss_bonnet_constant_curvature(poly, cfg.seed + i, cfg.samples), f"spherical_tetrahedron{i}"))
    for i in range(mc_cases):
        poly = random_simplex(cfg.rng(10, i), -1, 4)
        out.append(_named(gauss_bonnet_constant_curvature(poly, cfg.seed + i, cfg.samples), f"hyperbolic_4simplex{i}"))
    return out


def surface_suite(cfg: SuiteConfig) -> List[Report]:
    cases = [("flat_square", flat_square()), ("flat_disk", flat_disk()), ("spherical_octant", spherical_octant()), ("square_with_arc", square_with_arc())]
    return [_named(surface_gauss_bonnet(region), name) for name, region in cases]


def ideal_suite(cfg: SuiteConfig, perturbed: int = 5, samples: int | None = None) -> List[Report]:
    n = samples or cfg.samples
    out = [_named(ideal_4simplex_volume_check(regular_ideal_4simplex(), cfg.seed, n), "regular")]
    for i in range(perturbed):
        poly = perturbed_ideal_4simplex(cfg.rng(11, i))
        out.append(_named(ideal_4simplex_volume_check(poly, cfg.seed + i + 1, n), f"perturbed{i}"))
    return out


SUITES: Dict[str, Callable[[SuiteConfig], List[Report]]] = {
    "pf": lambda c: pf_examples(c) + pf_det_sweep(c) + wallis_suite(c) + pf_closed_suite(c),
    "angles": angle_sum_suite,
    "gb-const": lambda c: gb_const_suite(c) + ideal_suite(c),
    "gb-surface": surface_suite,
    "transgression": lambda c: transgression_l0_suite(c) + transgression_l1_suite(c),
    "transgression-experimental": transgression_l2_experimental,
}
