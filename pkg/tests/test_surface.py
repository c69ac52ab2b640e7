import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gbverify.spaceforms import SpaceForm, face_volume, random_simplex
from gbverify.surface import (
    Region,
    circle_arc,
    flat_disk,
    flat_square,
    geodesic_arc,
    geodesic_curvature_integral,
    polygon_region,
    region_area,
    region_from_json,
    spherical_octant,
    square_with_arc,
    surface_gauss_bonnet,
    triangle_region,
)

seeds = st.integers(0, 2**32 - 1)


@pytest.mark.parametrize("builder", [flat_square, flat_disk, spherical_octant, square_with_arc])
def test_builtin_regions_total_two_pi(builder):
    rep = surface_gauss_bonnet(builder())
    assert rep.passed and rep.lhs == pytest.approx(2 * math.pi, abs=1e-9)


def test_square_with_arc_area():
    # square plus the circular segment above the top edge
    r = math.sqrt(0.5)
    segment = 0.5 * r**2 * (math.pi / 2 - 1)
    assert region_area(square_with_arc()) == pytest.approx(1 + segment, abs=1e-10)


@pytest.mark.parametrize("k,radius,area", [
    (0, 1.3, math.pi * 1.3**2),
    (1, 0.7, 2 * math.pi * (1 - math.cos(0.7))),
    (-1, 0.9, 2 * math.pi * (math.cosh(0.9) - 1)),
])
def test_geodesic_disks(k, radius, area):
    sp = SpaceForm(k, 2)
    center = np.array([0.0, 0.0]) if k == 0 else (np.array([0.0, 0.0, 1.0]) if k == 1 else np.array([1.0, 0.0, 0.0]))
    region = Region(sp, [circle_arc(sp, center, radius)])
    assert region_area(region) == pytest.approx(area, abs=1e-9)
    assert surface_gauss_bonnet(region).passed


def test_circle_geodesic_curvature_flat():
    sp = SpaceForm(0, 2)
    # boundary term of a disk is its total turning 2 pi, counted against the outer normal
    assert geodesic_curvature_integral(sp, circle_arc(sp, [0, 0], 2.0)) == pytest.approx(-2 * math.pi, abs=1e-10)


@given(seeds, st.sampled_from([0, 1, -1]))
@settings(max_examples=20)
def test_green_area_matches_angle_formula(seed, k):
    poly = random_simplex(np.random.default_rng(seed), k, 2)
    region = triangle_region(poly)
    assert region_area(region) == pytest.approx(face_volume(poly, (0, 1, 2))[0], abs=1e-9)
    # total 2 pi equals 4 pi times the face-sum total 1/2
    assert surface_gauss_bonnet(region).lhs == pytest.approx(2 * math.pi, abs=1e-8)


@given(st.floats(0.2, 3.0))
@settings(max_examples=15)
def test_reparametrization_invariance(power):
    sp = SpaceForm(0, 2)
    arc = circle_arc(sp, [0.5, 0.5], math.sqrt(0.5), math.pi / 4, 3 * math.pi / 4)
    a, b = arc.t0, arc.t1
    phi = lambda u: a + (b - a) * u**power
    dphi = lambda u: (b - a) * power * u ** (power - 1)
    ddphi = lambda u: (b - a) * power * (power - 1) * u ** (power - 2)
    moved = arc.reparametrize(phi, dphi, ddphi, 1e-300 if power < 2 else 0.0, 1.0)
    assert geodesic_curvature_integral(sp, moved) == pytest.approx(geodesic_curvature_integral(sp, arc), abs=1e-8)


def test_open_chain_rejected():
    sp = SpaceForm(0, 2)
    with pytest.raises(ValueError, match="not closed"):
        Region(sp, [geodesic_arc(sp, [0, 0], [1, 0]), geodesic_arc(sp, [1, 0], [0, 1])])


def test_declared_angle_mismatch_rejected():
    region = polygon_region(SpaceForm(0, 2), [[0, 0], [1, 0], [1, 1], [0, 1]], [math.pi / 3] * 4)
    with pytest.raises(ValueError, match="declared interior angle"):
        surface_gauss_bonnet(region)


def test_region_from_json():
    data = {
        "curvature": 0,
        "arcs": [
            {"kind": "geodesic", "from": [0, 0], "to": [1, 0]},
            {"kind": "geodesic", "from": [1, 0], "to": [1, 1]},
            {"kind": "parametric", "shape": "circle", "center": [0.5, 0.5], "radius": math.sqrt(0.5), "t0": math.pi / 4, "t1": 3 * math.pi / 4},
            {"kind": "geodesic", "from": [0, 1], "to": [0, 0]},
        ],
    }
    rep = surface_gauss_bonnet(region_from_json(data))
    assert rep.passed
