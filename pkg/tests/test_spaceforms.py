import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gbverify.spaceforms import (
    GeodesicPolytope,
    SpaceForm,
    face_volume,
    gauss_bonnet_constant_curvature,
    ideal_4simplex_volume_check,
    ideal_simplex_from_directions,
    octant_triangle,
    outer_dihedral_angle,
    random_simplex,
    regular_hyperbolic_triangle,
    regular_ideal_4simplex,
    sphere_volume,
    tangent_outer_angle,
    triangle_angles,
)

seeds = st.integers(0, 2**32 - 1)


def side_lengths(poly):
    sp, v = poly.space, poly.vertices
    out = []
    for i, j in ((1, 2), (0, 2), (0, 1)):
        c = float(sp.inner(v[i], v[j]))
        out.append(math.acos(c) if sp.curvature == 1 else math.acosh(-c))
    return out


def lhuilier_area(poly):
    """Oracle: triangle area from side lengths alone."""
    a, b, c = side_lengths(poly)
    s = (a + b + c) / 2
    if poly.space.curvature == 1:
        t = math.tan(s / 2) * math.tan((s - a) / 2) * math.tan((s - b) / 2) * math.tan((s - c) / 2)
    else:
        t = math.tanh(s / 2) * math.tanh((s - a) / 2) * math.tanh((s - b) / 2) * math.tanh((s - c) / 2)
    return 4 * math.atan(math.sqrt(t))


def test_sphere_volumes():
    assert sphere_volume(-1) == 1.0
    assert sphere_volume(0) == pytest.approx(2.0)
    assert sphere_volume(1) == pytest.approx(2 * math.pi)
    assert sphere_volume(2) == pytest.approx(4 * math.pi)
    assert sphere_volume(4) == pytest.approx(8 * math.pi**2 / 3)


def test_octant_triangle():
    poly = octant_triangle()
    assert triangle_angles(poly, (0, 1, 2)) == pytest.approx([math.pi / 2] * 3)
    assert face_volume(poly, (0, 1, 2))[0] == pytest.approx(math.pi / 2)
    rep = gauss_bonnet_constant_curvature(poly)
    assert rep.passed and rep.rhs == pytest.approx(0.5, abs=1e-12)


def test_regular_hyperbolic_triangle_angles_and_defect():
    poly = regular_hyperbolic_triangle(math.pi / 4)
    assert triangle_angles(poly, (0, 1, 2)) == pytest.approx([math.pi / 4] * 3, abs=1e-12)
    assert face_volume(poly, (0, 1, 2))[0] == pytest.approx(math.pi / 4, abs=1e-12)


@given(seeds, st.sampled_from([1, -1]))
def test_excess_and_defect_match_side_length_oracle(seed, k):
    poly = random_simplex(np.random.default_rng(seed), k, 2)
    assert face_volume(poly, (0, 1, 2))[0] == pytest.approx(lhuilier_area(poly), abs=1e-9)


def test_ideal_triangle_area_is_pi(rng):
    dirs = rng.standard_normal((3, 2))
    poly = ideal_simplex_from_directions(dirs)
    assert face_volume(poly, (0, 1, 2))[0] == pytest.approx(math.pi, abs=1e-12)
    assert face_volume(poly, (0, 1))[0] == math.inf


@given(seeds, st.sampled_from([0, 1, -1]))
def test_gauss_bonnet_triangles(seed, k):
    rep = gauss_bonnet_constant_curvature(random_simplex(np.random.default_rng(seed), k, 2))
    assert rep.passed, rep.line()


@given(seeds, st.sampled_from([1, -1]))
@settings(max_examples=15)
def test_gauss_bonnet_isometry_invariant(seed, k):
    rng = np.random.default_rng(seed)
    poly = random_simplex(rng, k, 2)
    moved = poly.transform(poly.space.random_isometry(rng))
    a = gauss_bonnet_constant_curvature(poly)
    b = gauss_bonnet_constant_curvature(moved)
    assert a.rhs == pytest.approx(b.rhs, abs=1e-9)
    assert [r["term"] for r in a.faces] == pytest.approx([r["term"] for r in b.faces], abs=1e-9)


@given(seeds, st.sampled_from([0, 1, -1]), st.integers(2, 4))
@settings(max_examples=15)
def test_random_isometry_preserves_form(seed, k, d):
    sp = SpaceForm(k, d)
    g = sp.random_isometry(np.random.default_rng(seed))
    np.testing.assert_allclose(g.T @ np.diag(sp.signs) @ g, np.diag(sp.signs), atol=1e-10)


def test_spherical_tetrahedron_gauss_bonnet(rng):
    rep = gauss_bonnet_constant_curvature(random_simplex(rng, 1, 3), seed=4, samples=400_000)
    assert rep.passed, rep.line()


@pytest.mark.parametrize("k", [0, 1, -1])
def test_4simplex_gauss_bonnet(k, rng):
    rep = gauss_bonnet_constant_curvature(random_simplex(rng, k, 4), seed=5, samples=400_000)
    assert rep.passed, rep.line()


def test_spherical_orthant_4volume():
    # all-right simplex: one 32nd of S^4
    poly = GeodesicPolytope(SpaceForm(1, 4), np.eye(5))
    vol, err, method = face_volume(poly, tuple(range(5)), seed=2, samples=1_000_000)
    assert method == "monte-carlo"
    assert abs(vol - sphere_volume(4) / 32) <= err


def test_monte_carlo_reproducible(rng):
    poly = random_simplex(rng, -1, 4)
    a = face_volume(poly, tuple(range(5)), seed=9, samples=200_000)
    b = face_volume(poly, tuple(range(5)), seed=9, samples=200_000)
    assert a == b


def test_outer_angle_independent_of_face_point():
    poly = random_simplex(np.random.default_rng(3), -1, 3)
    face = (0, 1)
    sp = poly.space
    a, b = poly.vertices[0], poly.vertices[1]
    points = [sp.normalize((1 - t) * a + t * b) for t in (0.1, 0.5, 0.9)]
    fractions = {tangent_outer_angle(poly, face, at=p).fraction for p in points}
    assert len(fractions) == 1


def test_outer_angle_rejects_bad_points():
    poly = regular_ideal_4simplex()
    with pytest.raises(ValueError, match="ideal vertex"):
        tangent_outer_angle(poly, (0,))
    tri = random_simplex(np.random.default_rng(1), 1, 2)
    with pytest.raises(ValueError, match="not on the face"):
        tangent_outer_angle(tri, (0, 1), at=tri.vertices[2])


def test_regular_ideal_4simplex_dihedral_angle():
    # interior dihedral angle arccos(1/3); outer angle is its supplement
    poly = regular_ideal_4simplex()
    for face in poly.faces(2):
        assert outer_dihedral_angle(poly, face) == pytest.approx(math.pi - math.acos(1 / 3), abs=1e-12)


def test_ideal_4simplex_volume_regular():
    rep = ideal_4simplex_volume_check(regular_ideal_4simplex(), seed=1, samples=1_000_000)
    assert rep.passed, rep.line()
    assert rep.rhs == pytest.approx(-2 * math.pi**2 + 10 * math.pi / 3 * (math.pi - math.acos(1 / 3)), abs=1e-12)


def test_face_sum_rejects_ideal_vertices():
    with pytest.raises(ValueError):
        gauss_bonnet_constant_curvature(regular_ideal_4simplex())


def test_vertex_validation():
    with pytest.raises(ValueError):
        GeodesicPolytope(SpaceForm(1, 2), np.array([[1.0, 0, 0], [0, 2, 0], [0, 0, 1]]))
    with pytest.raises(ValueError):
        GeodesicPolytope(SpaceForm(1, 2), np.eye(3), (True, False, False))


def test_geodesic_polytope_json_round_trip(rng):
    poly = random_simplex(rng, -1, 3)
    again = GeodesicPolytope.from_json(poly.to_json())
    np.testing.assert_allclose(again.vertices, poly.vertices, atol=1e-12)
    np.testing.assert_allclose(again.normals, poly.normals, atol=1e-10)
