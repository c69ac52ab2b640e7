import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from gbverify.polytope import (
    Polytope,
    build_face_lattice,
    cone_contains,
    cone_fraction,
    euclidean_angle_sum,
    euler_sum,
    outer_solid_angle,
    random_simplex,
    regular_polygon,
    triangle_angles_exact,
)

seeds = st.integers(0, 2**32 - 1)


def counts(poly):
    return {l: len(f) for l, f in build_face_lattice(poly).items()}


def test_cube_face_counts():
    cube = Polytope.box([0, 0, 0], [1, 1, 1])
    assert counts(cube) == {0: 1, 1: 6, 2: 12, 3: 8}
    assert euler_sum(build_face_lattice(cube), 3) == 1


@pytest.mark.parametrize("d", [2, 3, 4])
def test_simplex_face_counts(d, rng):
    poly = random_simplex(rng, d)
    assert counts(poly) == {l: math.comb(d + 1, l) for l in range(d + 1)}


def test_non_simple_polytope_rejected():
    # square pyramid: the apex lies on four facets
    verts = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0], [0.5, 0.5, 1]], dtype=float)
    normals = np.array([[0, 0, -1], [0, -2, 1], [2, 0, 1], [0, 2, 1], [-2, 0, 1]], dtype=float)
    offsets = np.array([0, 0, 2, 2, 0], dtype=float)
    with pytest.raises(ValueError, match="simple"):
        build_face_lattice(Polytope(verts, normals, offsets))


def test_invalid_halfspaces_rejected():
    with pytest.raises(ValueError):
        Polytope(np.array([[0.0, 0], [1, 0], [0, 1]]), np.array([[1.0, 0], [0, 1], [-1, -1]]), np.array([0.0, 0.0, 0.0]))


def test_cone_contains_examples():
    gens = np.eye(2)
    assert cone_contains(gens, [1, 1])
    assert cone_contains(gens, [0, 0])
    assert not cone_contains(gens, [1, -0.1])
    # non-simplicial: three generators in the plane
    gens3 = np.array([[1, 0], [1, 1], [0, 1]], dtype=float)
    assert cone_contains(gens3, [2, 1], mode="nnls")
    assert not cone_contains(gens3, [-1, 1])
    with pytest.raises(ValueError):
        cone_contains(gens3, [1, 1], mode="simplicial")


def test_octant_vertex_fraction_is_one_eighth():
    cube = Polytope.box([0, 0, 0], [1, 1, 1])
    vertex = build_face_lattice(cube)[3][0]
    angle = outer_solid_angle(cube, vertex, seed=1, samples=400_000)
    assert abs(angle.fraction - 0.125) <= angle.abs_error


def test_equilateral_vertex_fraction_is_one_third():
    tri = regular_polygon(3)
    for vertex in build_face_lattice(tri)[2]:
        assert outer_solid_angle(tri, vertex).fraction == pytest.approx(1 / 3, abs=1e-14)


def test_facet_fraction_is_half():
    cube = Polytope.box([0, 0, 0], [1, 1, 1])
    assert all(outer_solid_angle(cube, f).fraction == 0.5 for f in build_face_lattice(cube)[1])


def test_exact_two_cone_matches_monte_carlo(rng):
    # embed a 2x2 gram into a 3x3 with an orthogonal third generator: fraction halves
    u = np.array([1.0, 0.0, 0.0])
    v = np.array([math.cos(1.1), math.sin(1.1), 0.0])
    gram3 = np.array([[1, u @ v, 0], [u @ v, 1, 0], [0, 0, 1]])
    exact = cone_fraction(gram3[:2, :2]).fraction
    mc = cone_fraction(gram3, seed=3, samples=400_000)
    assert abs(mc.fraction - exact / 2) <= mc.abs_error


def test_cone_fraction_deterministic_and_seed_dependent():
    gram = np.array([[1, 0.2, -0.1], [0.2, 1, 0.3], [-0.1, 0.3, 1]])
    a = cone_fraction(gram, seed=5, samples=100_000)
    b = cone_fraction(gram, seed=5, samples=100_000)
    c = cone_fraction(gram, seed=6, samples=100_000)
    assert a == b and a.fraction != c.fraction


def test_triangle_angles_sum_to_pi(rng):
    for _ in range(5):
        assert sum(triangle_angles_exact(random_simplex(rng, 2))) == pytest.approx(math.pi, abs=1e-12)


@given(seeds)
def test_angle_sum_triangles_exact(seed):
    rep = euclidean_angle_sum(random_simplex(np.random.default_rng(seed), 2))
    assert rep.passed and abs(rep.lhs - 1.0) < 1e-12


@given(st.integers(3, 12))
def test_angle_sum_regular_polygons(k):
    rep = euclidean_angle_sum(regular_polygon(k))
    assert rep.passed


@given(seeds)
@settings(max_examples=5)
def test_angle_sum_rigid_motion_invariant(seed):
    rng = np.random.default_rng(seed)
    poly = random_simplex(rng, 3)
    rot = Rotation.random(random_state=seed % (2**32)).as_matrix()
    moved = poly.transform(rot, rng.standard_normal(3))
    a = [outer_solid_angle(poly, f, 1, 100_000) for f in build_face_lattice(poly)[3]]
    b = [outer_solid_angle(moved, f, 1, 100_000) for f in build_face_lattice(moved)[3]]
    # same Gram matrices and seeds give identical estimates up to rounding
    for x, y in zip(a, b):
        assert x.fraction == pytest.approx(y.fraction, abs=1e-4)


def test_box_angle_sum_in_4d():
    rep = euclidean_angle_sum(Polytope.box([0] * 4, [1, 2, 3, 4]), seed=2, samples=200_000)
    assert rep.passed


def test_polytope_json_round_trip(rng):
    poly = random_simplex(rng, 3)
    again = Polytope.from_json(poly.to_json())
    np.testing.assert_allclose(again.vertices, poly.vertices)
    assert counts(again) == counts(poly)
