import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gbverify.calculus import Polynomial
from gbverify.double_forms import Box
from gbverify.multilinear import BilinearForm, SkewForm, pfaffian
from gbverify.suites import angle_family
from gbverify.transgression import (
    AngleFamily,
    ConnectionChart,
    Frame,
    NormalizedFamily,
    UnitFamily,
    covariant_derivative,
    curvature_polynomials,
    fiber_circle_index,
    parallel_section_check,
    pf_closed_check,
    pfaffian_form,
    transgression_form,
    verify_transgression_derivative,
)

seeds = st.integers(0, 2**32 - 1)


def numeric_curvature(chart, point, step=1e-6):
    """Oracle: F_ij from central differences of the omega matrices."""
    m = chart.base_dim
    om = lambda x: chart.omega_values(x)[..., 0]
    deriv = []
    for i in range(m):
        e = np.zeros(m)
        e[i] = step
        deriv.append((om(point + e) - om(point - e)) / (2 * step))
    w = om(point)
    f = np.zeros((m, m) + w.shape[1:])
    for i in range(m):
        for j in range(m):
            f[i, j] = deriv[i][j] - deriv[j][i] + w[i] @ w[j] - w[j] @ w[i]
    return f


def orthogonal(rng, r):
    q, _ = np.linalg.qr(rng.standard_normal((r, r)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def test_curvature_hand_example():
    x, y = Polynomial.variable(2, 0), Polynomial.variable(2, 1)
    zero = Polynomial(2)
    # omega_0 = y J, omega_1 = 0: F_01 = -d_y omega_0 = -J
    chart = ConnectionChart(BilinearForm.euclidean(2), [[[zero, y], [-y, zero]], [[zero, zero], [zero, zero]]], Box.cube(2, -1, 1))
    r = curvature_polynomials(chart)
    assert r[((0, 1), (0, 1))](np.array([[0.3, 0.7]]))[0] == pytest.approx(-1.0)


@given(seeds)
@settings(max_examples=10)
def test_curvature_matches_matrix_oracle(seed):
    rng = np.random.default_rng(seed)
    chart = ConnectionChart.random(rng, 3, 4)
    point = rng.uniform(-0.8, 0.8, size=(1, 3))
    f = numeric_curvature(chart, point)
    r = curvature_polynomials(chart)
    s = chart.h.signs
    for (ij, ab), poly in r.coefficients.items():
        (i, j), (a, b) = ij, ab
        assert poly(point)[0] == pytest.approx(s[a] * f[i, j, a, b], abs=1e-6)


def test_sphere_pfaffian_integrates_to_euler_class():
    pf = pfaffian_form(ConnectionChart.sphere())
    assert pf.integrate(24) == pytest.approx(4 * math.pi, abs=1e-10)


@given(seeds)
@settings(max_examples=10)
def test_pfaffian_form_pointwise_matches_matrix_pfaffian(seed):
    rng = np.random.default_rng(seed)
    chart = ConnectionChart.random(rng, 4, 4, degree=1)
    point = rng.uniform(-0.8, 0.8, size=(1, 4))
    f = numeric_curvature(chart, point)
    # Pf of the 2-form valued skew matrix: coefficient of dx^{0123} from the matching expansion
    pf = pfaffian_form(chart)(point)[(0, 1, 2, 3)][0]
    # Pf(R)(e_0..e_3) = (1/8) sum_sigma sgn(sigma) Pf'(F_{s0 s1}, F_{s2 s3}) with Pf' the polarization
    total = 0.0
    for sigma in itertools.permutations(range(4)):
        sgn = np.linalg.det(np.eye(4)[list(sigma)])
        total += sgn * mixed_pfaffian(f[sigma[0], sigma[1]], f[sigma[2], sigma[3]])
    oracle = total / 8.0
    assert pf == pytest.approx(oracle, rel=1e-5, abs=1e-7)


def mixed_pfaffian(a, b):
    """Polarized Pfaffian of two 4x4 skew matrices: Pf(a+b) - Pf(a) - Pf(b)."""
    pf = lambda m: pfaffian(SkewForm.euclidean(0.5 * (m - m.T)))
    return pf(a + b) - pf(a) - pf(b)


def test_pf_closed_on_random_charts(rng):
    for _ in range(3):
        rep = pf_closed_check(ConnectionChart.random(rng, 3, 2, degree=3))
        assert rep.passed and rep.lhs < 1e-9


def test_pfaffian_gauge_invariant(rng):
    chart = ConnectionChart.random(rng, 4, 4, degree=1)
    gauged = chart.gauge(orthogonal(rng, 4))
    pts = chart.chart.probe_grid(3)
    diff = pfaffian_form(chart)(pts) - pfaffian_form(gauged)(pts)
    assert diff.max_abs() < 1e-10


def test_gauge_rejects_non_orthogonal(rng):
    chart = ConnectionChart.random(rng, 2, 2)
    with pytest.raises(ValueError):
        chart.gauge(np.diag([2.0, 1.0]))


def test_non_skew_connection_rejected():
    x = Polynomial.variable(1, 0)
    zero = Polynomial(1)
    with pytest.raises(ValueError):
        ConnectionChart(BilinearForm.euclidean(2), [[[zero, x], [x, zero]]], Box.cube(1, -1, 1))


def const_section(values, m):
    return [Polynomial.constant(m, float(v)) for v in values]


def test_parallel_section_kills_pfaffian_block_diagonal(rng):
    flat = ConnectionChart.flat(Box.cube(4, -1, 1), BilinearForm.euclidean(2))
    other = ConnectionChart.random(rng, 4, 2, degree=1)
    chart = ConnectionChart.block_diagonal(flat, other)
    rep = parallel_section_check(chart, const_section([1, 0, 0, 0], 4), points_per_axis=4)
    assert rep.passed


def test_parallel_section_gauged(rng):
    flat = ConnectionChart.flat(Box.cube(4, -1, 1), BilinearForm.euclidean(2))
    chart = ConnectionChart.block_diagonal(flat, ConnectionChart.random(rng, 4, 2, degree=1))
    g = orthogonal(rng, 4)
    rep = parallel_section_check(chart.gauge(g), const_section(g @ np.array([0.0, 1.0, 0.0, 0.0]), 4), points_per_axis=4)
    assert rep.passed


def test_non_parallel_section_raises(rng):
    chart = ConnectionChart.random(rng, 4, 4, degree=1)
    with pytest.raises(ValueError, match="not parallel"):
        parallel_section_check(chart, const_section([1, 0, 0, 0], 4), points_per_axis=3)


def test_covariant_derivative_of_flat_chart_is_gradient():
    chart = ConnectionChart.flat(Box.cube(2, -1, 1), BilinearForm.euclidean(2))
    x = Polynomial.variable(2, 0)
    nabla = covariant_derivative(chart, [x * x, x])
    assert nabla[0][0](np.array([[0.5, 0.0]]))[0] == pytest.approx(1.0)
    assert nabla[1][1].max_abs_coefficient() == 0.0


def test_sphere_t1_hand_oracle():
    # V = (cos theta, sin theta) with omega_phi = z J: T^(1) = d theta - z d phi
    chart = ConnectionChart.sphere()
    z, phi = Polynomial.variable(2, 0), Polynomial.variable(2, 1)
    theta = z * phi * 0.3 + z * z
    t1 = transgression_form(chart, AngleFamily(theta))
    pts = chart.chart.probe_grid(4)
    form = t1(pts)
    np.testing.assert_allclose(form[(0,)], theta.diff(0)(pts), atol=1e-14)
    np.testing.assert_allclose(form[(1,)], theta.diff(1)(pts) - pts[:, 0], atol=1e-14)


@pytest.mark.parametrize("turns", [1, -1, 2])
def test_fiber_circle_index(turns):
    assert fiber_circle_index(turns) == pytest.approx(2 * math.pi * turns, abs=1e-8)


@given(seeds)
@settings(max_examples=8)
def test_transgression_l0_exact(seed):
    rng = np.random.default_rng(seed)
    chart = ConnectionChart.random(rng, 2, 2)
    rep = verify_transgression_derivative(chart, angle_family(rng, 2), points_per_axis=5)
    assert rep.passed, rep.line()
    assert rep.details["sign_constant"] == pytest.approx(-1.0, abs=1e-6)


def test_transgression_l0_jets_agree_with_finite_differences(rng):
    chart = ConnectionChart.random(rng, 2, 2)
    family = angle_family(rng, 2)
    exact = verify_transgression_derivative(chart, family, 5, mode="exact")
    fd = verify_transgression_derivative(chart, family, 5, mode="fd")
    assert exact.passed and fd.passed
    assert fd.details["mode"] == "fd"


def test_normalized_family_needs_fd(rng):
    chart = ConnectionChart.random(rng, 2, 2)
    family = NormalizedFamily.random(rng, 2, 2)
    assert not family.exact
    with pytest.raises(ValueError):
        transgression_form(chart, family, mode="exact").d(chart.chart.probe_grid(2))


def test_reversing_parameter_flips_t2(rng):
    chart = ConnectionChart.random(rng, 2, 2)
    family = angle_family(rng, 2, param_dim=1, winding=2 * math.pi)
    pts = chart.chart.probe_grid(4)
    forward = transgression_form(chart, family)(pts)
    backward = transgression_form(chart, family.reverse(0))(pts)
    assert (forward + backward).max_abs() < 1e-10


def test_restriction_recovers_endpoint_family(rng):
    chart = ConnectionChart.random(rng, 2, 2)
    family = angle_family(rng, 2, param_dim=1)
    theta_end = family.theta.substitute(0, 1.0)
    pts = chart.chart.probe_grid(4)
    direct = transgression_form(chart, AngleFamily(theta_end))(pts)
    restricted = transgression_form(chart, family.restrict(0, 1.0))(pts)
    assert (direct - restricted).max_abs() < 1e-12


def test_l1_boundary_relation_holds_with_plus_sign(rng):
    # dT^(2) equals T^(1) at x = 1 minus T^(1) at x = 0, pointwise
    for _ in range(3):
        chart = ConnectionChart.random(rng, 2, 2)
        family = angle_family(rng, 2, param_dim=1, winding=2 * math.pi)
        rep = verify_transgression_derivative(chart, family, points_per_axis=5)
        assert rep.details["residual_if_sign_flipped"] < 1e-6
        assert rep.details["sign_constant"] == pytest.approx(1.0, abs=1e-8)


def test_l1_check_reports_failure_as_stated(rng):
    chart = ConnectionChart.random(rng, 2, 2)
    rep = verify_transgression_derivative(chart, angle_family(rng, 2, param_dim=1, winding=2 * math.pi), 5)
    assert rep.details["identity"] == "dT2 = -T1(boundary)"
    assert not rep.passed


def test_l1_trivially_passes_when_endpoints_agree(rng):
    # theta independent of x: both sides vanish, so the check cannot discriminate
    chart = ConnectionChart.random(rng, 2, 2)
    theta = Polynomial.random(rng, 2, 2).insert_variables(0, 1)
    rep = verify_transgression_derivative(chart, AngleFamily(theta, 1), 5)
    assert rep.passed and rep.details["max_rhs"] < 1e-12


@pytest.mark.slow
def test_l2_experimental_sign(rng):
    chart = ConnectionChart.random(rng, 2, 4, degree=1)
    family = NormalizedFamily.random(rng, 4, 2, param_dim=2)
    with pytest.raises(ValueError):
        verify_transgression_derivative(chart, family, 3, 8, mode="fd")
    rep = verify_transgression_derivative(chart, family, 4, 12, mode="fd", allow_experimental=True)
    assert rep.details["sign_constant"] == pytest.approx(-1.0, abs=1e-3)


def test_unit_check_rejects_non_unit():
    class Doubled(UnitFamily):
        param_dim, base_dim, h = 0, 1, BilinearForm.euclidean(2)

        def frame(self, z):
            n = len(np.atleast_2d(z))
            return Frame(np.vstack([np.full(n, 2.0), np.zeros(n)]), np.zeros((1, 2, n)))

    with pytest.raises(ValueError, match="not h-unit"):
        Doubled().check_unit(np.zeros((3, 1)))


def test_parameter_dimension_bound(rng):
    chart = ConnectionChart.random(rng, 2, 2)
    family = angle_family(rng, 2, param_dim=2)
    with pytest.raises(ValueError):
        transgression_form(chart, family)


def test_connection_json_round_trip(rng):
    chart = ConnectionChart.random(rng, 3, 4, h=BilinearForm((1, 1, -1, -1)))
    again = ConnectionChart.from_json(chart.to_json())
    assert again.h == chart.h and again.chart == chart.chart
    pts = chart.chart.probe_grid(3)
    np.testing.assert_array_equal(again.omega_values(pts), chart.omega_values(pts))
