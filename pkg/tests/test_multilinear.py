import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gbverify.multilinear import (
    BilinearForm,
    ExteriorElement,
    SkewForm,
    berezin,
    double_factorial,
    merge_sign,
    omega_from_skew,
    pfaffian,
    pfaffian_matching,
    random_skew,
    universal_constant,
    wallis_constants,
    wedge_power,
)

seeds = st.integers(0, 2**32 - 1)


def permutation_sign(perm):
    sign = 1
    for i, j in itertools.combinations(range(len(perm)), 2):
        if perm[i] > perm[j]:
            sign = -sign
    return sign


def test_merge_sign_matches_permutation_parity():
    for first, second in [((0,), (1,)), ((1,), (0,)), ((0, 2), (1,)), ((1, 3), (0, 2)), ((2,), (0, 1))]:
        assert merge_sign(first, second) == permutation_sign(first + second)
    assert merge_sign((0, 1), (1,)) == 0


def test_pfaffian_2x2():
    assert pfaffian(SkewForm.euclidean([[0, 3.5], [-3.5, 0]])) == pytest.approx(3.5, abs=1e-15)


def test_pfaffian_4x4_closed_form():
    a, b, c, d, f, g = 1.0, 2.0, 3.0, 4.0, 5.0, 6.0
    m = np.array([[0, a, b, c], [-a, 0, d, f], [-b, -d, 0, g], [-c, -f, -g, 0]])
    assert pfaffian(SkewForm.euclidean(m)) == pytest.approx(a * g - b * f + c * d, abs=1e-12)


def test_pfaffian_block_diagonal_is_product():
    m = np.zeros((6, 6))
    for k, val in enumerate((2.0, -0.5, 3.0)):
        m[2 * k, 2 * k + 1], m[2 * k + 1, 2 * k] = val, -val
    assert pfaffian(SkewForm.euclidean(m)) == pytest.approx(-3.0, abs=1e-12)


def test_orientation_reversal_flips_sign(rng):
    a = random_skew(rng, 4)
    assert pfaffian(a, orientation=-1) == pytest.approx(-pfaffian(a), abs=1e-14)


def test_odd_dimension_rejected(rng):
    with pytest.raises(ValueError):
        pfaffian(SkewForm.euclidean(np.zeros((3, 3))))


def test_skew_form_rejects_non_skew():
    with pytest.raises(ValueError):
        SkewForm.euclidean([[0, 1], [1, 0]])


@given(seeds, st.integers(1, 4))
def test_pf_squared_is_det(seed, n):
    a = random_skew(np.random.default_rng(seed), 2 * n)
    det = np.linalg.det(a.entries)
    assert pfaffian(a) ** 2 == pytest.approx(det, rel=1e-9, abs=1e-12)


@given(seeds, st.integers(1, 3))
def test_pf_matches_matching_expansion(seed, n):
    a = random_skew(np.random.default_rng(seed), 2 * n)
    assert pfaffian(a) == pytest.approx(pfaffian_matching(a.entries), abs=1e-12)


@given(seeds, st.integers(1, 3))
def test_pf_congruence(seed, n):
    rng = np.random.default_rng(seed)
    a = random_skew(rng, 2 * n)
    b = rng.standard_normal((2 * n, 2 * n))
    transformed = SkewForm.euclidean(b.T @ a.entries @ b)
    assert pfaffian(transformed) == pytest.approx(np.linalg.det(b) * pfaffian(a), rel=1e-9, abs=1e-10)


@given(seeds, st.lists(st.sampled_from([-1, 1]), min_size=2, max_size=6).filter(lambda s: len(s) % 2 == 0))
def test_pf_general_signature(seed, signs):
    a = random_skew(np.random.default_rng(seed), len(signs), signs)
    ha = a.form.matrix @ a.entries
    assert pfaffian(a) == pytest.approx(pfaffian_matching(ha), abs=1e-12)


@given(seeds)
def test_wedge_graded_commutative(seed):
    rng = np.random.default_rng(seed)
    p, q = 2, 3
    x = ExteriorElement(5, p, {k: rng.standard_normal() for k in itertools.combinations(range(5), p)})
    y = ExteriorElement(5, q, {k: rng.standard_normal() for k in itertools.combinations(range(5), q)})
    diff = x.wedge(y) - y.wedge(x).scale((-1) ** (p * q))
    assert diff.max_abs() < 1e-12


def test_berezin_of_volume_form():
    h = BilinearForm((1, -1, 1, -1))
    assert berezin(h.volume_form(), h) == 1.0
    assert berezin(h.volume_form(), h, orientation=-1) == -1.0


def test_wedge_power_of_2x2_omega():
    a = SkewForm.euclidean([[0, 2.0], [-2.0, 0]])
    top = wedge_power(omega_from_skew(a), 1)
    assert top[(0, 1)] == pytest.approx(2.0)


def test_universal_constant_values():
    assert universal_constant(1, 0, 0) == Fraction(1)
    assert universal_constant(1, 0, 1) == Fraction(1)
    assert universal_constant(2, 0, 0) == Fraction(1)
    assert universal_constant(2, 1, 0) == Fraction(2, 6)
    assert universal_constant(2, 1, 2) == Fraction(2)
    with pytest.raises(ValueError):
        universal_constant(1, 0, 2)


def test_double_factorial():
    assert [double_factorial(n) for n in range(-1, 8)] == [1, 1, 1, 2, 3, 8, 15, 48, 105]


@pytest.mark.parametrize("k", range(11))
def test_wallis_closed_forms_against_products(k):
    interval, cosine = wallis_constants(k)
    # oracle: binomial expansion of (1 - t^2)^k integrated termwise
    expansion = sum(Fraction((-1) ** j * math.comb(k, j), 2 * j + 1) for j in range(k + 1))
    assert interval == expansion
    assert cosine == pytest.approx(math.pi * math.comb(2 * k, k) / 4**k, rel=1e-14)
