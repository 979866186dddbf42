import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaborphase.errors import InvalidArgumentError
from gaborphase.frft import (
    TfPoint,
    c_theta,
    check_grid,
    frft_apply,
    frft_of_measure,
    frft_profile,
    gabor_of_frft_measure,
    lemma_phase,
    parse_angle,
    rotate_point,
    rotate_points,
    rotate_product_set,
    rotation_identity_residual,
)
from gaborphase.gabor import gabor_direct, gaussian_gabor_closed_form, gaussian_window
from gaborphase.signals import make_grid, random_signal

WIDE = make_grid(8.0, 1025)


def bump(t):
    # shifted, modulated Gaussian; its Fourier transform is known in closed form
    return np.exp(-np.pi * (t - 0.5) ** 2) * np.exp(2j * np.pi * 0.3 * t)


def bump_hat(xi):
    return np.exp(-np.pi * (xi - 0.3) ** 2) * np.exp(-2j * np.pi * (xi - 0.3) * 0.5)


def wnorm(v):
    return math.sqrt(float(np.sum(WIDE.weights * np.abs(v) ** 2)))


@pytest.mark.parametrize("theta", [0.3, math.pi / 4, 1.2, 2.5, -1.0])
def test_c_theta_branch(theta):
    c = c_theta(theta)
    assert c.real > 0
    assert abs(abs(c) ** 2 - 1 / abs(math.sin(theta))) < 1e-12


def test_c_theta_quarter_turn_exact():
    assert c_theta(math.pi / 2) == 1
    with pytest.raises(InvalidArgumentError):
        c_theta(0.0)


def test_parse_angle():
    assert parse_angle("pi/2") == math.pi / 2
    assert parse_angle("-pi/6") == -math.pi / 6
    assert parse_angle("0.25") == 0.25
    with pytest.raises(InvalidArgumentError):
        parse_angle("tau")


def test_special_angles_exact():
    v = bump(WIDE.nodes)
    assert np.array_equal(frft_apply(v, WIDE, 0.0), v)
    assert np.array_equal(frft_apply(v, WIDE, 2 * math.pi), v)
    assert np.array_equal(frft_apply(v, WIDE, math.pi), v[::-1])
    assert np.array_equal(frft_apply(v, WIDE, -math.pi), v[::-1])
    assert np.array_equal(frft_apply(v, WIDE, 5e-7), v)


def test_gaussian_quarter_turn():
    g = make_grid(6.0, 1025)
    out = frft_apply(gaussian_window(g.nodes), g, math.pi / 2)
    assert np.max(np.abs(out - gaussian_window(g.nodes))) <= 1e-6


@pytest.mark.parametrize("theta", [0.3, 0.7, 2.0, -1.1])
def test_gaussian_is_eigenfunction(theta):
    out = frft_apply(gaussian_window(WIDE.nodes), WIDE, theta)
    assert np.max(np.abs(out - gaussian_window(WIDE.nodes))) <= 1e-8


def test_quarter_turn_is_fourier_transform():
    out = frft_apply(bump(WIDE.nodes), WIDE, math.pi / 2)
    assert np.max(np.abs(out - bump_hat(WIDE.nodes))) <= 1e-6


@pytest.mark.parametrize("theta", [0.3, math.pi / 4, 1.2])
def test_unitarity(theta):
    v = bump(WIDE.nodes)
    assert abs(wnorm(frft_apply(v, WIDE, theta)) / wnorm(v) - 1) <= 1e-8


@pytest.mark.parametrize("t1,t2", [(0.3, 0.5), (math.pi / 4, 1.2), (1.0, -0.4), (0.6, math.pi / 2)])
def test_semigroup(t1, t2):
    v = bump(WIDE.nodes)
    two = frft_apply(frft_apply(v, WIDE, t2), WIDE, t1)
    one = frft_apply(v, WIDE, t1 + t2)
    assert wnorm(two - one) / wnorm(one) <= 1e-5


def test_near_quarter_turn_continuity():
    v = bump(WIDE.nodes)
    a = frft_apply(v, WIDE, math.pi / 2)
    b = frft_apply(v, WIDE, math.pi / 2 + 1e-9)
    assert np.max(np.abs(a - b)) < 1e-6


def test_rotate_point_examples():
    assert rotate_point(0.0, (1.5, -2.0)) == TfPoint(1.5, -2.0)
    assert rotate_point(math.pi / 2, (1.0, 0.0)) == TfPoint(0.0, 1.0)


@given(st.floats(-7, 7), st.floats(-7, 7), st.floats(-5, 5), st.floats(-5, 5))
def test_rotation_group_law(a, b, x, w):
    p = rotate_point(a, rotate_point(b, (x, w)))
    q = rotate_point(a + b, (x, w))
    assert abs(p.x - q.x) <= 1e-12 * (1 + abs(x) + abs(w)) * 10
    assert abs(p.omega - q.omega) <= 1e-12 * (1 + abs(x) + abs(w)) * 10


def test_rotate_product_set():
    Om, X = np.array([1.0, 2.0]), np.array([-1.0, 0.0, 3.0])
    P = rotate_product_set(0.0, Om, X)
    assert P.shape == (6, 2)
    np.testing.assert_array_equal(P[:3], [[1, -1], [1, 0], [1, 3]])
    Q = rotate_product_set(math.pi / 2, Om, X)
    # (omega, x) -> (-x, omega)
    np.testing.assert_array_equal(Q, np.column_stack([-P[:, 1], P[:, 0]]))
    np.testing.assert_array_equal(rotate_points(math.pi / 2, P), Q)


@pytest.mark.parametrize("theta", [0.3, 1.0, math.pi / 3, 2.4])
def test_rotation_phase_on_gaussian(theta):
    # phi is invariant under every F_theta, so the identity reduces to the closed form
    pts = check_grid(-1.5, 1.5, 0.5)
    x, w = pts[:, 0], pts[:, 1]
    r = rotate_points(theta, pts)
    rhs = lemma_phase(theta, x, w) * gaussian_gabor_closed_form(r[:, 0], r[:, 1])
    np.testing.assert_allclose(gaussian_gabor_closed_form(x, w), rhs, atol=1e-14)


def test_quarter_turn_phase_factor():
    x, w = 0.7, -0.4
    assert lemma_phase(math.pi / 2, x, w) == pytest.approx(np.exp(-2j * np.pi * x * w), abs=1e-15)


def test_identity_residual_theta_zero():
    f = random_signal(0.5, 33, seed=5)
    assert rotation_identity_residual(f, 0.0, check_grid(-1.5, 1.5, 0.25)) <= 1e-12


@pytest.mark.parametrize("theta", [math.pi / 4, math.pi / 2, 2.0])
def test_identity_residual(theta):
    f = random_signal(0.5, 33, seed=5)
    assert rotation_identity_residual(f, theta, check_grid(-1.5, 1.5, 0.25)) <= 1e-6


def test_gabor_of_frft_measure_matches_direct_synthesis():
    f = random_signal(0.5, 9, seed=2)
    fn = frft_of_measure(f.grid.nodes, f.masses, 0.9)
    x, w = np.array([0.2, -1.0]), np.array([0.5, 0.1])
    direct = gabor_direct(fn, x, w, h=0.002)
    np.testing.assert_allclose(gabor_of_frft_measure(f.grid.nodes, f.masses, 0.9, x, w), direct, atol=1e-10)


def test_frft_of_measure_singular():
    assert frft_of_measure([0.0], [1.0], math.pi) is None


def test_frft_profile():
    f = random_signal(0.5, 16, seed=1)
    p0 = frft_profile(f, 0.0)
    assert p0.truncation_energy == 0.0 and p0.grid.B == 4.0 and p0.grid.M == 1025
    assert frft_profile(f, math.pi / 3).truncation_energy > 0.1
    with pytest.raises(InvalidArgumentError):
        frft_profile(f, 1.0, M=513)


def test_check_grid():
    g = check_grid(-1.5, 1.5, 0.25)
    assert g.shape == (169, 2) and g.min() == -1.5 and g.max() == 1.5
