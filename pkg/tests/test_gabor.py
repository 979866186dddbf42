import math

import numpy as np
import pytest

from gaborphase.errors import InvalidArgumentError, MalformedInputError
from gaborphase.gabor import (
    ProductSamples,
    band_energy_ratio,
    gabor_direct,
    gabor_matrix,
    gabor_of_measure,
    gabor_transform,
    gaussian_gabor_closed_form,
    gaussian_window,
    magnitude_samples,
    read_measurement_rows,
    samples_from_rows,
    slice_autocorrelation,
    slice_profile,
    write_measurements,
    write_spectrogram_pgm,
    young_exponent,
)
from gaborphase.signals import BandlimitedSignal, apply_shift, evaluate, make_grid, pad, random_signal


def test_window_unit_norm():
    t = np.linspace(-8, 8, 16001)
    assert abs(np.trapezoid(gaussian_window(t) ** 2, t) - 1) < 1e-12


def test_direct_gaussian_at_one_one():
    assert abs(abs(gabor_direct(gaussian_window, 1.0, 1.0)) - math.exp(-math.pi)) < 1e-7


def test_direct_gaussian_origin():
    assert abs(gabor_direct(gaussian_window, 0.0, 0.0) - 1) < 1e-9


def test_direct_gaussian_matches_closed_form_with_phase():
    x = np.array([-1.5, 0.3, 2.0])
    w = np.array([0.7, -1.2, 0.4])
    np.testing.assert_allclose(gabor_direct(gaussian_window, x, w), gaussian_gabor_closed_form(x, w), atol=1e-10)


def test_direct_zero_function():
    assert gabor_direct(lambda t: np.zeros_like(t), 0.5, 0.5) == 0


def test_direct_parameter_checks():
    with pytest.raises(InvalidArgumentError):
        gabor_direct(gaussian_window, 5.0, 0.0, T=10)
    with pytest.raises(InvalidArgumentError):
        gabor_direct(gaussian_window, 0.0, 0.0, h=0.02)


def test_zero_signal_transform():
    f = BandlimitedSignal.zeros(0.5, 8)
    assert np.all(gabor_matrix(f, [0, 1], [0, 1]) == 0)


def test_spectral_matches_direct_sinc():
    f = BandlimitedSignal(make_grid(0.5, 257), np.ones(257))
    ax = np.linspace(-2, 2, 9)
    xx, ww = np.meshgrid(ax, ax, indexing="ij")
    direct = gabor_direct(lambda t: evaluate(f, t), xx, ww)
    assert np.max(np.abs(gabor_transform(f, xx, ww) - direct)) <= 1e-8


def test_spectral_matches_measure_sum():
    f = random_signal(0.5, 16, seed=8)
    x, w = np.array([0.3, -2.0]), np.array([0.1, 0.9])
    # f is the Fourier synthesis of the measure mu; G f(x, w) = exp(-2 pi i x w) G mu(-w, x)
    expected = np.exp(-2j * np.pi * x * w) * gabor_of_measure(f.grid.nodes, f.masses, -w, x)
    np.testing.assert_allclose(gabor_transform(f, x, w), expected, atol=1e-14)


def test_real_signal_symmetry():
    g = make_grid(0.5, 17)
    rng = np.random.default_rng(0)
    half = rng.standard_normal(9) + 1j * rng.standard_normal(9)
    P = np.concatenate([np.conj(half[:0:-1]), half])
    P[8] = P[8].real
    f = BandlimitedSignal(g, P)
    assert np.max(np.abs(evaluate(f, np.linspace(-3, 3, 11)).imag)) < 1e-14
    x = np.linspace(-2, 2, 9)[:, None]
    w = np.linspace(0, 1.5, 7)[None, :]
    np.testing.assert_allclose(np.abs(gabor_transform(f, x, -w)), np.abs(gabor_transform(f, x, w)), atol=1e-10)


def test_slice_profile_examples():
    g = make_grid(0.5, 9)
    f = BandlimitedSignal(g, np.ones(9))
    np.testing.assert_allclose(slice_profile(f, 0.0).values, gaussian_window(g.nodes))
    assert np.max(np.abs(slice_profile(f, 20.0).values)) <= 2**0.25 * math.exp(-math.pi * 19.5**2)
    h = random_signal(0.5, 9, seed=2)
    assert np.all(np.abs(slice_profile(h, 0.3).values) <= 2**0.25 * np.abs(h.values))


def test_magnitudes_zero_and_phase_invariance():
    X, Om = np.linspace(-3, 3, 7), np.linspace(-1, 1, 5)
    assert np.all(magnitude_samples(BandlimitedSignal.zeros(0.5, 16), X, Om).magnitudes == 0)
    f = random_signal(0.5, 16, seed=4)
    m = magnitude_samples(f, X, Om).magnitudes
    # a sign flip is exact in floating point; other phases agree to roundoff
    assert np.array_equal(magnitude_samples(f.scaled(-1), X, Om).magnitudes, m)
    for c in (1j, np.exp(0.7j)):
        np.testing.assert_allclose(magnitude_samples(f.scaled(c), X, Om).magnitudes, m, rtol=1e-13)


def test_magnitudes_discriminate(X_fixture, Omega_fixture):
    m1 = magnitude_samples(random_signal(0.5, 16, seed=1), X_fixture.points, Omega_fixture).magnitudes
    m2 = magnitude_samples(random_signal(0.5, 16, seed=2), X_fixture.points, Omega_fixture).magnitudes
    assert np.max(np.abs(m1 - m2)) > 1e-3


def test_shift_covariance():
    f = pad(random_signal(0.5, 11, seed=6), 3)
    x0, k = 0.8, 2
    w0 = k * f.grid.delta
    g = apply_shift(f, x0, w0)
    x = np.linspace(-2, 2, 5)[:, None]
    w = np.linspace(-1, 1, 5)[None, :]
    np.testing.assert_allclose(np.abs(gabor_transform(g, x, w)), np.abs(gabor_transform(f, x - x0, w - w0)), atol=1e-9)


def test_slice_autocorrelation_explicit_sum():
    f = random_signal(0.5, 7, seed=3)
    om = 0.25
    m = f.masses * gaussian_window(f.grid.nodes + om)
    M = f.M
    c = np.zeros(2 * M - 1, complex)
    for d in range(-(M - 1), M):
        for j in range(M):
            if 0 <= j - d < M:
                c[d + M - 1] += m[j] * np.conj(m[j - d])
    A = slice_autocorrelation(f, om)
    np.testing.assert_allclose(A * f.grid.offset_grid().weights, c, atol=1e-15)
    # and it synthesizes the squared slice
    og = f.grid.offset_grid()
    x = np.linspace(-4, 4, 9)
    q = np.exp(-2j * np.pi * np.outer(x, og.nodes)) @ (og.weights * A)
    np.testing.assert_allclose(q.real, np.abs(gabor_transform(f, x, om)) ** 2, atol=1e-15)


@pytest.mark.parametrize("p,q", [(1, 1), (2, math.inf), (4 / 3, 2), (3, math.inf), (math.inf, math.inf)])
def test_young_exponent(p, q):
    assert young_exponent(p).q == pytest.approx(q)


def test_young_rejects():
    with pytest.raises(InvalidArgumentError):
        young_exponent(0.5)


def test_band_energy_ratio():
    f = random_signal(0.5, 16, seed=3)
    assert band_energy_ratio(f, 0.25) < 1e-6
    assert band_energy_ratio(f, 0.25, squared=True) < 1e-6
    assert band_energy_ratio(BandlimitedSignal.zeros(0.5, 16), 0.25) == 0.0


def test_band_energy_ratio_detects_wider_band():
    # a signal of band 1 analysed against band 0.5 leaks heavily
    wide = random_signal(1.0, 31, seed=3)
    narrow_grid = BandlimitedSignal(make_grid(0.5, 31), wide.values)
    assert band_energy_ratio(narrow_grid, 0.0) < 1e-6
    big = band_energy_ratio(wide, 0.0, T=40, h=0.125)
    assert big < 1e-6
    # wrong declared band: compare the wide signal with a half-band edge
    x = np.arange(-40, 40, 0.125)
    s = gabor_transform(wide, x, 0.0)
    nu = np.fft.fftfreq(x.size, 0.125)
    e = np.abs(np.fft.fft(s)) ** 2
    assert e[np.abs(nu) > 0.6].sum() / e.sum() > 0.01


def test_band_energy_ratio_params():
    f = random_signal(0.5, 16, seed=3)
    with pytest.raises(InvalidArgumentError):
        band_energy_ratio(f, 0.0, T=10)
    with pytest.raises(InvalidArgumentError):
        band_energy_ratio(f, 0.0, h=0.5)


def test_product_samples_validation():
    with pytest.raises(MalformedInputError):
        ProductSamples([0, 0], [0], np.zeros((2, 1)), 0.5)
    with pytest.raises(MalformedInputError):
        ProductSamples([0, 1], [0], np.zeros((1, 2)), 0.5)
    with pytest.raises(MalformedInputError):
        ProductSamples([0, 1], [0], -np.ones((2, 1)), 0.5)


def test_measurement_roundtrip(tmp_path):
    f = random_signal(0.5, 16, seed=1)
    s = magnitude_samples(f, np.linspace(-1, 1, 5), np.linspace(-0.5, 0.5, 3))
    write_measurements(s, tmp_path / "m.csv")
    text = (tmp_path / "m.csv").read_text().splitlines()
    assert text[0] == "x,omega,magnitude" and len(text) == 16
    t = samples_from_rows(read_measurement_rows(tmp_path / "m.csv"), 0.5)
    assert np.array_equal(t.magnitudes, s.magnitudes)
    assert np.array_equal(t.X, s.X) and np.array_equal(t.Omega, s.Omega)


def test_measurement_rows_rejected(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("x,omega,magnitude\n0,1,0.5\n0,0,0.5\n")
    with pytest.raises(MalformedInputError):
        samples_from_rows(read_measurement_rows(p), 0.5)
    p.write_text("x,omega,magnitude\n0,0,0.5\n0,1,0.5\n1,0,0.5\n")
    with pytest.raises(MalformedInputError):
        samples_from_rows(read_measurement_rows(p), 0.5)
    p.write_text("a,b\n1,2\n")
    with pytest.raises(MalformedInputError):
        read_measurement_rows(p)


def test_pgm_export(tmp_path):
    f = random_signal(0.5, 16, seed=1)
    s = magnitude_samples(f, np.linspace(-2, 2, 6), np.linspace(-1, 1, 4))
    write_spectrogram_pgm(s, tmp_path / "s.pgm")
    data = (tmp_path / "s.pgm").read_bytes()
    assert data.startswith(b"P5\n6 4\n255\n")
    img = np.frombuffer(data[len(b"P5\n6 4\n255\n"):], dtype=np.uint8).reshape(4, 6)
    assert img.max() == 255
    # first row is the largest omega
    expected = np.rint(255 * s.magnitudes[:, -1] / s.magnitudes.max())
    np.testing.assert_array_equal(img[0], expected)
    assert (tmp_path / "s.json").exists()
