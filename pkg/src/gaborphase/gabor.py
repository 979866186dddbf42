"""Gabor transform with the normalized Gaussian window.

For a grid signal the transform is evaluated in the spectral domain,

    G f(x, omega) = exp(-2 pi i x omega) * sum_j w_j F_omega(eta_j) exp(-2 pi i eta_j x),

with the slice profile ``F_omega = P * phi(. + omega)``. :func:`gabor_direct`
integrates the defining time-domain integral instead and serves as an
independent check.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal.windows import dpss

from .errors import InvalidArgumentError, MalformedInputError
from .signals import BandlimitedSignal, FrequencyGrid

WINDOW_NORM = 2**0.25


def gaussian_window(t):
    """``phi(t) = 2^(1/4) exp(-pi t^2)``, unit L2 norm."""
    return WINDOW_NORM * np.exp(-np.pi * np.square(t))


@dataclass(frozen=True)
class SliceProfile:
    grid: FrequencyGrid
    omega: float
    values: np.ndarray


@dataclass(frozen=True)
class ProductSamples:
    """Gabor magnitudes ``m[i, k] = |G f(X[i], Omega[k])|`` on a product set."""

    X: np.ndarray
    Omega: np.ndarray
    magnitudes: np.ndarray
    B: float

    def __post_init__(self) -> None:
        X = np.asarray(self.X, dtype=float)
        Om = np.asarray(self.Omega, dtype=float)
        m = np.asarray(self.magnitudes, dtype=float)
        for name, arr in (("X", X), ("Omega", Om)):
            if arr.ndim != 1 or arr.size == 0:
                raise MalformedInputError(f"{name} must be a nonempty 1-d sequence")
            if not np.all(np.isfinite(arr)) or np.any(np.diff(arr) <= 0):
                raise MalformedInputError(f"{name} must be finite and strictly increasing")
        if m.shape != (X.size, Om.size):
            raise MalformedInputError(f"magnitudes must have shape {(X.size, Om.size)}, got {m.shape}")
        if not np.all(np.isfinite(m)) or np.any(m < 0):
            raise MalformedInputError("magnitudes must be finite and nonnegative")
        if not self.B > 0:
            raise MalformedInputError("B must be positive")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Omega", Om)
        object.__setattr__(self, "magnitudes", m)

    def scaled(self, c: float) -> ProductSamples:
        return ProductSamples(self.X, self.Omega, c * self.magnitudes, self.B)


def slice_profile(f: BandlimitedSignal, omega: float) -> SliceProfile:
    return SliceProfile(f.grid, float(omega), f.values * gaussian_window(f.grid.nodes + omega))


def gabor_transform(f: BandlimitedSignal, x, omega):
    """Gabor transform of ``f`` at broadcast-compatible arrays ``x`` and ``omega``."""
    x = np.asarray(x, dtype=float)
    omega = np.asarray(omega, dtype=float)
    x, omega = np.broadcast_arrays(x, omega)
    eta = f.grid.nodes
    win = gaussian_window(omega[..., None] + eta)
    osc = np.exp(-2j * np.pi * x[..., None] * eta)
    out = np.exp(-2j * np.pi * x * omega) * np.sum(f.masses * win * osc, axis=-1)
    return complex(out) if out.ndim == 0 else out


def gabor_matrix(f: BandlimitedSignal, X, Omega) -> np.ndarray:
    """``|X| x |Omega|`` matrix of Gabor coefficients."""
    X = np.asarray(X, dtype=float)
    Omega = np.asarray(Omega, dtype=float)
    return gabor_transform(f, X[:, None], Omega[None, :])


def magnitude_samples(f: BandlimitedSignal, X, Omega) -> ProductSamples:
    return ProductSamples(X, Omega, np.abs(gabor_matrix(f, X, Omega)), f.B)


def gabor_direct(f_time, x, omega, T=None, h=0.005):
    """Trapezoid quadrature of the defining Gabor integral over ``[-T, T]``.

    ``f_time`` is any vectorized callable of time. ``x`` and ``omega`` may be
    arrays of equal shape; ``f_time`` is then evaluated once on a shared grid.
    ``T`` defaults to ``max(10, max|x| + 6)``.
    """
    x = np.asarray(x, dtype=float)
    omega = np.asarray(omega, dtype=float)
    x, omega = np.broadcast_arrays(x, omega)
    xmax = float(np.max(np.abs(x))) if x.size else 0.0
    if T is None:
        T = max(10.0, xmax + 6.0)
    if T < xmax + 6 - 1e-12:
        raise InvalidArgumentError(f"truncation T={T} must be >= |x| + 6 = {xmax + 6}")
    if h > 0.01:
        raise InvalidArgumentError(f"step h={h} must be <= 0.01")
    n = int(math.ceil(2 * T / h))
    t = np.linspace(-T, T, n + 1)
    step = t[1] - t[0]
    w = np.full(t.size, step)
    w[0] = w[-1] = step / 2
    ft = np.asarray(f_time(t), dtype=complex) * w
    flat_x, flat_om = x.ravel(), omega.ravel()
    out = np.empty(flat_x.size, dtype=complex)
    for k in range(flat_x.size):
        # only the window support |t - x| < 6 contributes above 1e-49
        lo = np.searchsorted(t, flat_x[k] - 6.0)
        hi = np.searchsorted(t, flat_x[k] + 6.0, side="right")
        tt = t[lo:hi]
        kern = np.exp(-np.pi * (tt - flat_x[k]) ** 2 - 2j * np.pi * tt * flat_om[k])
        out[k] = WINDOW_NORM * np.dot(ft[lo:hi], kern)
    out = out.reshape(x.shape)
    return complex(out) if out.ndim == 0 else out


def gabor_of_measure(nodes, masses, x, omega):
    """Gabor transform of the discrete measure ``sum_j masses_j delta_{nodes_j}``."""
    x = np.asarray(x, dtype=float)
    omega = np.asarray(omega, dtype=float)
    x, omega = np.broadcast_arrays(x, omega)
    nodes = np.asarray(nodes, dtype=float)
    kern = gaussian_window(nodes - x[..., None]) * np.exp(-2j * np.pi * nodes * omega[..., None])
    out = np.sum(np.asarray(masses) * kern, axis=-1)
    return complex(out) if out.ndim == 0 else out


def gaussian_gabor_closed_form(x, omega):
    """``G phi(x, omega) = exp(-pi (x^2 + omega^2) / 2) exp(-pi i x omega)``."""
    x = np.asarray(x, dtype=float)
    omega = np.asarray(omega, dtype=float)
    return np.exp(-np.pi * (x**2 + omega**2) / 2 - 1j * np.pi * x * omega)


def slice_autocorrelation(f: BandlimitedSignal, omega: float) -> np.ndarray:
    """Autocorrelation ``F_omega * F_omega^#`` on the offset grid ``d * delta``.

    Returned as values ``A_d`` on :meth:`FrequencyGrid.offset_grid`, normalized
    so that ``|G f(x, omega)|^2 = sum_d w'_d A_d exp(-2 pi i d delta x)`` with
    ``w'`` the offset-grid weights.
    """
    masses = f.masses * gaussian_window(f.grid.nodes + omega)
    corr = np.convolve(masses, np.conj(masses[::-1]))
    return corr / f.grid.offset_grid().weights


@dataclass(frozen=True)
class ExponentPair:
    p: float
    q: float


def young_exponent(p: float) -> ExponentPair:
    """Exponent ``q`` with ``1 + 1/q = 2/p`` for the squared-magnitude slice.

    The relation has no solution ``q >= 1`` once ``p > 2``; there ``p`` is
    clamped to 2 (``L^p([-B, B])`` is contained in ``L^2([-B, B])``), giving
    ``q = inf``.
    """
    p = float(p)
    if not 1 <= p <= math.inf:
        raise InvalidArgumentError(f"p must lie in [1, inf], got {p}")
    p_eff = min(p, 2.0)
    inv_q = 2.0 / p_eff - 1.0
    q = math.inf if inv_q <= 0 else 1.0 / inv_q
    return ExponentPair(p, q)


def band_energy_ratio(
    f: BandlimitedSignal,
    omega: float,
    T: float | None = None,
    h: float | None = None,
    *,
    squared: bool = False,
    nw: float = 3.0,
    tol_bins: float = 3.0,
) -> float:
    """Fraction of spectral energy of a Gabor slice outside its nominal band.

    The demodulated slice ``x -> exp(2 pi i x omega) G f(x, omega)`` should be
    bandlimited to ``[-B, B]``; with ``squared=True`` the slice
    ``x -> |G f(x, omega)|^2`` is checked against ``[-2B, 2B]``. Samples on
    ``[-T, T)`` are tapered by a DPSS window of time-bandwidth ``nw`` and the
    band edge is widened by ``tol_bins`` natural bins ``1/(2T)`` to absorb
    the taper's main lobe.
    """
    B = f.B
    if T is None:
        T = 20.0 / B
    if h is None:
        h = 1.0 / (8.0 * B)
    if T < 20.0 / B - 1e-12 or h > 1.0 / (8.0 * B) + 1e-15:
        raise InvalidArgumentError("need T >= 20/B and h <= 1/(8B)")
    if not np.any(f.values):
        return 0.0
    x = np.arange(-T, T, h)
    n = x.size
    s = np.exp(2j * np.pi * x * omega) * gabor_transform(f, x, omega)
    band = B
    if squared:
        s = np.abs(s) ** 2
        band = 2 * B
    taper = dpss(n, nw)
    spec = np.fft.fft(s * taper, 4 * n)
    nu = np.fft.fftfreq(4 * n, h)
    energy = np.abs(spec) ** 2
    edge = band + tol_bins / (n * h)
    total = energy.sum()
    return float(energy[np.abs(nu) > edge].sum() / total) if total > 0 else 0.0


# -- measurement files -------------------------------------------------------


def format_decimal(v: float) -> str:
    """Positional decimal with 17 significant digits (round-trips exactly)."""
    return np.format_float_positional(float(v), precision=17, unique=False, fractional=False, trim="k")


def write_measurements(samples: ProductSamples, path) -> None:
    lines = ["x,omega,magnitude"]
    for i, x in enumerate(samples.X):
        for k, om in enumerate(samples.Omega):
            lines.append(f"{format_decimal(x)},{format_decimal(om)},{format_decimal(samples.magnitudes[i, k])}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_measurement_rows(path) -> np.ndarray:
    """Rows ``(x, omega, magnitude)`` of a measurements CSV as an ``(N, 3)`` array."""
    text = Path(path).read_text().strip().splitlines()
    if not text or text[0].replace(" ", "") != "x,omega,magnitude":
        raise MalformedInputError(f"{path}: expected header 'x,omega,magnitude'")
    try:
        rows = np.array([[float(v) for v in line.split(",")] for line in text[1:]], dtype=float)
    except ValueError as exc:
        raise MalformedInputError(f"{path}: {exc}") from exc
    if rows.ndim != 2 or rows.shape[1] != 3 or rows.shape[0] == 0:
        raise MalformedInputError(f"{path}: expected rows of three numbers")
    return rows


def samples_from_rows(rows: np.ndarray, B: float) -> ProductSamples:
    """Rebuild a product-set measurement matrix from CSV rows sorted by (x, omega)."""
    X = np.unique(rows[:, 0])
    Om = np.unique(rows[:, 1])
    if rows.shape[0] != X.size * Om.size:
        raise MalformedInputError("measurement rows do not form a complete product set")
    order = np.lexsort((rows[:, 1], rows[:, 0]))
    if not np.array_equal(order, np.arange(rows.shape[0])):
        raise MalformedInputError("measurement rows must be sorted by (x, omega)")
    mags = rows[:, 2].reshape(X.size, Om.size)
    if not (np.array_equal(rows[:, 0].reshape(X.size, Om.size)[:, 0], X)
            and np.array_equal(rows[:, 1].reshape(X.size, Om.size)[0], Om)):
        raise MalformedInputError("measurement rows do not form a complete product set")
    return ProductSamples(X, Om, mags, B)


def write_spectrogram_pgm(samples: ProductSamples, path, sidecar=None) -> None:
    """8-bit binary PGM: rows are omega descending, columns x ascending.

    The linear scale maximum is written to ``sidecar`` (default: ``path`` with
    a ``.json`` suffix).
    """
    mags = samples.magnitudes.T[::-1]  # (omega descending, x ascending)
    vmax = float(mags.max()) if mags.size else 0.0
    img = np.zeros(mags.shape, dtype=np.uint8) if vmax == 0 else np.rint(255 * mags / vmax).astype(np.uint8)
    height, width = img.shape
    Path(path).write_bytes(f"P5\n{width} {height}\n255\n".encode() + img.tobytes())
    sidecar = Path(sidecar) if sidecar is not None else Path(path).with_suffix(".json")
    meta = {
        "max": vmax,
        "width": width,
        "height": height,
        "x": [float(v) for v in samples.X],
        "omega_descending": [float(v) for v in samples.Omega[::-1]],
    }
    sidecar.write_text(json.dumps(meta, indent=1) + "\n")
