"""Fractional Fourier transform and time-frequency rotations.

The transform at angle ``theta`` (not a multiple of pi) is

    F_theta g(xi) = c_theta exp(pi i xi^2 cot) int g(t) exp(pi i t^2 cot) exp(-2 pi i t xi / sin) dt

with ``c_theta`` the square root of ``1 - i cot(theta)`` with positive real
part. ``F_{pi/2}`` is the Fourier transform, ``F_0`` the identity and
``F_pi`` the reflection.

Gabor magnitudes rotate with the transform:

    G F_theta g(x, w) = exp(pi i (x^2 - w^2) sin cos - 2 pi i x w sin^2) G g(R_theta(x, w)),

where ``R_theta(x, w) = (x cos - w sin, x sin + w cos)``. Note the rotation
acts by ``R_theta`` (not ``R_{-theta}``); :func:`rotation_identity_residual`
checks this numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidArgumentError
from .gabor import gabor_direct, gabor_of_measure, gabor_transform
from .signals import BandlimitedSignal, FrequencyGrid, make_grid

#: |sin(theta)| below this uses the exact identity / reflection branch
SINGULAR_TOL = 1e-6
#: |cos(theta)| below this uses the plain Fourier kernel
FOURIER_TOL = 1e-12

ANGLE_TOKENS = {"pi": math.pi, "pi/2": math.pi / 2, "pi/3": math.pi / 3, "pi/4": math.pi / 4, "pi/6": math.pi / 6}


def parse_angle(text: str) -> float:
    """Parse a radian literal or one of the tokens ``pi``, ``pi/2``, ``pi/3``, ``pi/4``, ``pi/6``."""
    s = text.strip().lower()
    sign = 1.0
    if s.startswith("-"):
        sign, s = -1.0, s[1:]
    if s in ANGLE_TOKENS:
        return sign * ANGLE_TOKENS[s]
    try:
        return sign * float(s)
    except ValueError as exc:
        raise InvalidArgumentError(f"cannot parse angle {text!r}") from exc


def _reduce(theta: float) -> float:
    """Representative of ``theta`` modulo 2 pi in ``(-pi, pi]``."""
    r = math.remainder(theta, 2 * math.pi)
    return math.pi if r == -math.pi else r


def sincos(theta: float) -> tuple[float, float]:
    """``(sin, cos)`` with exact values at multiples of pi/2.

    ``math.cos(pi/2)`` is 6e-17, not 0; rotated sample coordinates would pick
    up that offset and the recovery amplifies such roundoff far above it.
    """
    q = theta / (math.pi / 2)
    k = round(q)
    if abs(q - k) < 1e-13:
        return ((0.0, 1.0), (1.0, 0.0), (0.0, -1.0), (-1.0, 0.0))[k % 4]
    return math.sin(theta), math.cos(theta)


def c_theta(theta: float) -> complex:
    s, c = math.sin(theta), math.cos(theta)
    if abs(s) < SINGULAR_TOL:
        raise InvalidArgumentError("c_theta is undefined at multiples of pi")
    if abs(c) < FOURIER_TOL:
        return 1.0 + 0j
    return complex(np.sqrt(1 - 1j * c / s))


@dataclass(frozen=True)
class FrftParams:
    theta: float

    @property
    def c(self) -> complex:
        return c_theta(self.theta)


class TfPoint(NamedTuple):
    x: float
    omega: float


def rotate_point(theta: float, pt) -> TfPoint:
    x, w = pt
    s, c = sincos(theta)
    return TfPoint(x * c - w * s, x * s + w * c)


def rotate_points(theta: float, points) -> np.ndarray:
    """Apply ``R_theta`` to an ``(N, 2)`` array of ``(x, omega)`` rows."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    s, c = sincos(theta)
    return np.column_stack([pts[:, 0] * c - pts[:, 1] * s, pts[:, 0] * s + pts[:, 1] * c])


def rotate_product_set(theta: float, Omega, X) -> np.ndarray:
    """``{R_theta(omega, x)}`` as an ``(|Omega| |X|, 2)`` array, Omega-major order."""
    Om = np.asarray(Omega, dtype=float)
    X = np.asarray(X, dtype=float)
    pts = np.column_stack([np.repeat(Om, X.size), np.tile(X, Om.size)])
    return rotate_points(theta, pts)


def lemma_phase(theta: float, x, omega):
    """Unimodular factor linking ``G F_theta g(x, w)`` and ``G g(R_theta(x, w))``."""
    s, c = sincos(theta)
    x = np.asarray(x, dtype=float)
    omega = np.asarray(omega, dtype=float)
    return np.exp(1j * np.pi * (x**2 - omega**2) * s * c - 2j * np.pi * x * omega * s * s)


def frft_kernel(theta: float, t, xi) -> np.ndarray:
    """Kernel matrix ``K[k, j]`` of ``F_theta`` from times ``t[j]`` to outputs ``xi[k]``.

    Valid away from multiples of pi.
    """
    t = np.asarray(t, dtype=float)
    xi = np.asarray(xi, dtype=float)
    s, c = math.sin(theta), math.cos(theta)
    if abs(s) < SINGULAR_TOL:
        raise InvalidArgumentError("kernel is singular at multiples of pi")
    if abs(c) < FOURIER_TOL:
        return np.exp(-2j * np.pi * np.sign(s) * np.outer(xi, t))
    cot = c / s
    chirp_in = np.exp(1j * np.pi * cot * t**2)
    chirp_out = np.exp(1j * np.pi * cot * xi**2)
    return c_theta(theta) * chirp_out[:, None] * np.exp(-2j * np.pi * np.outer(xi, t) / s) * chirp_in[None, :]


def frft_apply(values, grid: FrequencyGrid, theta: float) -> np.ndarray:
    """FrFT of samples on a symmetric grid, by trapezoid quadrature (O(M^2)).

    Input and output share ``grid``. Angles within ``1e-6`` of a multiple of
    pi return the exact identity or reflection.
    """
    v = np.asarray(values, dtype=complex)
    if v.shape != (grid.M,):
        raise InvalidArgumentError(f"expected {grid.M} values, got {v.shape}")
    th = _reduce(theta)
    if abs(math.sin(th)) < SINGULAR_TOL:
        return v.copy() if math.cos(th) > 0 else v[::-1].copy()
    return frft_kernel(th, grid.nodes, grid.nodes) @ (grid.weights * v)


@dataclass(frozen=True)
class FrftProfile:
    """FrFT of a grid profile evaluated on a padded output grid."""

    theta: float
    grid: FrequencyGrid
    values: np.ndarray
    truncation_energy: float


def frft_profile(f: BandlimitedSignal, theta: float, A: float | None = None, M: int = 1025) -> FrftProfile:
    """Transform the profile of ``f`` (a measure on ``[-B, B]``) onto ``[-A, A]``.

    ``A`` defaults to ``4 max(B, 1)``. ``truncation_energy`` is the share of
    the output's energy on ``[-A, A]`` lying outside ``[-B, B]``; it measures
    how far the rotated profile spills beyond the original band.
    """
    if A is None:
        A = 4 * max(f.B, 1.0)
    if M < 1025:
        raise InvalidArgumentError("padded FrFT grid needs M >= 1025")
    out_grid = make_grid(A, M)
    th = _reduce(theta)
    s = math.sin(th)
    if abs(s) < SINGULAR_TOL:
        # measure is not representable as grid samples; interpolate onto output nodes
        src = f.grid.nodes if math.cos(th) > 0 else -f.grid.nodes[::-1]
        vals = f.values if math.cos(th) > 0 else f.values[::-1]
        values = np.interp(out_grid.nodes, src, vals.real, 0, 0) + 1j * np.interp(
            out_grid.nodes, src, vals.imag, 0, 0
        )
    else:
        values = frft_kernel(th, f.grid.nodes, out_grid.nodes) @ f.masses
    energy = out_grid.weights * np.abs(values) ** 2
    total = energy.sum()
    outside = energy[np.abs(out_grid.nodes) > f.B + 1e-12].sum()
    return FrftProfile(theta, out_grid, values, float(outside / total) if total > 0 else 0.0)


# -- FrFT of grid signals as functions of time ---------------------------------


def frft_of_measure(nodes, masses, theta: float):
    """Callable ``t -> F_theta mu (t)`` for the measure ``sum masses_j delta_{nodes_j}``.

    Returns ``None`` when ``theta`` is within ``1e-6`` of a multiple of pi,
    where the transform is itself a measure.
    """
    th = _reduce(theta)
    if abs(math.sin(th)) < SINGULAR_TOL:
        return None
    nodes = np.asarray(nodes, dtype=float)
    masses = np.asarray(masses, dtype=complex)

    def fn(t):
        t = np.asarray(t, dtype=float)
        return (frft_kernel(th, nodes, t.ravel()) @ masses).reshape(t.shape)

    return fn


def _chirp_step(theta: float, nodes, T: float) -> float:
    """Quadrature step resolving the oscillation of ``F_theta mu`` on ``[-T, T]``."""
    s, c = math.sin(theta), math.cos(theta)
    rate = abs(c / s) * T + float(np.max(np.abs(nodes))) / abs(s)
    return min(0.005, 1.0 / (8.0 * max(rate, 1e-12)))


def gabor_of_frft_measure(nodes, masses, theta: float, x, omega) -> np.ndarray:
    """``G (F_theta mu)(x, omega)`` computed without any rotation identity.

    Away from multiples of pi the transformed measure is synthesized in time
    and integrated against the window by :func:`gabor_direct`; near them the
    transform is the (reflected) measure and its Gabor transform is summed
    directly.
    """
    th = _reduce(theta)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    nodes = np.asarray(nodes, dtype=float)
    masses = np.asarray(masses, dtype=complex)
    if abs(math.sin(th)) < SINGULAR_TOL:
        if math.cos(th) > 0:
            return gabor_of_measure(nodes, masses, x, omega)
        return gabor_of_measure(-nodes, masses, x, omega)
    fn = frft_of_measure(nodes, masses, th)
    T = max(10.0, float(np.max(np.abs(x))) + 6.0)
    h = _chirp_step(th, nodes, T)
    return gabor_direct(fn, x, omega, T=T, h=h)


def rotation_identity_residual(f: BandlimitedSignal, theta: float, points) -> float:
    """Max deviation from the Gabor/FrFT rotation identity over ``points``.

    Left side: ``G(F_theta f)`` where ``F_theta f = F_{theta + pi/2} P`` is
    synthesized from the spectral masses and integrated in time. Right side:
    the phase factor times the spectral-domain :func:`gabor_transform` of
    ``f`` at the rotated point.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    lhs = gabor_of_frft_measure(f.grid.nodes, f.masses, theta + math.pi / 2, pts[:, 0], pts[:, 1])
    rot = rotate_points(theta, pts)
    rhs = lemma_phase(theta, pts[:, 0], pts[:, 1]) * gabor_transform(f, rot[:, 0], rot[:, 1])
    return float(np.max(np.abs(lhs - rhs))) if pts.size else 0.0


def check_grid(lo: float, hi: float, step: float) -> np.ndarray:
    """Square grid ``[lo, hi]^2`` with spacing ``step`` as ``(N, 2)`` points."""
    axis = np.arange(round((hi - lo) / step) + 1) * step + lo
    xx, ww = np.meshgrid(axis, axis, indexing="ij")
    return np.column_stack([xx.ravel(), ww.ravel()])
