"""Bandlimited signal model on a uniform frequency grid.

A signal ``f`` is stored through its spectral profile ``P`` sampled at the
nodes of a :class:`FrequencyGrid` over ``[-B, B]``. Synthesis uses the
forward transform convention

    f(t) = sum_j w_j P_j exp(-2 pi i eta_j t),

i.e. the trapezoid rule applied to ``f = F P`` with ``F`` the Fourier
transform ``F g(xi) = int g(t) exp(-2 pi i t xi) dt``. The profile is thus
``P = F^{-1} f`` and the products ``P(eta) conj(P(eta - xi))`` that drive the
recovery appear without any sign juggling. Because every operation uses the
same quadrature weights, the grid model is an exact discrete measure
``sum_j w_j P_j delta_{eta_j}`` and all downstream identities hold to
roundoff.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import GridMismatchError, InvalidArgumentError, MalformedInputError, SupportOverflowError


@dataclass(frozen=True)
class FrequencyGrid:
    """Endpoint-inclusive uniform grid over ``[-B, B]`` with trapezoid weights.

    Parameters
    ----------
    B
        Band half-width (Hz).
    M
        Number of nodes.
    """

    B: float
    M: int
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not (np.isfinite(self.B) and self.B > 0):
            raise InvalidArgumentError(f"B must be positive, got {self.B}")
        if int(self.M) != self.M or self.M < 2:
            raise InvalidArgumentError(f"M must be an integer >= 2, got {self.M}")
        M = int(self.M)
        j = np.arange(M)
        # (2j - (M-1)) is odd-symmetric in exact integer arithmetic
        nodes = self.B * (2 * j - (M - 1)) / (M - 1)
        weights = np.full(M, self.delta)
        weights[0] = weights[-1] = self.delta / 2
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def delta(self) -> float:
        """Node spacing."""
        return 2 * self.B / (self.M - 1)

    def offset_grid(self) -> FrequencyGrid:
        """Grid over ``[-2B, 2B]`` whose nodes are the differences ``d * delta``."""
        return FrequencyGrid(2 * self.B, 2 * self.M - 1)


def make_grid(B: float, M: int) -> FrequencyGrid:
    return FrequencyGrid(B, M)


def _check_p(p) -> float:
    p = float(p)
    if not (1 <= p <= math.inf):
        raise InvalidArgumentError(f"integrability tag p must lie in [1, inf], got {p}")
    return p


@dataclass(frozen=True)
class BandlimitedSignal:
    """Spectral profile of a Paley-Wiener signal.

    ``p`` is metadata: every grid profile is bounded and therefore lies in all
    ``L^p([-B, B])`` at once. It only feeds reporting and
    :func:`gaborphase.gabor.young_exponent`.
    """

    grid: FrequencyGrid
    values: np.ndarray
    p: float = 2.0

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=complex)
        if values.shape != (self.grid.M,):
            raise MalformedInputError(f"expected {self.grid.M} profile values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise MalformedInputError("profile values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "p", _check_p(self.p))

    @property
    def B(self) -> float:
        return self.grid.B

    @property
    def M(self) -> int:
        return self.grid.M

    @property
    def masses(self) -> np.ndarray:
        """Quadrature masses ``w_j P_j`` of the underlying discrete measure."""
        return self.grid.weights * self.values

    def norm(self) -> float:
        """Grid-weighted 2-norm of the profile (equals the L2 norm of ``f``)."""
        return float(np.sqrt(np.sum(self.grid.weights * np.abs(self.values) ** 2)))

    def with_values(self, values) -> BandlimitedSignal:
        return BandlimitedSignal(self.grid, values, self.p)

    def scaled(self, c: complex) -> BandlimitedSignal:
        return self.with_values(c * self.values)

    @classmethod
    def zeros(cls, B: float, M: int, p: float = 2.0) -> BandlimitedSignal:
        return cls(make_grid(B, M), np.zeros(M, dtype=complex), p)


def evaluate(f: BandlimitedSignal, t):
    """Evaluate ``f`` at time(s) ``t`` by trapezoid quadrature of the Fourier integral."""
    t_arr = np.asarray(t, dtype=float)
    phase = np.exp(-2j * np.pi * np.multiply.outer(t_arr, f.grid.nodes))
    out = phase @ f.masses
    return complex(out) if out.ndim == 0 else out


def reflect_conjugate(values) -> np.ndarray:
    """Profile of ``f^#(t) = conj(f(-t))`` on a symmetric grid: ``conj(F[::-1])``."""
    return np.conj(np.asarray(values, dtype=complex)[::-1])


def apply_shift(f: BandlimitedSignal, x: float, omega: float, *, atol: float = 1e-9) -> BandlimitedSignal:
    """Profile of ``M_omega T_x f``.

    Translation by ``x`` multiplies the profile by ``exp(2 pi i eta x)``;
    modulation by ``omega`` moves the spectral masses from ``eta`` to
    ``eta - omega``. ``omega`` must be an integer multiple of the node spacing
    and the moved masses must stay on the grid; pad the signal first with
    :func:`pad` when more room is needed.
    """
    delta = f.grid.delta
    k_float = omega / delta
    k = int(round(k_float))
    if abs(k_float - k) > atol:
        raise InvalidArgumentError(f"omega={omega} is not a multiple of the grid spacing {delta}")
    phase = np.exp(2j * np.pi * f.grid.nodes * x)
    if k == 0:
        return f.with_values(f.values * phase)
    masses = f.masses * phase
    shifted = np.zeros_like(masses)
    M = f.M
    # mass at node j moves to node j - k
    src = np.arange(M)
    dst = src - k
    inside = (dst >= 0) & (dst < M)
    if np.any(masses[~inside] != 0):
        raise SupportOverflowError(f"modulation by {omega} moves spectral mass outside [-{f.B}, {f.B}]")
    shifted[dst[inside]] = masses[src[inside]]
    return f.with_values(shifted / f.grid.weights)


def pad(f: BandlimitedSignal, extra: int) -> BandlimitedSignal:
    """Embed ``f`` into a wider grid with the same spacing (``extra`` nodes per side).

    Masses are preserved, so the embedded signal is the same function of time.
    """
    if extra < 0:
        raise InvalidArgumentError("extra must be nonnegative")
    grid = make_grid(f.B + extra * f.grid.delta, f.M + 2 * extra)
    masses = np.zeros(grid.M, dtype=complex)
    masses[extra : extra + f.M] = f.masses
    return BandlimitedSignal(grid, masses / grid.weights, f.p)


@dataclass(frozen=True)
class PhaseAlignment:
    """Optimal global phase ``alpha`` with ``g ~ exp(i alpha) f`` and the residual distance."""

    alpha: float
    distance: float


def inner(f: BandlimitedSignal, g: BandlimitedSignal) -> complex:
    """Grid-weighted inner product ``<F_f, F_g>`` (linear in the first slot)."""
    _same_grid(f, g)
    return complex(np.sum(f.grid.weights * f.values * np.conj(g.values)))


def _same_grid(f: BandlimitedSignal, g: BandlimitedSignal) -> None:
    if f.grid != g.grid:
        raise GridMismatchError(f"grids differ: {f.grid} vs {g.grid}")


def global_phase_distance(f: BandlimitedSignal, g: BandlimitedSignal) -> PhaseAlignment:
    """Distance between ``f`` and ``g`` modulo a global phase factor.

    ``alpha`` in ``(-pi, pi]`` minimizes ``||exp(i alpha) F_f - F_g||`` so that
    ``g = exp(i alpha) f`` is recovered as ``alpha``. Orthogonal profiles get
    ``alpha = 0``.
    """
    _same_grid(f, g)
    ip = inner(g, f)
    alpha = 0.0 if ip == 0 else float(np.angle(ip))
    if alpha <= -np.pi:
        alpha = float(np.pi)
    diff = np.exp(1j * alpha) * f.values - g.values
    distance = float(np.sqrt(np.sum(f.grid.weights * np.abs(diff) ** 2)))
    return PhaseAlignment(alpha, distance)


def random_signal(B: float, M: int, p: float = 2.0, seed: int = 0) -> BandlimitedSignal:
    """Seeded complex Gaussian profile normalized to unit grid-weighted 2-norm."""
    grid = make_grid(B, M)
    rng = np.random.default_rng(seed)
    values = rng.standard_normal(grid.M) + 1j * rng.standard_normal(grid.M)
    values /= np.sqrt(np.sum(grid.weights * np.abs(values) ** 2))
    return BandlimitedSignal(grid, values, p)


# -- JSON file format ------------------------------------------------------


def signal_to_dict(f: BandlimitedSignal) -> dict:
    return {
        "B": f.B,
        "M": f.M,
        "p": "inf" if math.isinf(f.p) else f.p,
        "F_re": [float(v) for v in f.values.real],
        "F_im": [float(v) for v in f.values.imag],
    }


def signal_from_dict(data: dict) -> BandlimitedSignal:
    try:
        B = float(data["B"])
        M = int(data["M"])
        p = math.inf if data.get("p", 2.0) == "inf" else float(data.get("p", 2.0))
        re = np.asarray(data["F_re"], dtype=float)
        im = np.asarray(data["F_im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInputError(f"bad signal record: {exc}") from exc
    if re.shape != (M,) or im.shape != (M,):
        raise MalformedInputError(f"F_re/F_im must both have length M={M}")
    return BandlimitedSignal(make_grid(B, M), re + 1j * im, p)


def write_signal(f: BandlimitedSignal, path) -> None:
    Path(path).write_text(json.dumps(signal_to_dict(f), indent=1) + "\n")


def read_signal(path) -> BandlimitedSignal:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise MalformedInputError(f"{path}: not valid JSON ({exc})") from exc
    return signal_from_dict(data)
