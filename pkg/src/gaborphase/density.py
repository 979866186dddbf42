"""Uniformly discrete point sets, Beurling densities and slice inversion."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._linalg import ridge_solve
from .errors import InvalidArgumentError, MalformedInputError
from .signals import FrequencyGrid, evaluate, make_grid, random_signal


@dataclass(frozen=True)
class Arithmetic:
    """Declared lattice segment ``x0 + k dx``, ``k = 0..n-1``.

    ``one_sided`` marks a truncation of a set unbounded only to the right
    (such as the naturals); two-sided segments stand for full lattices.
    """

    x0: float
    dx: float
    n: int
    one_sided: bool = False

    def points(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.n)

    def describe(self) -> str:
        return f"{'one-sided ' if self.one_sided else ''}arithmetic({self.x0}, {self.dx}, {self.n})"


@dataclass(frozen=True)
class PointSet:
    points: np.ndarray
    pattern: Arithmetic | None = None

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float).ravel()
        if pts.size == 0:
            raise MalformedInputError("point set must be nonempty")
        if not np.all(np.isfinite(pts)):
            raise MalformedInputError("points must be finite")
        if np.any(np.diff(pts) <= 0):
            raise MalformedInputError("points must be strictly increasing")
        if self.pattern is not None and not np.array_equal(pts, self.pattern.points()):
            raise MalformedInputError("points do not match the declared pattern")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def arithmetic(cls, x0: float, dx: float, n: int, one_sided: bool = False) -> PointSet:
        if dx <= 0 or n < 1:
            raise InvalidArgumentError("arithmetic pattern needs dx > 0 and n >= 1")
        pat = Arithmetic(float(x0), float(dx), int(n), one_sided)
        return cls(pat.points(), pat)

    @classmethod
    def naturals(cls, N: int) -> PointSet:
        """``{1, ..., N}`` as a one-sided lattice segment."""
        return cls.arithmetic(1.0, 1.0, N, one_sided=True)

    def __len__(self) -> int:
        return self.points.size


def parse_lattice(text: str) -> PointSet:
    """Parse ``start:step:count`` or ``nat:N``."""
    parts = text.strip().split(":")
    try:
        if len(parts) == 2 and parts[0] == "nat":
            return PointSet.naturals(int(parts[1]))
        if len(parts) == 3:
            return PointSet.arithmetic(float(parts[0]), float(parts[1]), int(parts[2]))
    except ValueError as exc:
        raise InvalidArgumentError(f"bad lattice {text!r}: {exc}") from exc
    raise InvalidArgumentError(f"bad lattice {text!r}; expected start:step:count or nat:N")


def as_point_set(X) -> PointSet:
    return X if isinstance(X, PointSet) else PointSet(np.asarray(X, dtype=float))


def uniform_discreteness(X) -> tuple[bool, float]:
    """Whether ``X`` is uniformly discrete, with its minimal gap (inf for a singleton)."""
    Xs = as_point_set(X)
    if len(Xs) == 1:
        return True, math.inf
    gap = Xs.pattern.dx if Xs.pattern is not None else float(np.min(np.diff(Xs.points)))
    return gap > 0, gap


def _count_tolerance(pts: np.ndarray) -> float:
    return 1e-9 * (float(np.min(np.diff(pts))) if pts.size > 1 else 1.0)


def min_window_count(X, r: float) -> int:
    """``inf_t |X cap [t, t + r]|`` with ``t`` restricted to the span of ``X``."""
    pts = as_point_set(X).points
    eps = _count_tolerance(pts)
    end = pts[-1]
    best = int(np.searchsorted(pts, pts[0] + r + eps, side="right"))
    # just after p_i the window (p_i, p_i + r] is the local minimum
    starts = np.nonzero(pts < end - r - eps)[0]
    if starts.size:
        counts = np.searchsorted(pts, pts[starts] + r + eps, side="right") - (starts + 1)
        best = min(best, int(counts.min()))
    return best


def default_r_values(X) -> list[float]:
    pts = as_point_set(X).points
    span = float(pts[-1] - pts[0])
    if span <= 0:
        return [1.0]
    return [span / 2**k for k in range(4, -1, -1)]


@dataclass(frozen=True)
class DensityEstimate:
    n_lower: list[tuple[float, int]]
    lud: float
    exact: bool
    note: str


def lower_uniform_density(X, r_values=None, semi_infinite: bool = True) -> DensityEstimate:
    """Tabulate ``n(r)`` and estimate the lower uniform density.

    Declared two-sided lattices get the closed form ``1/dx``. A declared
    one-sided set with ``semi_infinite`` on lets ``t`` range over the whole
    line, so windows left of the set are empty and the density is 0. Generic
    finite sets are treated as windows of an unknown infinite set: the
    density is ``n(r_max) / r_max`` and flagged as an estimate.
    """
    Xs = as_point_set(X)
    r_values = sorted(float(r) for r in (r_values if r_values is not None else default_r_values(Xs)))
    if any(r <= 0 for r in r_values):
        raise InvalidArgumentError("r values must be positive")
    pat = Xs.pattern
    if pat is not None and pat.one_sided and semi_infinite:
        return DensityEstimate([(r, 0) for r in r_values], 0.0, True,
                               "one-sided set, windows range over the whole line")
    table = [(r, min_window_count(Xs, r)) for r in r_values]
    if pat is not None:
        return DensityEstimate(table, 1.0 / pat.dx, True, f"closed form for {pat.describe()}")
    r_max, n_max = table[-1]
    return DensityEstimate(table, n_max / r_max, False, f"windowed estimate at r={r_max:g}")


def check_sampling_condition(X, B: float, multiplier: float, semi_infinite: bool = True) -> bool:
    """``l.u.d.(X) > multiplier * B`` (2 for PW_B sampling, 4 for squared Gabor slices)."""
    return lower_uniform_density(X, semi_infinite=semi_infinite).lud > multiplier * B


def stability_estimate(X, band: float, trials: int = 20, seed: int = 0, M: int = 16) -> float:
    """Empirical sampling constant ``K`` over seeded random signals in PW_band.

    ``K`` is the largest ratio ``sup_t |f(t)| / max_{x in X} |f(x)|`` over the
    trials, with the sup taken on a fine grid spanning ``X`` (and ``X``
    itself, so that ``K >= 1``).
    """
    pts = as_point_set(X).points
    gap = float(np.min(np.diff(pts))) if pts.size > 1 else 1.0
    step = min(gap, 1.0 / band) / 8
    fine = np.concatenate([np.arange(pts[0], pts[-1], step), pts])
    K = 1.0
    for s in range(trials):
        f = random_signal(band, M, seed=seed + s)
        on_x = float(np.max(np.abs(evaluate(f, pts))))
        top = float(np.max(np.abs(evaluate(f, fine))))
        if on_x > 0:
            K = max(K, top / on_x)
    return K


@dataclass(frozen=True)
class DensityReport:
    epsilon_gap: float
    n_lower: list[tuple[float, int]]
    lud: float
    lud_exact: bool
    passes_2B: bool
    passes_4B: bool
    stability_estimate: float
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "epsilon_gap": self.epsilon_gap if math.isfinite(self.epsilon_gap) else "inf",
            "n_lower": [[r, n] for r, n in self.n_lower],
            "lud": self.lud,
            "lud_exact": self.lud_exact,
            "passes_2B": self.passes_2B,
            "passes_4B": self.passes_4B,
            "stability_estimate": self.stability_estimate,
            "note": self.note,
        }


def density_report(X, B: float, r_values=None, semi_infinite: bool = True, trials: int = 20) -> DensityReport:
    """Full density diagnostics; ``K`` is estimated for the slice band ``2B``."""
    Xs = as_point_set(X)
    _, gap = uniform_discreteness(Xs)
    est = lower_uniform_density(Xs, r_values, semi_infinite)
    K = stability_estimate(Xs, 2 * B, trials=trials) if len(Xs) > 1 else math.inf
    return DensityReport(gap, est.n_lower, est.lud, est.exact, est.lud > 2 * B, est.lud > 4 * B, K, est.note)


# -- slice inversion ----------------------------------------------------------


@dataclass(frozen=True)
class SpectralEstimate:
    """Spectral profile ``A`` of a bandlimited slice recovered from samples.

    The slice is modeled as ``q(x) = sum_j w_j A_j exp(-2 pi i xi_j x)``.
    """

    xi_grid: FrequencyGrid
    coefficients: np.ndarray
    residual: float
    condition: float
    ridge: float
    holdout_error: float | None = None
    density_warning: bool = False
    warnings: tuple[str, ...] = field(default=())

    def synthesize(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        E = np.exp(-2j * np.pi * np.multiply.outer(x, self.xi_grid.nodes))
        return E @ (self.xi_grid.weights * self.coefficients)


def _slice_matrix(x: np.ndarray, grid: FrequencyGrid) -> np.ndarray:
    return np.exp(-2j * np.pi * np.outer(x, grid.nodes)) * grid.weights


def invert_slice_samples(X, q, band: float, xi_grid_size: int, ridge: float = 1e-10, holdout: int | None = 5) -> SpectralEstimate:
    """Recover the spectral profile of a slice bandlimited to ``[-band, band]``.

    Solves ``min_A sum_i |sum_j A_j w_j exp(-2 pi i xi_j x_i) - q_i|^2 + lam ||A||^2``
    with ``lam = ridge * lambda_max`` of the normal system. With ``holdout=k``
    every k-th sample (offset k//2) is also left out of a second fit and the
    relative misfit on those samples is reported as ``holdout_error``.
    """
    Xs = as_point_set(X)
    x = Xs.points
    q = np.asarray(q, dtype=float)
    if q.shape != x.shape:
        raise MalformedInputError(f"expected {x.size} samples, got {q.shape}")
    if not np.all(np.isfinite(q)):
        raise MalformedInputError("samples must be finite")
    grid = make_grid(band, xi_grid_size)
    sol = ridge_solve(_slice_matrix(x, grid), q.astype(complex), ridge)
    warnings = []
    dense_enough = check_sampling_condition(Xs, band, 2)
    if not dense_enough:
        warnings.append(f"sampling density does not exceed {2 * band:g}")
    if x.size < xi_grid_size:
        warnings.append(f"fewer samples ({x.size}) than unknowns ({xi_grid_size})")
    holdout_error = None
    if holdout and x.size >= 2 * holdout:
        held = (np.arange(x.size) % holdout) == holdout // 2
        fit = ridge_solve(_slice_matrix(x[~held], grid), q[~held].astype(complex), ridge)
        pred = _slice_matrix(x[held], grid) @ fit.x
        qn = np.linalg.norm(q[held])
        holdout_error = 0.0 if qn == 0 else float(np.linalg.norm(pred - q[held]) / qn)
    return SpectralEstimate(grid, sol.x, sol.residual, sol.condition, ridge, holdout_error, not dense_enough, tuple(warnings))


# -- files --------------------------------------------------------------------


def write_point_set(X, path) -> None:
    pts = as_point_set(X).points
    Path(path).write_text("x\n" + "".join(f"{float(v)!r}\n" for v in pts))


def read_point_set(path) -> PointSet:
    lines = Path(path).read_text().strip().splitlines()
    if not lines or lines[0].strip() != "x":
        raise MalformedInputError(f"{path}: expected header 'x'")
    try:
        return PointSet(np.array([float(v) for v in lines[1:]]))
    except ValueError as exc:
        raise MalformedInputError(f"{path}: {exc}") from exc
