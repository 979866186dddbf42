"""Recovery of a bandlimited signal, up to global phase, from Gabor magnitudes.

The pipeline has three stages.

1. For every frequency ``omega`` the squared slice ``x -> |G f(x, omega)|^2``
   is bandlimited to ``[-2B, 2B]``; its spectral profile ``A_omega`` is
   recovered on the offset grid ``xi_d = d * delta`` by
   :func:`gaborphase.density.invert_slice_samples`.
2. For every offset ``d`` the values ``A_omega(xi_d)`` over all ``omega`` are
   Gaussian-dictionary moments of the correlation
   ``R_d[j] = P_j conj(P_{j-d})``:

       w'_d A_omega(xi) = sqrt(2) exp(-pi xi^2 / 2)
                          * sum_j w_j w_{j-d} R_d[j] exp(-2 pi (eta_j + omega - xi/2)^2),

   a linear system with centers ``xi/2 - omega`` solved by ridge least
   squares.
3. The Gram matrix ``K[j, j'] = R_{j-j'}[j] = P_j conj(P_j')`` is rank one;
   its leading eigenvector is the profile up to a unimodular factor.

Only offsets ``d >= 0`` are solved. The ``-d`` system is the complex
conjugate of the ``d`` system, so its solution is mirrored, which keeps the
field Hermitian to roundoff.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._linalg import ridge_solve
from .density import PointSet, SpectralEstimate, check_sampling_condition, invert_slice_samples
from .errors import DegenerateFieldError, InvalidArgumentError, MalformedInputError
from .frft import frft_of_measure, rotate_product_set
from .gabor import ProductSamples, gabor_matrix
from .signals import BandlimitedSignal, FrequencyGrid, PhaseAlignment, global_phase_distance, make_grid

DEFAULT_RIDGE1 = 1e-10
DEFAULT_RIDGE2 = 1e-28
POWER_TOL = 1e-12


def _map(fn, items, workers):
    # results come back in input order whatever the worker count
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(it) for it in items]


# -- stage 1 ------------------------------------------------------------------


def recover_autocorrelations(
    samples: ProductSamples, B: float, ridge1: float = DEFAULT_RIDGE1, M: int = 16, *, X=None, workers: int | None = None
) -> dict[float, SpectralEstimate]:
    """Spectral profiles ``A_omega`` of the squared slices, keyed by ``omega``.

    The xi-grid has ``2M - 1`` nodes over ``[-2B, 2B]``, so its spacing equals
    the spacing of the ``M``-node eta-grid. ``X`` may pass a declared
    :class:`PointSet` (with its lattice pattern) for the density check.
    """
    Xs = X if isinstance(X, PointSet) else PointSet(samples.X)
    if not np.array_equal(Xs.points, samples.X):
        raise MalformedInputError("declared X does not match the sample positions")
    q = samples.magnitudes**2

    def one(k):
        return invert_slice_samples(Xs, q[:, k], 2 * B, 2 * M - 1, ridge=ridge1)

    return dict(zip((float(w) for w in samples.Omega), _map(one, range(samples.Omega.size), workers)))


# -- stage 2 ------------------------------------------------------------------


@dataclass(frozen=True)
class CorrelationField:
    """``values[d + M - 1, j] = R_d[j] ~ P_j conj(P_{j-d})``, zero where ``j - d`` is off-grid."""

    eta_grid: FrequencyGrid
    values: np.ndarray
    residuals: tuple[float, ...] = ()
    conditions: tuple[float, ...] = ()

    @property
    def M(self) -> int:
        return self.eta_grid.M

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(-(self.M - 1), self.M)

    def slice(self, d: int) -> np.ndarray:
        return self.values[d + self.M - 1]

    def hermitian_defect(self) -> float:
        """Max relative violation of ``R_{-d}[j] = conj(R_d[j + d])``."""
        M = self.M
        top = float(np.max(np.abs(self.values))) if self.values.size else 0.0
        if top == 0:
            return 0.0
        worst = 0.0
        for d in range(1, M):
            a = self.slice(-d)[: M - d]
            b = np.conj(self.slice(d)[d:])
            worst = max(worst, float(np.max(np.abs(a - b))))
        return worst / top


def gram_matrix(field: CorrelationField) -> np.ndarray:
    """``K[j, j'] = R_{j - j'}[j]``, symmetrized by averaging with ``K^H``."""
    M = field.M
    j = np.arange(M)
    K = field.values[(j[:, None] - j[None, :]) + M - 1, j[:, None]]
    return (K + K.conj().T) / 2


def correlation_system(grid: FrequencyGrid, Omega, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Matrix ``G[k, i]`` mapping ``R_d[js[i]]`` to ``w'_d A_{omega_k}(d delta)``, and ``js``."""
    Om = np.asarray(Omega, dtype=float)
    M = grid.M
    js = np.arange(max(0, d), min(M, M + d))
    xi = d * grid.delta
    eta, w = grid.nodes, grid.weights
    G = (
        math.sqrt(2)
        * math.exp(-math.pi * xi**2 / 2)
        * np.exp(-2 * math.pi * (eta[js][None, :] + Om[:, None] - xi / 2) ** 2)
        * (w[js] * w[js - d])[None, :]
    )
    return G, js


def recover_correlation_field(
    A: dict[float, SpectralEstimate], Omega, B: float, ridge2: float = DEFAULT_RIDGE2, M: int | None = None,
    *, workers: int | None = None,
) -> CorrelationField:
    """Solve the per-offset Gaussian-dictionary systems for the correlation field.

    Dictionary columns are normalized before the ridge solve; ``ridge2`` is
    relative to the top eigenvalue of the normalized normal system.
    """
    Om = np.asarray(Omega, dtype=float)
    if Om.size == 0:
        raise InvalidArgumentError("Omega must be nonempty")
    ests = [A[float(w)] for w in Om]
    if M is None:
        M = (ests[0].xi_grid.M + 1) // 2
    grid = make_grid(B, M)
    xi_w = grid.offset_grid().weights
    # c[k, d + M - 1] = w'_d A_k(xi_d), the Fourier coefficients of the squared slice
    c = np.array([e.coefficients for e in ests]) * xi_w
    if c.shape[1] != 2 * M - 1:
        raise InvalidArgumentError(f"spectral estimates have {c.shape[1]} nodes, expected {2 * M - 1}")

    def one(d):
        G, js = correlation_system(grid, Om, d)
        b = (c[:, M - 1 + d] + np.conj(c[:, M - 1 - d])) / 2
        if d == 0:
            b = b.real
        scale = np.linalg.norm(G, axis=0)
        scale[scale == 0] = 1.0
        sol = ridge_solve(G / scale, b, ridge2)
        u = sol.x / scale
        if d == 0:
            u = u.real
        return js, u, sol.residual, sol.condition

    results = _map(one, range(M), workers)
    values = np.zeros((2 * M - 1, M), dtype=complex)
    residuals, conditions = [], []
    for d, (js, u, res, cond) in enumerate(results):
        values[M - 1 + d, js] = u
        if d > 0:
            values[M - 1 - d, js - d] = np.conj(u)
        residuals.append(res)
        conditions.append(cond)
    return CorrelationField(grid, values, tuple(residuals), tuple(conditions))


# -- stage 3 ------------------------------------------------------------------


@dataclass(frozen=True)
class RankOneResult:
    profile: np.ndarray
    rank_ratio: float
    anchor_index: int
    eigenvalues: np.ndarray
    iterations: int
    converged: bool
    anchor_column_distance: float


def rank_one_extract(field: CorrelationField | np.ndarray, weights=None) -> RankOneResult:
    """Leading eigenvector of the Gram matrix, scaled and phase-anchored.

    Accepts a :class:`CorrelationField` or a Gram matrix directly (then
    ``weights`` defaults to ones). Power iteration starts from the anchor
    column ``K[:, j0]``, ``j0`` the first index of the largest diagonal entry.
    The profile is scaled so that its weighted norm is
    ``sqrt(sum_j w_j K[j, j])`` and ``F[j0]`` is real and nonnegative.
    ``anchor_column_distance`` compares the result with the quotient
    ``K[:, j0] / sqrt(K[j0, j0])`` (relative, modulo global phase).
    """
    if isinstance(field, CorrelationField):
        K = gram_matrix(field)
        w = field.eta_grid.weights
    else:
        K = np.asarray(field, dtype=complex)
        K = (K + K.conj().T) / 2
        w = np.ones(K.shape[0]) if weights is None else np.asarray(weights, dtype=float)
    M = K.shape[0]
    if not np.any(K):
        return RankOneResult(np.zeros(M, dtype=complex), 0.0, -1, np.zeros(M), 0, True, 0.0)
    lam = np.linalg.eigvalsh(K)
    if lam[-1] <= 0:
        raise DegenerateFieldError(f"leading Gram eigenvalue {lam[-1]:.3g} is not positive")
    rest = max(abs(lam[0]), abs(lam[-2])) if M > 1 else 0.0
    rank_ratio = float(min(max(rest / lam[-1], 0.0), 1.0))
    diag = K.diagonal().real
    j0 = int(np.argmax(diag))
    v = K[:, j0].copy()
    v /= np.linalg.norm(v)
    converged = False
    it = 0
    for it in range(1, 10 * M + 1):
        nv = K @ v
        nv /= np.linalg.norm(nv)
        # compare modulo phase; K is Hermitian so the iteration keeps the phase
        delta = np.linalg.norm(nv - v)
        v = nv
        if delta < POWER_TOL:
            converged = True
            break
    target = math.sqrt(max(float(np.sum(diag * w)), 0.0))
    vnorm = math.sqrt(float(np.sum(w * np.abs(v) ** 2)))
    profile = v * (target / vnorm)
    a = profile[j0]
    if a != 0:
        profile = profile * (np.conj(a) / abs(a))
    profile[j0] = abs(profile[j0])
    quotient = K[:, j0] / math.sqrt(diag[j0]) if diag[j0] > 0 else np.zeros(M, dtype=complex)
    ip = np.vdot(quotient * w, profile)
    qdist = np.sqrt(np.sum(w * np.abs(quotient * np.exp(1j * np.angle(ip)) - profile) ** 2))
    rel = float(qdist / target) if target > 0 else 0.0
    return RankOneResult(profile, rank_ratio, j0, lam, it, converged, rel)


# -- full pipeline ------------------------------------------------------------


def _as_list(v) -> list[float]:
    if isinstance(v, (int, float)):
        return [float(v)]
    vals = [float(x) for x in v]
    if not vals:
        raise InvalidArgumentError("ridge sweep must be nonempty")
    return vals


@dataclass(frozen=True)
class RecoveryConfig:
    """``ridge1``/``ridge2`` may be sequences; all combinations are tried."""

    M: int = 16
    ridge1: float | tuple[float, ...] = DEFAULT_RIDGE1
    ridge2: float | tuple[float, ...] = DEFAULT_RIDGE2

    def __post_init__(self) -> None:
        if int(self.M) != self.M or self.M < 2:
            raise InvalidArgumentError(f"M must be an integer >= 2, got {self.M}")
        for name in ("ridge1", "ridge2"):
            vals = _as_list(getattr(self, name))
            if any(not (r >= 0 and math.isfinite(r)) for r in vals):
                raise InvalidArgumentError(f"{name} values must be finite and nonnegative")
            object.__setattr__(self, name, vals[0] if len(vals) == 1 else tuple(vals))

    def combos(self) -> list[tuple[float, float]]:
        return list(itertools.product(_as_list(self.ridge1), _as_list(self.ridge2)))


@dataclass(frozen=True)
class RecoveryReport:
    stage1_residuals: list[float]
    stage1_holdout: list[float | None]
    stage2_residuals: list[float]
    stage2_conditions: list[float]
    rank_ratio: float
    min_eigenvalue_ratio: float
    anchor_index: int
    anchor_column_distance: float
    hermitian_defect: float
    magnitude_misfit: float
    ridge_used: tuple[float, float]
    sweep: list[dict]
    warnings: list[str] = field(default_factory=list)
    truth_distance: PhaseAlignment | None = None

    def to_dict(self) -> dict:
        td = None
        if self.truth_distance is not None:
            td = {"alpha": self.truth_distance.alpha, "distance": self.truth_distance.distance}
        return {
            "ridge_used": list(self.ridge_used),
            "magnitude_misfit": self.magnitude_misfit,
            "rank_ratio": self.rank_ratio,
            "min_eigenvalue_ratio": self.min_eigenvalue_ratio,
            "anchor_index": self.anchor_index,
            "anchor_column_distance": self.anchor_column_distance,
            "hermitian_defect": self.hermitian_defect,
            "stage1_residuals": list(self.stage1_residuals),
            "stage1_holdout": list(self.stage1_holdout),
            "stage2_residuals": list(self.stage2_residuals),
            "stage2_conditions": list(self.stage2_conditions),
            "sweep": self.sweep,
            "warnings": list(self.warnings),
            "truth_distance": td,
        }


def _relative_distance(truth: BandlimitedSignal, est: BandlimitedSignal) -> PhaseAlignment:
    pa = global_phase_distance(truth, est)
    n = truth.norm()
    return PhaseAlignment(pa.alpha, pa.distance / n if n > 0 else pa.distance)


def recover_signal(
    samples: ProductSamples,
    B: float | None = None,
    config: RecoveryConfig | None = None,
    *,
    truth: BandlimitedSignal | None = None,
    X=None,
    p: float = 2.0,
    workers: int | None = None,
) -> tuple[BandlimitedSignal, RecoveryReport]:
    """Run the three stages on product-set magnitudes.

    With a ridge sweep, every combination is run and the one whose forward
    magnitudes best match the data (relative 2-norm misfit) is kept; no
    ground truth enters the choice. ``truth`` only adds the relative
    global-phase distance to the report.
    """
    B = samples.B if B is None else float(B)
    config = config or RecoveryConfig()
    M = int(config.M)
    grid = make_grid(B, M)
    warnings = []
    Xs = X if isinstance(X, PointSet) else PointSet(samples.X)
    if not check_sampling_condition(Xs, B, 4):
        warnings.append(f"sample positions do not exceed density 4B = {4 * B:g}")
    cover = 2 * B
    if samples.Omega[0] > -cover + 1e-12 or samples.Omega[-1] < cover - 1e-12:
        warnings.append(f"Omega does not cover [-{cover:g}, {cover:g}]; stage 2 may be ill-conditioned")

    mnorm = float(np.linalg.norm(samples.magnitudes))
    stage1_cache: dict[float, dict] = {}
    best = None
    sweep = []
    for r1, r2 in config.combos():
        if r1 not in stage1_cache:
            stage1_cache[r1] = recover_autocorrelations(samples, B, r1, M, X=Xs, workers=workers)
        A = stage1_cache[r1]
        cf = recover_correlation_field(A, samples.Omega, B, r2, M, workers=workers)
        ext = rank_one_extract(cf)
        fhat = BandlimitedSignal(grid, ext.profile, p)
        fwd = np.abs(gabor_matrix(fhat, samples.X, samples.Omega))
        misfit = 0.0 if mnorm == 0 else float(np.linalg.norm(fwd - samples.magnitudes) / mnorm)
        sweep.append({"ridge1": r1, "ridge2": r2, "magnitude_misfit": misfit, "rank_ratio": ext.rank_ratio})
        if best is None or misfit < best[0]:
            best = (misfit, r1, r2, A, cf, ext, fhat)

    misfit, r1, r2, A, cf, ext, fhat = best
    ests = [A[float(w)] for w in samples.Omega]
    for e in ests:
        for msg in e.warnings:
            if msg not in warnings:
                warnings.append(msg)
    if not ext.converged:
        warnings.append("power iteration did not reach tolerance")
    lam = ext.eigenvalues
    min_ratio = float(lam[0] / lam[-1]) if lam[-1] > 0 else 0.0
    report = RecoveryReport(
        stage1_residuals=[e.residual for e in ests],
        stage1_holdout=[e.holdout_error for e in ests],
        stage2_residuals=list(cf.residuals),
        stage2_conditions=list(cf.conditions),
        rank_ratio=ext.rank_ratio,
        min_eigenvalue_ratio=min_ratio,
        anchor_index=ext.anchor_index,
        anchor_column_distance=ext.anchor_column_distance,
        hermitian_defect=cf.hermitian_defect(),
        magnitude_misfit=misfit,
        ridge_used=(r1, r2),
        sweep=sweep,
        warnings=warnings,
        truth_distance=_relative_distance(truth, fhat) if truth is not None else None,
    )
    return fhat, report


# -- rotated recovery ----------------------------------------------------------


@dataclass(frozen=True)
class RotatedSignal:
    """``f = F_theta mu`` with ``mu`` the grid measure of ``profile``."""

    theta: float
    profile: BandlimitedSignal

    def evaluate(self, t):
        fn = frft_of_measure(self.profile.grid.nodes, self.profile.masses, self.theta)
        if fn is None:
            raise InvalidArgumentError("at multiples of pi the signal is a measure, not a function")
        return fn(np.asarray(t, dtype=float))


def rotated_sample_points(theta: float, Omega, X) -> np.ndarray:
    """Sample coordinates ``R_{-theta}(Omega x X)``, Omega-major, as ``(x, omega)`` rows."""
    return rotate_product_set(-theta, Omega, X)


def recover_rotated(
    points,
    magnitudes,
    theta: float,
    Omega,
    X,
    B: float,
    config: RecoveryConfig | None = None,
    *,
    truth: BandlimitedSignal | None = None,
    workers: int | None = None,
) -> tuple[RotatedSignal, RecoveryReport]:
    """Recover ``F`` from ``|G F_theta F|`` sampled on ``R_{-theta}(Omega x X)``.

    On those points the magnitudes equal ``|G F(omega, x)|`` and, with
    ``g = F_{pi/2} F``, also ``|G g(x, -omega)|``; ``g`` is the grid signal with
    profile ``F``, so the plain pipeline runs on ``X x (-Omega)``. ``truth`` is
    the true profile ``F``.
    """
    Om = np.asarray(Omega, dtype=float)
    Xa = np.asarray(X.points if isinstance(X, PointSet) else X, dtype=float)
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    mags = np.asarray(magnitudes, dtype=float).ravel()
    expected = rotated_sample_points(theta, Om, Xa)
    if pts.shape != expected.shape or mags.size != pts.shape[0]:
        raise MalformedInputError(f"expected {expected.shape[0]} sample points, got {pts.shape[0]}")
    if not np.allclose(pts, expected, rtol=0, atol=1e-9):
        raise MalformedInputError("sample coordinates are not R_{-theta}(Omega x X) for the declared sets")
    grid_mags = mags.reshape(Om.size, Xa.size)  # [k, i] for (omega_k, x_i)
    neg_om = -Om[::-1]
    samples = ProductSamples(Xa, neg_om, grid_mags[::-1].T, B)
    prof, report = recover_signal(samples, B, config, truth=truth, X=X if isinstance(X, PointSet) else None,
                                  workers=workers)
    return RotatedSignal(float(theta), prof), report


# -- uniqueness ---------------------------------------------------------------


@dataclass(frozen=True)
class UniquenessVerdict:
    max_magnitude_gap: float
    phase_distance: float
    alpha: float
    h_field_max: float
    verdict: str

    def to_dict(self) -> dict:
        return {
            "max_magnitude_gap": self.max_magnitude_gap,
            "phase_distance": self.phase_distance,
            "alpha": self.alpha,
            "h_field_max": self.h_field_max,
            "verdict": self.verdict,
        }


def verify_uniqueness(f: BandlimitedSignal, g: BandlimitedSignal, X, Omega, tol: float = 1e-6) -> UniquenessVerdict:
    """Compare ``|G f|`` with ``|G g|`` on ``X x Omega`` and ``f`` with ``g`` modulo phase.

    ``phase_distance`` is relative to the larger norm. ``h_field_max`` is the
    largest entry of ``P_f conj(P_f)^T - P_g conj(P_g)^T``, the difference of
    the two correlation fields. ``inconsistent`` flags matching magnitudes
    with phase distance above ``100 tol``.
    """
    Xa = np.asarray(X.points if isinstance(X, PointSet) else X, dtype=float)
    Om = np.asarray(Omega, dtype=float)
    gap = float(np.max(np.abs(np.abs(gabor_matrix(f, Xa, Om)) - np.abs(gabor_matrix(g, Xa, Om)))))
    pa = global_phase_distance(f, g)
    scale = max(f.norm(), g.norm())
    dist = pa.distance / scale if scale > 0 else 0.0
    h = float(np.max(np.abs(np.outer(f.values, f.values.conj()) - np.outer(g.values, g.values.conj()))))
    if gap <= tol:
        verdict = "equivalent" if dist <= 100 * tol else "inconsistent"
    else:
        verdict = "distinct"
    return UniquenessVerdict(gap, dist, pa.alpha, h, verdict)
