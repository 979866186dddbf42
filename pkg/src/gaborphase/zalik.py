"""Gaussian translate dictionaries and Muntz-type divergence diagnostics.

Completeness of ``{exp(-c (t - w)^2) : w in Omega}`` on a compact interval
holds exactly when ``sum_{w != 0} 1/|w|`` diverges. Neither side of that
statement is decidable from finitely many centers, so this module measures
trends: partial sums of the series and best-approximation errors over
nested center sets.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._linalg import ridge_solve
from .errors import InvalidArgumentError
from .signals import FrequencyGrid, make_grid

DEFAULT_RATE = 2 * np.pi
#: growth of S_N per doubling of N required over the last three doublings
DIVERGENCE_STEP = 0.05


@dataclass(frozen=True)
class MuntzDiagnostic:
    partial_sums: list[tuple[int, Fraction]]
    verdict: str

    def to_dict(self) -> dict:
        return {
            "partial_sums": [[n, float(s), f"{s.numerator}/{s.denominator}"] for n, s in self.partial_sums],
            "verdict": self.verdict,
        }


def _exact(v) -> Fraction:
    return Fraction(v) if not isinstance(v, Fraction) else v


def muntz_partial_sums(Omega, N_values) -> MuntzDiagnostic:
    """Exact partial sums ``S_N`` of ``1/|w|`` over the first ``N`` nonzero-or-zero terms.

    ``Omega`` is any iterable ordered by increasing ``|w|`` (it may be
    infinite, e.g. ``itertools.count(1)``); only the first ``max(N_values)``
    items are read. Zero entries are skipped in the sum but still count
    towards ``N``. Arithmetic is rational-exact (floats are converted
    exactly).

    The verdict is a heuristic: ``diverging-trend`` when ``S_{2N} - S_N`` is at
    least 0.05 for the last three doublings present in the table,
    ``converging-trend`` otherwise, ``inconclusive`` when all sums vanish or
    fewer than three doublings are available.
    """
    Ns = sorted({int(n) for n in N_values})
    if not Ns or Ns[0] < 0:
        raise InvalidArgumentError("N values must be nonnegative")
    terms = list(itertools.islice(iter(Omega), Ns[-1]))
    sums = []
    acc = Fraction(0)
    it = 0
    for n in Ns:
        while it < min(n, len(terms)):
            w = _exact(terms[it])
            if w != 0:
                acc += 1 / abs(w)
            it += 1
        sums.append((n, acc))
    table = dict(sums)
    increments = [table[2 * n] - table[n] for n in Ns if 2 * n in table and n > 0]
    if all(s == 0 for _, s in sums) or len(increments) < 3:
        verdict = "inconclusive"
    elif all(inc >= DIVERGENCE_STEP for inc in increments[-3:]):
        verdict = "diverging-trend"
    else:
        verdict = "converging-trend"
    return MuntzDiagnostic(sums, verdict)


@dataclass(frozen=True)
class GaussianDictionary:
    centers: np.ndarray
    c: float
    grid: FrequencyGrid
    atoms: np.ndarray  # (len(centers), grid.M)

    def evaluate_atoms(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.exp(-self.c * (t[None, :] - self.centers[:, None]) ** 2)

    def gram(self) -> np.ndarray:
        return (self.atoms * self.grid.weights) @ self.atoms.T

    def gram_condition(self) -> float:
        return float(np.linalg.cond(self.gram()))


def build_dictionary(centers, c: float = DEFAULT_RATE, grid: FrequencyGrid | None = None) -> GaussianDictionary:
    if not c > 0:
        raise InvalidArgumentError(f"Gaussian rate c must be positive, got {c}")
    if grid is None:
        raise InvalidArgumentError("a grid is required")
    centers = np.asarray(centers, dtype=float).ravel()
    atoms = np.exp(-c * (grid.nodes[None, :] - centers[:, None]) ** 2)
    return GaussianDictionary(centers, float(c), grid, atoms)


@dataclass(frozen=True)
class Approximation:
    coefficients: np.ndarray
    sup_error: float
    l2_error: float
    condition: float


def best_approximation(
    target, dictionary: GaussianDictionary, ridge: float = 1e-14, refine: int = 4, candidate=None
) -> Approximation:
    """Ridge-regularized best approximation of ``target`` in the grid-weighted 2-norm.

    ``target`` is a vectorized callable of ``eta`` or an array of values on
    the dictionary grid. For callables ``sup_error`` is measured on a
    ``refine``-times finer grid with exact atom evaluation; array targets are
    only known at the nodes, so their sup is taken there.

    ``candidate`` is an optional coefficient vector (e.g. the solution for a
    subset of the centers, zero-padded). It is kept when it beats the ridge
    solution, so errors over nested center sets never increase.
    """
    grid = dictionary.grid
    if callable(target):
        tvals = np.asarray(target(grid.nodes), dtype=complex)
    else:
        tvals = np.asarray(target, dtype=complex)
        if tvals.shape != (grid.M,):
            raise InvalidArgumentError("target must match the dictionary grid")
    sw = np.sqrt(grid.weights)
    A = (dictionary.atoms * sw).T
    sol = ridge_solve(A, sw * tvals, ridge)

    def l2(lam):
        return float(np.sqrt(np.sum(grid.weights * np.abs(dictionary.atoms.T @ lam - tvals) ** 2)))

    lam, err = sol.x, l2(sol.x)
    if candidate is not None:
        cand = np.asarray(candidate, dtype=complex)
        if cand.shape != lam.shape:
            raise InvalidArgumentError("candidate must have one coefficient per center")
        if l2(cand) < err:
            lam, err = cand, l2(cand)
    if callable(target):
        fine = make_grid(grid.B, refine * (grid.M - 1) + 1)
        approx = dictionary.evaluate_atoms(fine.nodes).T @ lam
        sup = float(np.max(np.abs(approx - np.asarray(target(fine.nodes), dtype=complex))))
    else:
        sup = float(np.max(np.abs(dictionary.atoms.T @ lam - tvals)))
    return Approximation(lam, sup, err, sol.condition)


def _embed(prev_centers, prev_coef, centers):
    """Zero-pad ``prev_coef`` onto ``centers``; None unless the old centers are a subset."""
    out = np.zeros(len(centers), dtype=complex)
    idx = {float(c): k for k, c in enumerate(centers)}
    for c, v in zip(prev_centers, prev_coef):
        k = idx.get(float(c))
        if k is None:
            return None
        out[k] += v
    return out


def completeness_report(target, center_sets, c: float, grid: FrequencyGrid, ridge: float = 1e-14) -> dict:
    """Approximation errors over a sequence of (typically nested) center sets."""
    errors = []
    last = None
    for centers in center_sets:
        d = build_dictionary(centers, c, grid)
        cand = _embed(last[0].centers, last[1].coefficients, d.centers) if last else None
        approx = best_approximation(target, d, ridge, candidate=cand)
        errors.append([len(d.centers), approx.sup_error, approx.l2_error])
        last = (d, approx)
    return {
        "centers": [float(v) for v in last[0].centers] if last else [],
        "c": float(c),
        "condition": last[1].condition if last else None,
        "errors": errors,
    }
