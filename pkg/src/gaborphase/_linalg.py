"""Tikhonov-regularized least squares through the SVD."""

from dataclasses import dataclass

import numpy as np

from .errors import IllPosedError

#: normal-system condition number above which an unregularized solve is refused
CONDITION_CAP = 1e14


@dataclass(frozen=True)
class RidgeSolution:
    x: np.ndarray
    residual: float
    condition: float
    ridge_abs: float


def ridge_solve(A, b, ridge):
    """Solve ``min ||A x - b||^2 + lam ||x||^2`` with ``lam = ridge * s_max^2``.

    ``ridge`` is relative to the largest eigenvalue of the normal matrix
    ``A^H A``. ``condition`` is the condition number of that normal matrix.
    ``residual`` is ``||A x - b|| / ||b||`` (0 when ``b`` vanishes).
    """
    A = np.asarray(A)
    b = np.asarray(b)
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    smax = s[0] if s.size else 0.0
    smin = s[-1] if s.size else 0.0
    condition = float(np.inf) if smin == 0 else float((smax / smin) ** 2)
    if ridge == 0 and condition > CONDITION_CAP:
        raise IllPosedError(
            f"normal system condition {condition:.3g} exceeds {CONDITION_CAP:.0e}; use ridge > 0"
        )
    lam = ridge * smax**2
    with np.errstate(divide="ignore", invalid="ignore"):
        filt = np.where(s > 0, s / (s**2 + lam), 0.0)
    x = Vh.conj().T @ (filt * (U.conj().T @ b))
    bnorm = np.linalg.norm(b)
    residual = 0.0 if bnorm == 0 else float(np.linalg.norm(A @ x - b) / bnorm)
    return RidgeSolution(x=x, residual=residual, condition=condition, ridge_abs=float(lam))
