"""Least-squares fit of point counts to c * B * (cubic in log B).

N(B) / B is linear in (L^3, L^2, L, 1) with L = log B, so the fit is an
ordinary linear least-squares problem, solved by QR on the design matrix.
The leading coefficient is c; the other three are c*p2, c*p1, c*p0 (the
constant absorbs the linear-in-B contribution of the lines).
"""
from __future__ import annotations

import math
import time

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .torsor import torsor_count, zero_coordinate_count


def log_grid(lo: int, hi: int, n: int) -> list[int]:
    """n log-spaced integers from lo to hi (duplicates after rounding removed)."""
    return sorted({int(round(x)) for x in np.logspace(math.log10(lo), math.log10(hi), n)})


def design_matrix(B) -> np.ndarray:
    L = np.log(np.asarray(B, dtype=float))
    return np.column_stack([L**3, L**2, L, np.ones_like(L)])


def _as_heights(X) -> np.ndarray:
    B = np.asarray(X, dtype=float)
    if B.ndim == 2:
        if B.shape[1] != 1:
            raise ValueError("X must hold a single column of heights B")
        B = B[:, 0]
    if B.ndim != 1 or not np.all(B > 1):
        raise ValueError("heights must be a 1-d array of values > 1")
    return B


class AsymptoticFit(BaseEstimator, RegressorMixin):
    """Fit N(B) = c B (L^3 + p2 L^2 + p1 L + p0).

    Parameters
    ----------
    leading : float or None
        If given, c is held at this value and only the lower three
        coefficients are fitted; used as a diagnostic against a prediction.
    residual_exponent : float
        Residuals are reported scaled by B ** residual_exponent.
    min_points, min_decades : grid requirements; smaller grids make the
        four-parameter fit ill-posed and are rejected.
    """

    def __init__(self, leading=None, residual_exponent=0.925, min_points=8, min_decades=2.0):
        self.leading = leading
        self.residual_exponent = residual_exponent
        self.min_points = min_points
        self.min_decades = min_decades

    def fit(self, X, y):
        B = _as_heights(X)
        N = np.asarray(y, dtype=float)
        if N.shape != B.shape:
            raise ValueError("X and y must have the same length")
        if len(B) < self.min_points:
            raise ValueError(f"need at least {self.min_points} grid points, got {len(B)}")
        if math.log10(B.max() / B.min()) < self.min_decades:
            raise ValueError(f"grid must span at least {self.min_decades} decades")
        A = design_matrix(B)
        target = N / B
        if self.leading is not None:
            target = target - self.leading * A[:, 0]
            A_fit = A[:, 1:]
        else:
            A_fit = A
        Q, R = np.linalg.qr(A_fit)
        beta = np.linalg.solve(R, Q.T @ target)
        resid = target - A_fit @ beta
        dof = len(B) - A_fit.shape[1]
        s2 = float(resid @ resid) / dof if dof > 0 else float("nan")
        Rinv = np.linalg.inv(R)
        cov = s2 * (Rinv @ Rinv.T)
        if self.leading is not None:
            self.coef_ = np.concatenate([[self.leading], beta])
            self.stderr_ = np.concatenate([[0.0], np.sqrt(np.diag(cov))])
        else:
            self.coef_ = beta
            self.stderr_ = np.sqrt(np.diag(cov))
        self.condition_number_ = float(np.linalg.cond(A_fit))
        self.heights_ = B
        self.residuals_ = N - B * (A @ self.coef_)
        self.scaled_residuals_ = self.residuals_ / B**self.residual_exponent
        return self

    @property
    def c_(self) -> float:
        check_is_fitted(self, "coef_")
        return float(self.coef_[0])

    @property
    def c_stderr_(self) -> float:
        check_is_fitted(self, "coef_")
        return float(self.stderr_[0])

    @property
    def monic_coefficients_(self) -> tuple[float, float, float]:
        """(p2, p1, p0) of the monic cubic."""
        c = self.c_
        return tuple(float(v / c) for v in self.coef_[1:])

    def predict(self, X):
        check_is_fitted(self, "coef_")
        B = _as_heights(X)
        return B * (design_matrix(B) @ self.coef_)


def count_grid(grid) -> tuple[np.ndarray, dict]:
    """N_U(B) = 2 T(B) + N_zero(B) on the grid, with per-height timings."""
    counts, seconds = [], {}
    for B in grid:
        t0 = time.perf_counter()
        counts.append(2 * torsor_count(int(B)) + zero_coordinate_count(int(B)))
        seconds[int(B)] = time.perf_counter() - t0
    return np.array(counts, dtype=object), seconds
