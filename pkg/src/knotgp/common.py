"""Shared numerical helpers and result containers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cholesky

LOG_2PI = float(np.log(2.0 * np.pi))


class NumericalError(RuntimeError):
    """A matrix factorization failed, even after any ridge escalation.

    Carries ``attempted_jitter``, the diagonal ridge in effect at the time of
    the failure, so callers can report what was tried.
    """

    def __init__(self, message: str, attempted_jitter: float | None = None):
        super().__init__(message)
        self.attempted_jitter = attempted_jitter


def as_input_matrix(x, name: str = "inputs") -> np.ndarray:
    """Coerce to an (n, d) float matrix; 1-d input becomes a column of scalars."""
    a = np.asarray(x, dtype=float)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"{name} must be a nonempty 2-d array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def as_vector(y, name: str = "targets") -> np.ndarray:
    a = np.asarray(y, dtype=float).reshape(-1)
    if a.size < 1:
        raise ValueError(f"{name} must be nonempty")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def chol_lower(matrix: np.ndarray, escalations: int = 0, diagnostics: dict | None = None,
               label: str = "matrix") -> np.ndarray:
    """Lower Cholesky factor of a symmetric PSD matrix.

    The input is symmetrized before factorization. If ``escalations`` > 0 and
    the factorization fails, a ridge starting at 1e-12 times the mean diagonal
    is added and grown a hundredfold per retry; each retry bumps the
    ``near_singular_factorizations`` counter in ``diagnostics``. Raises
    :class:`NumericalError` once retries are exhausted.
    """
    sym = 0.5 * (matrix + matrix.T)
    scale = float(np.mean(np.diag(sym)))
    if not np.isfinite(scale) or scale <= 0.0:
        scale = 1.0
    ridge = 0.0
    for attempt in range(escalations + 1):
        try:
            shifted = sym if ridge == 0.0 else sym + ridge * np.eye(sym.shape[0])
            factor = cholesky(shifted, lower=True)
        except LinAlgError:
            if diagnostics is not None:
                diagnostics["near_singular_factorizations"] = (
                    diagnostics.get("near_singular_factorizations", 0) + 1
                )
            ridge = 1e-12 * scale if ridge == 0.0 else ridge * 100.0
            continue
        return factor
    raise NumericalError(f"Cholesky factorization of {label} failed", attempted_jitter=ridge)


@dataclass
class PredictiveDistribution:
    """Marginal predictive moments, one entry per test point.

    ``latent_variance`` is the variance of the noise-free function value;
    ``noisy_variance`` adds the observation noise variance.
    """

    latent_mean: np.ndarray
    latent_variance: np.ndarray
    noisy_variance: np.ndarray

    def __post_init__(self):
        self.latent_mean = np.asarray(self.latent_mean, dtype=float).reshape(-1)
        self.latent_variance = np.asarray(self.latent_variance, dtype=float).reshape(-1)
        self.noisy_variance = np.asarray(self.noisy_variance, dtype=float).reshape(-1)
        n = self.latent_mean.size
        if self.latent_variance.size != n or self.noisy_variance.size != n:
            raise ValueError("predictive moment vectors must have equal length")
        if np.any(self.latent_variance < 0) or np.any(self.noisy_variance < 0):
            raise ValueError("predictive variances must be nonnegative")

    def __len__(self) -> int:
        return self.latent_mean.size
