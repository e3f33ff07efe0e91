"""Squared exponential covariance function and its analytic derivatives.

The kernel is

    k(a, b) = s2 * exp(-||a - b||^2 / (2 * ell^2))

with signal variance ``s2`` and a single isotropic lengthscale ``ell``.
Positive hyperparameters live on the log scale during optimization, so the
derivative helpers here are taken with respect to (log s2, log ell) and, for
knot movement, the coordinates of the second argument.

Squared distances are computed through the expansion
``||a||^2 - 2 a.b + ||b||^2`` and clamped at zero to guard against
cancellation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .common import as_input_matrix

DEFAULT_JITTER_RATIO = 1e-6


@dataclass(frozen=True)
class KernelParams:
    """Covariance hyperparameters on the natural scale.

    ``latent_jitter`` is a small nugget added to every self-covariance
    diagonal of the latent function so factorizations stay stable. When not
    supplied it defaults to ``DEFAULT_JITTER_RATIO * signal_variance`` and is
    rescaled whenever the signal variance changes via :meth:`with_log_vector`.
    """

    signal_variance: float
    lengthscale: float
    noise_variance: float
    latent_jitter: float | None = None

    def __post_init__(self):
        if self.latent_jitter is None:
            object.__setattr__(self, "latent_jitter",
                               DEFAULT_JITTER_RATIO * float(self.signal_variance))
        for name in ("signal_variance", "lengthscale", "noise_variance"):
            value = float(getattr(self, name))
            if not np.isfinite(value) or value <= 0.0:
                raise ValueError(f"{name} must be finite and positive, got {value}")
            object.__setattr__(self, name, value)
        jitter = float(self.latent_jitter)
        if not np.isfinite(jitter) or jitter < 0.0:
            raise ValueError(f"latent_jitter must be finite and nonnegative, got {jitter}")
        object.__setattr__(self, "latent_jitter", jitter)

    @property
    def jitter_ratio(self) -> float:
        return self.latent_jitter / self.signal_variance

    def log_vector(self) -> np.ndarray:
        """(log s2, log ell, log tau2) as an array, the optimizer's view."""
        return np.log([self.signal_variance, self.lengthscale, self.noise_variance])

    def with_log_vector(self, vec) -> "KernelParams":
        """New params from (log s2, log ell, log tau2), keeping the jitter ratio."""
        vec = np.asarray(vec, dtype=float).reshape(-1)
        if vec.size != 3:
            raise ValueError(f"log vector must have length 3, got {vec.size}")
        s2, ell, tau2 = np.exp(vec)
        return KernelParams(s2, ell, tau2, latent_jitter=self.jitter_ratio * s2)

    @classmethod
    def from_log_vector(cls, vec, jitter_ratio: float = DEFAULT_JITTER_RATIO) -> "KernelParams":
        s2, ell, tau2 = np.exp(np.asarray(vec, dtype=float).reshape(-1))
        return cls(s2, ell, tau2, latent_jitter=jitter_ratio * s2)


def _as_point(x, name: str) -> np.ndarray:
    a = np.atleast_1d(np.asarray(x, dtype=float))
    if a.ndim != 1:
        raise ValueError(f"{name} must be a single point (1-d array)")
    return a


def _check_same_dim(a: np.ndarray, b: np.ndarray):
    if a.shape[-1] != b.shape[-1]:
        raise ValueError(f"input dimension mismatch: {a.shape[-1]} vs {b.shape[-1]}")


def squared_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances between rows of two (n, d) arrays."""
    a = as_input_matrix(a, "first input matrix")
    b = as_input_matrix(b, "second input matrix")
    _check_same_dim(a, b)
    aa = np.sum(a * a, axis=1)[:, None]
    bb = np.sum(b * b, axis=1)[None, :]
    d2 = aa - 2.0 * (a @ b.T) + bb
    return np.maximum(d2, 0.0)


def kernel_eval(a, b, params: KernelParams) -> float:
    """Evaluate k(a, b) for two single points."""
    a = _as_point(a, "a")
    b = _as_point(b, "b")
    _check_same_dim(a, b)
    diff = a - b
    r2 = float(diff @ diff)
    ell2 = params.lengthscale ** 2
    return params.signal_variance * float(np.exp(-0.5 * r2 / ell2))


def cov_matrix(a, b, params: KernelParams) -> np.ndarray:
    """Cross-covariance matrix with (i, j) entry k(a_i, b_j). No jitter is added."""
    d2 = squared_distances(a, b)
    ell2 = params.lengthscale ** 2
    return params.signal_variance * np.exp(-0.5 * d2 / ell2)


def kernel_grad_params(a, b, params: KernelParams) -> np.ndarray:
    """Gradient of k(a, b) with respect to (log s2, log ell)."""
    a = _as_point(a, "a")
    b = _as_point(b, "b")
    _check_same_dim(a, b)
    diff = a - b
    r2 = float(diff @ diff)
    ell2 = params.lengthscale ** 2
    k = params.signal_variance * float(np.exp(-0.5 * r2 / ell2))
    return np.array([k, k * r2 / ell2])


def kernel_grad_knot(a, knot, params: KernelParams) -> np.ndarray:
    """Gradient of k(a, knot) with respect to the knot coordinates."""
    a = _as_point(a, "a")
    knot = _as_point(knot, "knot")
    _check_same_dim(a, knot)
    diff = a - knot
    ell2 = params.lengthscale ** 2
    k = params.signal_variance * float(np.exp(-0.5 * float(diff @ diff) / ell2))
    return k * diff / ell2
