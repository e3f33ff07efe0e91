"""Sparse, knot-based Gaussian processes.

This module implements the low-rank machinery shared by the deterministic
training conditional (DTC) and fully independent conditional (FIC)
approximations, the variational objective for the DTC structure (a lower
bound on the exact log marginal likelihood), the FIC log marginal
likelihood, marginal predictive distributions for both, and a prior-variance
audit that also covers the DIC and FITC variants.

Notation (array shapes in parentheses):

    X    (N, d)  training inputs           U    (K, d)  knot locations
    S    (K, N)  cross covariance cov(U, X)
    Suu  (K, K)  cov(U, U) + jitter * I
    psi  (N,)    diag of S^T Suu^{-1} S, the low-rank surrogate for the
                 prior variance of the latent function at X
    lam  (N,)    diagonal completing the likelihood covariance:
                 DTC: tau2 * ones;  FIC: (s2 + jitter - psi) + tau2

Every likelihood-style quantity is routed through the K x K system

    B = Suu + S diag(1/lam) S^T

via the matrix inversion and determinant lemmas:

    (S^T Suu^{-1} S + diag(lam))^{-1} = diag(1/lam) (I - S^T B^{-1} S diag(1/lam))
    log|S^T Suu^{-1} S + diag(lam)| = sum(log lam) + log|B| - log|Suu|

so per-evaluation costs stay O(N K^2) time and O(N K) memory. ``B`` is
symmetrized before factorization.

The variational objective is the Gaussian log density of the targets under
the DTC marginal plus the penalty ``-(1 / (2 tau2)) * sum(s2 + jitter - psi)``,
i.e. the trace of the conditional variance the low-rank model discards. The
penalty sits *outside* the log density; the two terms have different units
and only this placement makes the objective a lower bound on the exact log
marginal likelihood.

Gradients are assembled by the adjoint method: each objective is
differentiated with respect to the matrix atoms ``S`` and ``Suu`` and the
scalars it touches directly, after which a chain rule maps those atom
gradients onto (log s2, log ell, log tau2) and knot coordinates. With the
jitter tied to the signal variance, every entry of ``S`` and ``Suu`` scales
linearly in s2, which keeps the log-s2 direction exact.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .common import (LOG_2PI, PredictiveDistribution, as_input_matrix,
                     as_vector, chol_lower)
from .kernels import KernelParams, squared_distances


class Approximation(enum.Enum):
    """The four sparse priors; only DTC and FIC can be fitted or predicted."""

    DIC = "dic"
    DTC = "dtc"
    FIC = "fic"
    FITC = "fitc"


@dataclass(frozen=True)
class KnotSet:
    """An ordered set of knot locations in input space.

    Duplicate rows are permitted (the jitter on ``Suu`` keeps factorizations
    alive) but flagged via :attr:`has_duplicates`.
    """

    locations: np.ndarray
    has_duplicates: bool = field(init=False)

    def __post_init__(self):
        locs = as_input_matrix(self.locations, "knot locations")
        object.__setattr__(self, "locations", locs)
        d2 = squared_distances(locs, locs)
        np.fill_diagonal(d2, np.inf)
        object.__setattr__(self, "has_duplicates", bool(np.min(d2) < 1e-18))

    def __len__(self) -> int:
        return self.locations.shape[0]


def _knot_array(knots) -> np.ndarray:
    if isinstance(knots, KnotSet):
        return knots.locations
    return as_input_matrix(knots, "knot locations")


def psi_cross(x, knots, params: KernelParams, diagnostics: dict | None = None):
    """Low-rank factor pair (V, L) with Psi_xx = V^T V and L L^T = Suu.

    ``L`` is the lower Cholesky factor of ``cov(knots, knots) + jitter I`` and
    ``V = L^{-1} cov(knots, x)``.
    """
    x = as_input_matrix(x, "inputs")
    u = _knot_array(knots)
    if x.shape[1] != u.shape[1]:
        raise ValueError(f"input dimension {x.shape[1]} does not match knot dimension {u.shape[1]}")
    ell2 = params.lengthscale ** 2
    suu = params.signal_variance * np.exp(-0.5 * squared_distances(u, u) / ell2)
    suu = suu + params.latent_jitter * np.eye(u.shape[0])
    luu = chol_lower(suu, escalations=3, diagnostics=diagnostics, label="knot covariance")
    s = params.signal_variance * np.exp(-0.5 * squared_distances(u, x) / ell2)
    v = solve_triangular(luu, s, lower=True)
    return v, luu


def psi_diag(x, knots, params: KernelParams) -> np.ndarray:
    """diag(Psi_xx) without forming any N x N matrix."""
    v, _ = psi_cross(x, knots, params)
    return np.einsum("kn,kn->n", v, v)


class SparseGPModel:
    """A DTC or FIC model over (x, y) with cached K x K factorizations.

    The model is immutable after construction: objective evaluation,
    gradients and prediction are read-only. Building a variant with
    different knots or parameters constructs a fresh model.
    """

    def __init__(self, approx: Approximation, x, y, params: KernelParams, knots,
                 mean_constant: float = 0.0):
        if approx not in (Approximation.DTC, Approximation.FIC):
            raise ValueError(
                "only DTC and FIC models support fitting and prediction; "
                "DIC and FITC exist solely for the prior-variance report"
            )
        self.approx = approx
        self.x = as_input_matrix(x, "training inputs")
        self.y = as_vector(y, "training targets")
        if self.x.shape[0] != self.y.size:
            raise ValueError(f"row count mismatch: {self.x.shape[0]} inputs vs {self.y.size} targets")
        self.params = params
        self.knots = knots if isinstance(knots, KnotSet) else KnotSet(np.asarray(knots, dtype=float))
        if self.knots.locations.shape[1] != self.x.shape[1]:
            raise ValueError(
                f"knot dimension {self.knots.locations.shape[1]} does not match "
                f"input dimension {self.x.shape[1]}"
            )
        self.mean_constant = float(mean_constant)
        self.diagnostics: dict = {}
        self._build()

    # -- cache construction -------------------------------------------------

    def _build(self):
        params = self.params
        x, u = self.x, self.knots.locations
        s2, ell2 = params.signal_variance, params.lengthscale ** 2
        tau2, jitter = params.noise_variance, params.latent_jitter

        self._d2_uu = squared_distances(u, u)
        self._d2_ux = squared_distances(u, x)
        self._kuu = s2 * np.exp(-0.5 * self._d2_uu / ell2)
        self._suu = self._kuu + jitter * np.eye(u.shape[0])
        self._s = s2 * np.exp(-0.5 * self._d2_ux / ell2)
        self._luu = chol_lower(self._suu, escalations=3, diagnostics=self.diagnostics,
                               label="knot covariance")
        v = solve_triangular(self._luu, self._s, lower=True)
        self._psi = np.einsum("kn,kn->n", v, v)

        if self.approx is Approximation.DTC:
            self._lam = np.full(x.shape[0], tau2)
        else:
            # diag(Sigma_xx - Psi_xx); tiny negative round-off is clipped
            self._lam = np.maximum(s2 + jitter - self._psi, 0.0) + tau2
        b = self._suu + (self._s / self._lam) @ self._s.T
        self._lb = chol_lower(b, escalations=3, diagnostics=self.diagnostics,
                              label="low-rank system")
        self._resid = self.y - self.mean_constant
        t = self._s @ (self._resid / self._lam)
        self._c = cho_solve((self._lb, True), t)
        self._alpha = (self._resid - self._s.T @ self._c) / self._lam

    # -- objective values ----------------------------------------------------

    @property
    def n_train(self) -> int:
        return self.x.shape[0]

    @property
    def n_knots(self) -> int:
        return len(self.knots)

    def _log_density(self) -> float:
        # log N(y; m, S^T Suu^{-1} S + diag(lam)) via the K x K system
        n = self.n_train
        logdet = (np.sum(np.log(self._lam))
                  + 2.0 * np.sum(np.log(np.diag(self._lb)))
                  - 2.0 * np.sum(np.log(np.diag(self._luu))))
        quad = float(self._resid @ self._alpha)
        return -0.5 * (n * LOG_2PI + logdet + quad)

    def trace_penalty(self) -> float:
        """(1 / (2 tau2)) * sum_i (s2 + jitter - psi_i), the variational penalty."""
        params = self.params
        total = self.n_train * (params.signal_variance + params.latent_jitter) \
            - float(np.sum(self._psi))
        return total / (2.0 * params.noise_variance)

    def elbo(self) -> float:
        if self.approx is not Approximation.DTC:
            raise RuntimeError("the variational objective is defined for DTC models; "
                               "use fic_log_marginal for FIC")
        return self._log_density() - self.trace_penalty()

    def fic_log_marginal(self) -> float:
        if self.approx is not Approximation.FIC:
            raise RuntimeError("fic_log_marginal is defined for FIC models; "
                               "use elbo for DTC")
        return self._log_density()

    def objective(self) -> float:
        """The model-selection objective for this approximation."""
        if self.approx is Approximation.DTC:
            return self.elbo()
        return self.fic_log_marginal()

    def objective_with_added_knot(self, location) -> float:
        """Objective after appending one knot, parameters held fixed."""
        loc = np.atleast_1d(np.asarray(location, dtype=float))
        candidate = np.vstack([self.knots.locations, loc])
        return SparseGPModel(self.approx, self.x, self.y, self.params, candidate,
                             self.mean_constant).objective()

    # -- gradients -----------------------------------------------------------

    def objective_grad(self, active_knot_index: int | None = None,
                       all_knots: bool = False):
        """Objective value and gradient.

        The gradient starts with (d/dlog s2, d/dlog ell, d/dlog tau2). With
        ``active_knot_index`` set, the d coordinate derivatives of that single
        knot follow; with ``all_knots=True`` the derivatives of every knot
        coordinate follow in row-major knot order.
        """
        if active_knot_index is not None and all_knots:
            raise ValueError("request either one active knot or all knots, not both")
        if active_knot_index is not None and not (0 <= active_knot_index < self.n_knots):
            raise IndexError(f"knot index {active_knot_index} out of range")

        params = self.params
        n, k = self.n_train, self.n_knots
        s2, ell2 = params.signal_variance, params.lengthscale ** 2
        tau2, jitter = params.noise_variance, params.latent_jitter
        s, suu, kuu = self._s, self._suu, self._kuu
        lam, alpha = self._lam, self._alpha

        value = self.objective()

        # atom gradients of the log density wrt S, Suu and the lam diagonal
        m1 = cho_solve((self._lb, True), s)                     # B^{-1} S
        h = m1 / lam[None, :]                                   # B^{-1} S diag(1/lam)
        sbs = np.einsum("kn,kn->n", s, m1)                      # (S^T B^{-1} S)_ii
        diag_cinv = (1.0 - sbs / lam) / lam
        lam_bar = -0.5 * (diag_cinv - alpha ** 2)
        binv = cho_solve((self._lb, True), np.eye(k))
        p = cho_solve((self._luu, True), np.eye(k))             # Suu^{-1}
        g = cho_solve((self._luu, True), s @ alpha)
        grad_s = np.outer(g, alpha) - h
        grad_uu = -0.5 * (binv - p + np.outer(g, g))

        d_s2_unit = 0.0          # coefficient of d(s2 + jitter)
        d_tau2 = float(np.sum(lam_bar))   # both variants carry +tau2 inside lam

        ps = cho_solve((self._luu, True), s)                    # Suu^{-1} S
        if self.approx is Approximation.DTC:
            # the subtracted trace penalty
            grad_s += ps / tau2
            grad_uu -= (0.5 / tau2) * (ps @ ps.T)
            d_s2_unit += -n / (2.0 * tau2)
            d_tau2 += self.trace_penalty() / tau2
        else:
            # lam_i = (s2 + jitter) + tau2 - psi_i, psi_i = s_i^T Suu^{-1} s_i
            grad_s += -2.0 * ps * lam_bar[None, :]
            grad_uu += (ps * lam_bar[None, :]) @ ps.T
            d_s2_unit += float(np.sum(lam_bar))

        grad_uu = 0.5 * (grad_uu + grad_uu.T)

        d_log_s2 = (np.sum(grad_uu * suu) + np.sum(grad_s * s)
                    + d_s2_unit * (s2 + jitter))
        d_log_ell = (np.sum(grad_uu * (kuu * self._d2_uu))
                     + np.sum(grad_s * (s * self._d2_ux))) / ell2
        d_log_tau2 = d_tau2 * tau2
        grad = [d_log_s2, d_log_ell, d_log_tau2]

        if active_knot_index is not None or all_knots:
            u, x = self.knots.locations, self.x
            gs_s = grad_s * s
            guu_k = grad_uu * kuu
            if all_knots:
                t1 = (gs_s @ x - np.sum(gs_s, axis=1)[:, None] * u) / ell2
                t2 = 2.0 * (guu_k @ u - np.sum(guu_k, axis=1)[:, None] * u) / ell2
                grad.extend((t1 + t2).reshape(-1))
            else:
                idx = active_knot_index
                t1 = gs_s[idx] @ (x - u[idx]) / ell2
                t2 = 2.0 * (guu_k[idx] @ (u - u[idx])) / ell2
                grad.extend(t1 + t2)
        return value, np.asarray(grad, dtype=float)

    # -- prediction ----------------------------------------------------------

    def predict(self, test_inputs) -> PredictiveDistribution:
        """Marginal predictive moments at the test inputs.

        DTC propagates the optimal K-dimensional posterior over the knot
        values through the exact GP conditional; FIC uses its own weighted
        K x K posterior. Both reduce to

            mean_j = m + k_j^T B^{-1} S (r / lam)
            var_j  = (s2 + jitter) - psi_j + k_j^T B^{-1} k_j

        with ``k_j = cov(knots, test_j)`` and each variant's own ``B``/``lam``.
        FIC marginals coincide with FITC's.
        """
        xt = as_input_matrix(test_inputs, "test inputs")
        if xt.shape[1] != self.x.shape[1]:
            raise ValueError(
                f"test input dimension {xt.shape[1]} does not match "
                f"training dimension {self.x.shape[1]}"
            )
        params = self.params
        ell2 = params.lengthscale ** 2
        ktu = params.signal_variance * np.exp(
            -0.5 * squared_distances(xt, self.knots.locations) / ell2)
        mean = self.mean_constant + ktu @ self._c
        vt = solve_triangular(self._luu, ktu.T, lower=True)
        psi_t = np.einsum("kj,kj->j", vt, vt)
        m2 = cho_solve((self._lb, True), ktu.T)
        correction = np.einsum("jk,kj->j", ktu, m2)
        var = params.signal_variance + params.latent_jitter - psi_t + correction
        clamps = int(np.sum(var < 0.0))
        if clamps:
            self.diagnostics["negative_variance_clamps"] = (
                self.diagnostics.get("negative_variance_clamps", 0) + clamps
            )
            var = np.maximum(var, 0.0)
        return PredictiveDistribution(mean, var, var + params.noise_variance)


# -- spec-level operation wrappers -------------------------------------------

def fit_sparse(approx: Approximation, x, y, params: KernelParams, knots,
               mean_constant: float = 0.0) -> SparseGPModel:
    return SparseGPModel(approx, x, y, params, knots, mean_constant)


def elbo(model: SparseGPModel) -> float:
    return model.elbo()


def elbo_grad(model: SparseGPModel, active_knot_index: int | None = None,
              all_knots: bool = False):
    if model.approx is not Approximation.DTC:
        raise RuntimeError("elbo_grad is defined for DTC models")
    return model.objective_grad(active_knot_index=active_knot_index, all_knots=all_knots)


def fic_log_marginal(model: SparseGPModel, with_grad: bool = False,
                     active_knot_index: int | None = None, all_knots: bool = False):
    if model.approx is not Approximation.FIC:
        raise RuntimeError("fic_log_marginal is defined for FIC models")
    if with_grad or active_knot_index is not None or all_knots:
        return model.objective_grad(active_knot_index=active_knot_index,
                                    all_knots=all_knots)
    return model.fic_log_marginal()


def predict_sparse(model: SparseGPModel, test_inputs) -> PredictiveDistribution:
    return model.predict(test_inputs)


# -- prior variance audit ------------------------------------------------------

def prior_variance_report(approx: Approximation, x_train, x_test, knots,
                          params: KernelParams, tol: float = 1e-8) -> dict:
    """Compare a sparse prior's train/test (co)variances with the full GP's.

    Builds the marginal prior covariance implied by the approximation's
    defining conditionals (dense, audit-only code path) and reports four
    booleans: variances compare diagonals, covariances compare off-diagonal
    entries, both at absolute tolerance ``tol * max(1, s2)``.
    """
    x_train = as_input_matrix(x_train, "training inputs")
    x_test = as_input_matrix(x_test, "test inputs")
    u = _knot_array(knots)
    ell2 = params.lengthscale ** 2
    s2 = params.signal_variance

    def kern(a, b):
        return s2 * np.exp(-0.5 * squared_distances(a, b) / ell2)

    suu = kern(u, u) + params.latent_jitter * np.eye(u.shape[0])
    luu = chol_lower(suu, escalations=3, label="knot covariance")

    def psi(a, b):
        va = solve_triangular(luu, kern(u, a), lower=True)
        vb = solve_triangular(luu, kern(u, b), lower=True)
        return va.T @ vb

    sigma_tr = kern(x_train, x_train)
    sigma_te = kern(x_test, x_test)
    psi_tr = psi(x_train, x_train)
    psi_te = psi(x_test, x_test)

    if approx is Approximation.DIC:
        marg_tr, marg_te = psi_tr, psi_te
    elif approx is Approximation.DTC:
        marg_tr, marg_te = psi_tr, psi_te + (sigma_te - psi_te)
    elif approx is Approximation.FIC:
        marg_tr = psi_tr + np.diag(np.diag(sigma_tr - psi_tr))
        marg_te = psi_te + np.diag(np.diag(sigma_te - psi_te))
    elif approx is Approximation.FITC:
        marg_tr = psi_tr + np.diag(np.diag(sigma_tr - psi_tr))
        marg_te = psi_te + (sigma_te - psi_te)
    else:
        raise ValueError(f"unknown approximation {approx!r}")

    atol = tol * max(1.0, s2)

    def var_match(a, b):
        return bool(np.max(np.abs(np.diag(a) - np.diag(b))) <= atol)

    def cov_match(a, b):
        if a.shape[0] < 2:
            return True
        off = ~np.eye(a.shape[0], dtype=bool)
        return bool(np.max(np.abs(a[off] - b[off])) <= atol)

    return {
        "train_var_match": var_match(marg_tr, sigma_tr),
        "train_cov_match": cov_match(marg_tr, sigma_tr),
        "test_var_match": var_match(marg_te, sigma_te),
        "test_cov_match": cov_match(marg_te, sigma_te),
    }
