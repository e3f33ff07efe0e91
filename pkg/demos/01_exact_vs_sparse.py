"""Exact GP regression versus the sparse knot-based approximations.

Walks through the core objects on a small 1-d problem: fit an exact GP,
fit DTC (variational) and FIC models on a handful of knots, and compare
objectives, predictions, and the KL divergence between predictive
densities as the knot budget grows.

Run:  python3 demos/01_exact_vs_sparse.py
"""

import numpy as np

from knotgp import (Approximation, KernelParams, aukl, elbo, fic_log_marginal,
                    fit_full, fit_sparse, kmeans_init, log_marginal_likelihood,
                    mnlp, predict_full, predict_sparse, srmse)

rng = np.random.default_rng(7)

# ---------------------------------------------------------------------------
# a synthetic regression task: smooth trend, moderate noise
# ---------------------------------------------------------------------------
n_train, n_test = 250, 100
x = np.sort(rng.uniform(0.0, 1.0, n_train + n_test)).reshape(-1, 1)
f = np.sin(2 * np.pi * x[:, 0]) + 0.5 * np.cos(5 * np.pi * x[:, 0])
y = f + 0.3 * rng.standard_normal(x.shape[0])
y = (y - y.mean()) / y.std()

pick = rng.permutation(x.shape[0])
train, test = pick[:n_train], pick[n_train:]
x_train, y_train = x[train], y[train]
x_test, y_test = x[test], y[test]

params = KernelParams(1.0, 0.15, 0.1)

# ---------------------------------------------------------------------------
# the exact model: O(N^3) fit, the reference everything else approximates
# ---------------------------------------------------------------------------
full = fit_full(x_train, y_train, params)
full_lml = log_marginal_likelihood(full)
full_pred = predict_full(full, x_test)
print(f"exact GP        log marginal likelihood = {full_lml:10.3f}   "
      f"srmse = {srmse(full_pred, y_test):.4f}   mnlp = {mnlp(full_pred, y_test):.4f}")

# ---------------------------------------------------------------------------
# sparse models at increasing knot budgets; the variational objective is a
# lower bound on the exact log marginal likelihood and tightens as knots
# are added, and the predictive KL to the exact model shrinks with it
# ---------------------------------------------------------------------------
print("\n  K     ELBO (DTC)    FIC log lik    gap to exact    AUKL vs exact")
for k in (4, 8, 16, 32, 64):
    knots = kmeans_init(x_train, k, seed=k)
    dtc = fit_sparse(Approximation.DTC, x_train, y_train, params, knots)
    fic = fit_sparse(Approximation.FIC, x_train, y_train, params, knots)
    bound = elbo(dtc)
    assert bound <= full_lml + 1e-8, "the bound must never exceed the evidence"
    dtc_pred = predict_sparse(dtc, x_test)
    print(f"{k:4d}   {bound:11.3f}   {fic_log_marginal(fic):11.3f}"
          f"   {full_lml - bound:13.4f}   {aukl(full_pred, dtc_pred):13.3e}")

# ---------------------------------------------------------------------------
# at saturation (knots = every training input) the bound is tight up to the
# stabilizing nugget's contribution
# ---------------------------------------------------------------------------
saturated = fit_sparse(Approximation.DTC, x_train, y_train, params, x_train.copy())
print(f"\nknots = all training inputs: ELBO = {elbo(saturated):.6f} vs "
      f"exact = {full_lml:.6f} (gap {full_lml - elbo(saturated):.2e}, "
      f"nugget {params.latent_jitter:.0e})")
