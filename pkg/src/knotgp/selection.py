"""One-at-a-time knot selection.

The loop starts from a k-means initialization, then repeatedly proposes a
knot from the training-input pool (best-of-random-subset or a discrete
Bayesian optimization over candidate gains), appends it, and gradient-ascends
the covariance parameters together with the new knot's coordinates while all
previous knots stay frozen. A simultaneous-refinement path optimizes every
knot coordinate jointly for a fixed knot count.

Proposals always return a member of the candidate pool; continuous movement
of a knot happens only inside the gradient step that follows.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from . import full_gp
from .adadelta import OptimizerConfig, maximize
from .common import NumericalError, as_input_matrix, as_vector
from .kernels import KernelParams
from .sparse_gp import Approximation, SparseGPModel

logger = logging.getLogger(__name__)

_OBJECTIVE_APPROX = {"vfe": Approximation.DTC, "fic": Approximation.FIC}

# knots this close (per coordinate) to an existing knot are not conditioned on
# by the Bayesian-optimization proposal
COINCIDENCE_TOL = 1e-9


@dataclass(frozen=True)
class OATConfig:
    initial_knot_count: int = 5
    max_knots: int = 80
    proposal: str = "bo"                 # "bo" or "rs"
    objective: str = "vfe"               # "vfe" or "fic"
    improvement_tol: float = 1e-4
    rs_subset_size: int = 30
    bo_budget: int = 30
    bo_initial_design: int = 10
    rng_seed: int = 0

    def __post_init__(self):
        if self.initial_knot_count < 1:
            raise ValueError("initial_knot_count must be at least 1")
        if self.max_knots < self.initial_knot_count:
            raise ValueError("max_knots must be at least initial_knot_count")
        if self.proposal not in ("bo", "rs"):
            raise ValueError(f"proposal must be 'bo' or 'rs', got {self.proposal!r}")
        if self.objective not in _OBJECTIVE_APPROX:
            raise ValueError(f"objective must be 'vfe' or 'fic', got {self.objective!r}")
        if self.improvement_tol <= 0.0:
            raise ValueError("improvement_tol must be positive")
        if self.rs_subset_size < 1:
            raise ValueError("rs_subset_size must be at least 1")
        if not 0 < self.bo_initial_design < self.bo_budget:
            raise ValueError("require 0 < bo_initial_design < bo_budget")


@dataclass
class SelectionStep:
    knot_count: int
    objective_before: float        # at the inner optimization's starting point
    objective_after: float         # best seen by the inner optimization
    proposal_seconds: float
    optimize_seconds: float
    accepted_location: tuple | None

    def to_dict(self) -> dict:
        return {
            "knot_count": self.knot_count,
            "objective_before": self.objective_before,
            "objective_after": self.objective_after,
            "proposal_seconds": self.proposal_seconds,
            "optimize_seconds": self.optimize_seconds,
            "accepted_location": list(self.accepted_location)
            if self.accepted_location is not None else None,
        }


@dataclass
class SelectionTrace:
    steps: list = field(default_factory=list)
    stopped_because: str = ""

    @property
    def objective_values(self) -> np.ndarray:
        return np.asarray([s.objective_after for s in self.steps])

    def to_dict(self) -> dict:
        return {"stopped_because": self.stopped_because,
                "steps": [s.to_dict() for s in self.steps]}


def kmeans_init(x, n_clusters: int, seed) -> np.ndarray:
    """Lloyd's algorithm on the training inputs, deterministic given the seed.

    Initial centers are distinct rows of ``x``; iteration stops at an
    assignment fixed point or after 100 sweeps. Empty clusters keep their
    previous center.
    """
    x = as_input_matrix(x, "inputs")
    n = x.shape[0]
    if not 1 <= n_clusters <= n:
        raise ValueError(f"need 1 <= n_clusters <= {n}, got {n_clusters}")
    rng = np.random.default_rng(seed)
    centers = x[rng.choice(n, size=n_clusters, replace=False)].copy()
    assignments = None
    for _ in range(100):
        d2 = (np.sum(x * x, axis=1)[:, None] - 2.0 * x @ centers.T
              + np.sum(centers * centers, axis=1)[None, :])
        new_assignments = np.argmin(d2, axis=1)
        if assignments is not None and np.array_equal(new_assignments, assignments):
            break
        assignments = new_assignments
        for j in range(n_clusters):
            members = x[assignments == j]
            if members.shape[0]:
                centers[j] = members.mean(axis=0)
    return centers


def _candidate_gains(model: SparseGPModel, pool: np.ndarray, indices) -> np.ndarray:
    base = model.objective()
    gains = np.empty(len(indices))
    for out, idx in enumerate(indices):
        try:
            gains[out] = model.objective_with_added_knot(pool[idx]) - base
        except NumericalError:
            gains[out] = -np.inf
    return gains


def propose_rs(model: SparseGPModel, candidate_pool, subset_size: int, seed) -> np.ndarray:
    """Best-of-random-subset proposal: the sampled pool row whose addition,
    parameters fixed, most improves the model's objective. Ties go to the
    lowest pool index."""
    pool = as_input_matrix(candidate_pool, "candidate pool")
    if subset_size < 1:
        raise ValueError("subset_size must be at least 1")
    rng = np.random.default_rng(seed)
    take = min(subset_size, pool.shape[0])
    indices = np.sort(rng.choice(pool.shape[0], size=take, replace=False))
    gains = _candidate_gains(model, pool, indices)
    return pool[indices[int(np.argmax(gains))]].copy()


def _fit_surrogate(inputs: np.ndarray, gains: np.ndarray, init_params: KernelParams):
    """Hyperparameters of the proposal surrogate by marginal-likelihood ascent."""
    def fg(vec):
        p = init_params.with_log_vector(vec)
        m = full_gp.fit_full(inputs, gains, p, mean_constant=0.0)
        return full_gp.log_marginal_likelihood(m, with_grad=True)

    cfg = OptimizerConfig(max_steps=150, rel_tol=1e-4, patience=5)
    try:
        res = maximize(fg, init_params.log_vector(), cfg)
        fitted = init_params.with_log_vector(res.x)
        return full_gp.fit_full(inputs, gains, fitted, mean_constant=0.0), fitted
    except (NumericalError, ValueError):
        return full_gp.fit_full(inputs, gains, init_params, mean_constant=0.0), init_params


def propose_bo(model: SparseGPModel, candidate_pool, budget: int, initial_design: int,
               seed) -> np.ndarray:
    """Discrete Bayesian-optimization proposal over the candidate pool.

    Gains from adding each probed candidate (parameters fixed) are modeled
    with a squared exponential surrogate on standardized pool coordinates;
    expected improvement picks the next probe until the budget is spent.
    Candidates coinciding with an existing knot are never conditioned on;
    if that excludes everything the proposal falls back to an exhaustive
    random-subset pass over the full pool.
    """
    pool = as_input_matrix(candidate_pool, "candidate pool")
    rng = np.random.default_rng(seed)

    coincides = np.zeros(pool.shape[0], dtype=bool)
    for knot in model.knots.locations:
        coincides |= np.all(np.abs(pool - knot) <= COINCIDENCE_TOL, axis=1)
    eligible = np.flatnonzero(~coincides)
    if eligible.size == 0:
        logger.warning("all candidates coincide with existing knots; "
                       "falling back to a full-pool random-subset proposal")
        return propose_rs(model, pool, pool.shape[0], rng)

    budget = min(budget, eligible.size)
    initial_design = min(initial_design, budget)

    pool_mean = pool.mean(axis=0)
    pool_sd = np.maximum(pool.std(axis=0), 1e-12)
    coords = (pool - pool_mean) / pool_sd

    probed = list(np.sort(rng.choice(eligible, size=initial_design, replace=False)))
    gains = list(_candidate_gains(model, pool, probed))

    surrogate_params = None
    while len(probed) < budget:
        finite_only = [g for g in gains if np.isfinite(g)]
        floor = min(finite_only) if finite_only else 0.0
        finite = np.asarray([g if np.isfinite(g) else floor for g in gains])
        gvar = max(float(np.var(finite)), 1e-10)
        if surrogate_params is None:
            surrogate_params = KernelParams(gvar, 1.0, max(1e-6 * gvar, 1e-12))
        surrogate, surrogate_params = _fit_surrogate(coords[probed], finite,
                                                     surrogate_params)
        remaining = np.setdiff1d(eligible, probed)
        pred = full_gp.predict_full(surrogate, coords[remaining])
        best = float(np.max(finite))
        xi = 0.01 * float(np.std(finite))
        sd = np.sqrt(pred.latent_variance)
        shift = pred.latent_mean - best - xi
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(sd > 0.0, shift / sd, 0.0)
        ei = np.where(sd > 0.0, shift * norm.cdf(z) + sd * norm.pdf(z),
                      np.maximum(shift, 0.0))
        pick = remaining[int(np.argmax(ei))]      # argmax takes the lowest index on ties
        probed.append(int(pick))
        gains.extend(_candidate_gains(model, pool, [pick]))

    best_idx = probed[int(np.argmax(gains))]
    return pool[best_idx].copy()


def _build_model(objective: str, x, y, params, knots, mean_constant) -> SparseGPModel:
    return SparseGPModel(_OBJECTIVE_APPROX[objective], x, y, params, knots, mean_constant)


def _optimize_params_and_knot(objective: str, x, y, params: KernelParams,
                              knots: np.ndarray, active_index: int | None,
                              optimizer_config: OptimizerConfig, mean_constant: float):
    """Ascent over the covariance parameters and, optionally, one knot."""
    knots_fixed = knots.copy()

    def fg(vec):
        p = params.with_log_vector(vec[:3])
        kn = knots_fixed.copy()
        if active_index is not None:
            kn[active_index] = vec[3:]
        model = _build_model(objective, x, y, p, kn, mean_constant)
        return model.objective_grad(active_knot_index=active_index)

    init = params.log_vector()
    if active_index is not None:
        init = np.concatenate([init, knots_fixed[active_index]])
    res = maximize(fg, init, optimizer_config)
    best_params = params.with_log_vector(res.x[:3])
    best_knots = knots_fixed.copy()
    if active_index is not None:
        best_knots[active_index] = res.x[3:]
    model = _build_model(objective, x, y, best_params, best_knots, mean_constant)
    return model, res


def oat_select(x, y, init_params: KernelParams, config: OATConfig,
               optimizer_config: OptimizerConfig | None = None,
               mean_constant: float = 0.0):
    """Run the one-at-a-time selection loop; returns (model, trace).

    Each round proposes one knot from the training inputs, accepts it
    unconditionally, and re-optimizes (log s2, log ell, log tau2) plus the
    new knot's coordinates with earlier knots frozen. The loop stops at
    ``max_knots`` or when a round's improvement falls below
    ``improvement_tol * (|objective| + 1)``.
    """
    x = as_input_matrix(x, "training inputs")
    y = as_vector(y, "training targets")
    if optimizer_config is None:
        optimizer_config = OptimizerConfig()
    master = np.random.SeedSequence(config.rng_seed)
    kmeans_seed, *round_seeds = master.spawn(1 + config.max_knots - config.initial_knot_count)
    trace = SelectionTrace()

    knots = kmeans_init(x, config.initial_knot_count, kmeans_seed)
    t0 = time.perf_counter()
    model, res = _optimize_params_and_knot(config.objective, x, y, init_params, knots,
                                           None, optimizer_config, mean_constant)
    trace.steps.append(SelectionStep(knots.shape[0], float(res.trace[0]), res.fun,
                                     0.0, time.perf_counter() - t0, None))
    if res.stop_reason.startswith("non_finite"):
        trace.stopped_because = f"initial optimization: {res.stop_reason}"
        return model, trace

    pool = x
    for round_seed in round_seeds:
        previous = model.objective()
        tp = time.perf_counter()
        try:
            if config.proposal == "bo":
                location = propose_bo(model, pool, config.bo_budget,
                                      config.bo_initial_design, round_seed)
            else:
                location = propose_rs(model, pool, config.rs_subset_size, round_seed)
        except NumericalError as err:
            trace.stopped_because = f"proposal failed: {err}"
            break
        proposal_seconds = time.perf_counter() - tp

        knots = np.vstack([model.knots.locations, location])
        to = time.perf_counter()
        try:
            model, res = _optimize_params_and_knot(
                config.objective, x, y, model.params, knots, knots.shape[0] - 1,
                optimizer_config, mean_constant)
        except (NumericalError, ValueError) as err:
            trace.stopped_because = f"inner optimization failed: {err}"
            break
        optimize_seconds = time.perf_counter() - to
        trace.steps.append(SelectionStep(knots.shape[0], float(res.trace[0]), res.fun,
                                         proposal_seconds, optimize_seconds,
                                         tuple(location)))
        improvement = res.fun - previous
        if improvement < config.improvement_tol * (abs(previous) + 1.0):
            trace.stopped_because = "improvement below tolerance"
            return model, trace
    if not trace.stopped_because:
        trace.stopped_because = "reached max_knots"
    return model, trace


def simultaneous_optimize(x, y, init_params: KernelParams, init_knots,
                          objective: str = "vfe",
                          optimizer_config: OptimizerConfig | None = None,
                          mean_constant: float = 0.0):
    """Joint ascent over the covariance parameters and all knot coordinates.

    Returns (model, MaximizeResult); the model is rebuilt at the best-seen
    point, so refinement never reports worse than its starting objective.
    """
    x = as_input_matrix(x, "training inputs")
    y = as_vector(y, "training targets")
    knots0 = as_input_matrix(init_knots, "initial knots")
    if optimizer_config is None:
        optimizer_config = OptimizerConfig()
    k, d = knots0.shape

    def fg(vec):
        p = init_params.with_log_vector(vec[:3])
        kn = vec[3:].reshape(k, d)
        model = _build_model(objective, x, y, p, kn, mean_constant)
        return model.objective_grad(all_knots=True)

    init = np.concatenate([init_params.log_vector(), knots0.reshape(-1)])
    res = maximize(fg, init, optimizer_config)
    model = _build_model(objective, x, y, init_params.with_log_vector(res.x[:3]),
                         res.x[3:].reshape(k, d), mean_constant)
    return model, res
