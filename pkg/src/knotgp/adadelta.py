"""ADADELTA ascent over an unconstrained parameter vector.

The update keeps decayed accumulators of squared gradients and squared
updates; the ratio of their root means sets a per-coordinate step whose
units match the parameters, so no global learning rate is needed. Everything
here is phrased as maximization to match the objective conventions of the
rest of the package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .common import NumericalError


@dataclass(frozen=True)
class OptimizerConfig:
    rho: float = 0.95
    epsilon: float = 1e-6
    max_steps: int = 1000
    rel_tol: float = 1e-5
    patience: int = 10

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"rho must lie in (0, 1), got {self.rho}")
        if self.epsilon <= 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be at least 1, got {self.max_steps}")
        if self.rel_tol <= 0.0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.patience < 1:
            raise ValueError(f"patience must be at least 1, got {self.patience}")


@dataclass
class OptimState:
    sq_grad: np.ndarray      # decayed E[g^2]
    sq_update: np.ndarray    # decayed E[delta^2]
    step_count: int = 0

    @classmethod
    def zeros(cls, n: int) -> "OptimState":
        return cls(np.zeros(n), np.zeros(n), 0)


def adadelta_step(state: OptimState, params, grad, config: OptimizerConfig):
    """One ascent step; returns (new state, new params). Inputs are not mutated."""
    params = np.asarray(params, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if params.shape != grad.shape or params.shape != state.sq_grad.shape:
        raise ValueError("parameter, gradient and accumulator lengths must agree")
    if not np.all(np.isfinite(grad)):
        raise NumericalError("non-finite gradient passed to adadelta_step")
    rho, eps = config.rho, config.epsilon
    sq_grad = rho * state.sq_grad + (1.0 - rho) * grad ** 2
    step = np.sqrt(state.sq_update + eps) / np.sqrt(sq_grad + eps) * grad
    sq_update = rho * state.sq_update + (1.0 - rho) * step ** 2
    return OptimState(sq_grad, sq_update, state.step_count + 1), params + step


@dataclass
class MaximizeResult:
    x: np.ndarray            # best-seen parameter vector
    fun: float               # best-seen objective value
    trace: np.ndarray        # objective value at init and after each step
    n_steps: int
    stop_reason: str = "max_steps"


def maximize(objective_with_grad, init, config: OptimizerConfig | None = None) -> MaximizeResult:
    """Run ADADELTA ascent on a callable returning (value, gradient).

    Stops at ``max_steps`` or once the objective has moved by no more than
    ``rel_tol * (|old| + 1)`` over the last ``patience`` steps. Returns the
    best-seen point, which need not be the last one. A non-finite objective
    at the initial point raises; a non-finite value or gradient mid-run
    reverts to the best-seen point and stops with a diagnostic reason.
    """
    if config is None:
        config = OptimizerConfig()
    x = np.asarray(init, dtype=float).copy()
    value, grad = objective_with_grad(x)
    if not np.isfinite(value):
        raise ValueError(f"objective is non-finite at the initial point: {value}")
    trace = [float(value)]
    best_x, best_f = x.copy(), float(value)
    state = OptimState.zeros(x.size)
    stop_reason = "max_steps"
    for t in range(1, config.max_steps + 1):
        try:
            state, x = adadelta_step(state, x, grad, config)
        except NumericalError:
            stop_reason = "non_finite_gradient"
            break
        value, grad = objective_with_grad(x)
        if not np.isfinite(value):
            stop_reason = "non_finite_objective"
            break
        trace.append(float(value))
        if value > best_f:
            best_x, best_f = x.copy(), float(value)
        if t >= config.patience:
            old = trace[t - config.patience]
            if abs(trace[t] - old) <= config.rel_tol * (abs(old) + 1.0):
                stop_reason = "converged"
                break
    return MaximizeResult(best_x, best_f, np.asarray(trace), len(trace) - 1, stop_reason)
