"""Pose recovery from noisy observations, regularized by a prior.

Minimizes a Gaussian data term plus the negated prior log-probability by
gradient descent with backtracking line search. The Gaussian data term
makes the multivariate-normal case solvable in closed form, which the
tests use as an oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

_MAX_HALVINGS = 30


@dataclass
class Observation:
    """Noisy pose values with a per-dimension observed mask."""

    values: np.ndarray
    noise_sigma: float
    mask: np.ndarray | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or not np.all(np.isfinite(self.values)):
            raise ValueError("observation values must be a finite vector")
        if not (self.noise_sigma > 0.0 and math.isfinite(self.noise_sigma)):
            raise ValueError("noise_sigma must be positive")
        if self.mask is None:
            self.mask = np.ones(self.values.shape[0], dtype=bool)
        else:
            self.mask = np.asarray(self.mask, dtype=bool)
        if self.mask.shape != self.values.shape:
            raise ValueError("mask length must match values")
        if not np.any(self.mask):
            raise ValueError("at least one dimension must be observed")

    @property
    def dim(self) -> int:
        return self.values.shape[0]


@dataclass
class RecoveryResult:
    estimate: np.ndarray
    objective_trace: list
    iterations_used: int
    converged: bool


def _initial_point(obs: Observation, prior, lam: float) -> np.ndarray:
    x = obs.values.copy()
    free = ~obs.mask
    if np.any(free):
        mode_fn = getattr(prior, "mode", None)
        x[free] = mode_fn()[free] if mode_fn is not None else 0.0
    if lam > 0.0 and prior.log_prob(x) == float("-inf"):
        mean_fn = getattr(prior, "mean_vector", None)
        if mean_fn is not None and np.any(free):
            x[free] = mean_fn()[free]
        if prior.log_prob(x) == float("-inf"):
            raise NumericalError("prior assigns zero probability at every initialization")
    return x


def recover_pose(obs: Observation, prior, lam: float, max_iter: int = 500,
                 step: float = 1.0, tol: float = 1e-6) -> RecoveryResult:
    """Minimize sum_masked (x_d - obs_d)^2 / (2 sigma^2) - lam * log_prob(x).

    Each iteration starts at the configured step and halves it until the
    objective strictly decreases (at most 30 halvings), so the objective
    trace is non-increasing by construction. Stops when the gradient
    infinity-norm drops below tol or the iteration budget runs out.
    """
    if lam < 0.0:
        raise ValueError("lam must be non-negative")
    if prior.dim != obs.dim:
        raise ValueError(f"prior dim {prior.dim} does not match observation dim {obs.dim}")
    if max_iter < 1 or step <= 0.0 or tol <= 0.0:
        raise ValueError("invalid optimizer configuration")

    inv_var = 1.0 / (obs.noise_sigma**2)
    mask = obs.mask

    def objective(x: np.ndarray) -> float:
        data = 0.5 * inv_var * float(np.sum((x[mask] - obs.values[mask]) ** 2))
        if lam == 0.0:
            return data
        lp = prior.log_prob(x)
        if lp == float("-inf"):
            return float("inf")
        return data - lam * lp

    def gradient(x: np.ndarray) -> np.ndarray:
        g = np.zeros_like(x)
        g[mask] = inv_var * (x[mask] - obs.values[mask])
        if lam > 0.0:
            g -= lam * prior.grad_log_prob(x)
        return g

    x = _initial_point(obs, prior, lam)
    fx = objective(x)
    trace = [fx]
    converged = False
    iterations = 0
    for it in range(1, max_iter + 1):
        iterations = it
        g = gradient(x)
        if float(np.max(np.abs(g))) < tol:
            converged = True
            break
        t = step
        accepted = False
        for _ in range(_MAX_HALVINGS + 1):
            candidate = x - t * g
            fc = objective(candidate)
            if fc < fx:
                x, fx = candidate, fc
                trace.append(fx)
                accepted = True
                break
            t /= 2.0
        if not accepted:
            break
    return RecoveryResult(
        estimate=x, objective_trace=trace, iterations_used=iterations, converged=converged
    )
