"""Closed-form pose prior families behind one contract.

Every fitted model exposes log_prob(x) -> float and grad_log_prob(x) ->
vector, everything in log space (a raw 66-dimensional Gaussian PDF
underflows float64). Families: soft box limits, multivariate normal,
per-dimension gamma with sign/shift, Gaussian mixtures fit by EM, and a
temporal mixture over (dt, dtheta) motion deltas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import NumericalError
from .posedata import TemporalDelta

LOG_2PI = math.log(2.0 * math.pi)


def _samples_of(data) -> np.ndarray:
    x = np.asarray(getattr(data, "samples", data), dtype=float)
    if x.ndim != 2:
        raise ValueError("expected a 2-D sample array or a PoseDataset")
    return x


def _check_vec(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (dim,):
        raise ValueError(f"vector has shape {x.shape}, expected ({dim},)")
    if not np.all(np.isfinite(x)):
        raise ValueError("vector has non-finite entries")
    return x


def _logsumexp(a: np.ndarray, axis: int) -> np.ndarray:
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        return np.log(np.sum(np.exp(a - m), axis=axis)) + np.squeeze(m, axis=axis)


# ---------------------------------------------------------------------------
# Multivariate normal


@dataclass
class MvnModel:
    """Gaussian over pose vectors; covariance kept with its Cholesky factor."""

    mean: np.ndarray
    cov: np.ndarray
    chol: linalg.CholFactor
    fit_meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def log_prob(self, x) -> float:
        x = _check_vec(x, self.dim)
        z = x - self.mean
        q = float(z @ linalg.chol_solve(self.chol, z))
        return -0.5 * (self.dim * LOG_2PI + self.chol.log_det + q)

    def log_prob_many(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        z = xs - self.mean
        y = linalg.chol_solve_many(self.chol, z.T)
        q = np.einsum("dn,nd->n", y, z)
        return -0.5 * (self.dim * LOG_2PI + self.chol.log_det + q)

    def grad_log_prob(self, x) -> np.ndarray:
        x = _check_vec(x, self.dim)
        return -linalg.chol_solve(self.chol, x - self.mean)

    def mode(self) -> np.ndarray:
        return self.mean.copy()

    def mean_vector(self) -> np.ndarray:
        return self.mean.copy()


def mvn_from_moments(mean, cov, base_jitter: float = 1e-10, fit_meta=None) -> MvnModel:
    mean = np.asarray(mean, dtype=float)
    cov = linalg.symmetrize(cov)
    chol = linalg.cholesky(cov, base_jitter=base_jitter)
    meta = dict(fit_meta or {})
    meta.setdefault("jitter", chol.jitter_applied)
    return MvnModel(mean=mean, cov=cov, chol=chol, fit_meta=meta)


def fit_mvn(data) -> MvnModel:
    """Sample mean and unbiased covariance, factored with jitter escalation."""
    x = _samples_of(data)
    if x.shape[0] < 2:
        raise ValueError("fit_mvn needs at least 2 samples")
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (x.shape[0] - 1)
    model = mvn_from_moments(mean, cov)
    model.fit_meta.update(
        seed=None,
        iterations=None,
        final_loglik=float(np.sum(model.log_prob_many(x))),
    )
    return model


# ---------------------------------------------------------------------------
# Per-dimension gamma


@dataclass
class GammaModel:
    """Independent gamma per dimension with sign and shift.

    Support per dimension is sign * (x - shift) > 0. Queries outside the
    support score -inf (a comparable sentinel for optimizers), never an
    exception; gradients outside the support do raise.
    """

    alpha: np.ndarray
    beta: np.ndarray
    sign: np.ndarray
    shift: np.ndarray
    fit_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=float)
        self.beta = np.asarray(self.beta, dtype=float)
        self.sign = np.asarray(self.sign, dtype=float)
        self.shift = np.asarray(self.shift, dtype=float)
        if np.any(self.alpha <= 0.0) or np.any(self.beta <= 0.0):
            raise ValueError("gamma shape and rate must be positive")
        if not np.all(np.isin(self.sign, (-1.0, 1.0))):
            raise ValueError("sign entries must be -1 or +1")
        # Normalizing constant is fixed per model; lgamma once, not per query.
        self._log_norm = float(
            np.sum(self.alpha * np.log(self.beta))
            - sum(math.lgamma(a) for a in self.alpha)
        )

    @property
    def dim(self) -> int:
        return self.alpha.shape[0]

    def _support_coords(self, x) -> np.ndarray:
        return self.sign * (x - self.shift)

    def log_prob(self, x) -> float:
        x = _check_vec(x, self.dim)
        y = self._support_coords(x)
        if np.any(y <= 0.0):
            return float("-inf")
        return self._log_norm + float(np.sum((self.alpha - 1.0) * np.log(y) - self.beta * y))

    def log_prob_many(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        y = self.sign * (xs - self.shift)
        ok = np.all(y > 0.0, axis=1)
        out = np.full(xs.shape[0], -np.inf)
        if np.any(ok):
            yo = y[ok]
            out[ok] = self._log_norm + np.sum(
                (self.alpha - 1.0) * np.log(yo) - self.beta * yo, axis=1
            )
        return out

    def grad_log_prob(self, x) -> np.ndarray:
        x = _check_vec(x, self.dim)
        y = self._support_coords(x)
        if np.any(y <= 0.0):
            raise ValueError("point is on or outside the gamma support boundary")
        return self.sign * ((self.alpha - 1.0) / y - self.beta)

    def mode(self) -> np.ndarray:
        # True mode sits on the support boundary when alpha < 1; fall back
        # to the mean there so the result is strictly inside the support.
        inner = np.where(self.alpha >= 1.0, self.alpha - 1.0, self.alpha)
        return self.shift + self.sign * inner / self.beta

    def mean_vector(self) -> np.ndarray:
        return self.shift + self.sign * self.alpha / self.beta


def fit_gamma(data, margin: float = 1e-6) -> GammaModel:
    """Method-of-moments gamma fit with per-dimension sign and shift.

    Orientation follows the sample skewness (s = +1 when skewness >= 0).
    The shift places the support boundary just outside the data range so
    every training point stays strictly interior.
    """
    x = _samples_of(data)
    n = x.shape[0]
    if n < 10:
        raise ValueError("fit_gamma needs at least 10 samples")
    mean = x.mean(axis=0)
    centered = x - mean
    var_pop = np.mean(centered**2, axis=0)
    if np.any(var_pop <= 0.0):
        bad = int(np.argmax(var_pop <= 0.0))
        raise ValueError(f"zero variance in dimension {bad}")
    skew = np.mean(centered**3, axis=0) / var_pop**1.5
    sign = np.where(skew >= 0.0, 1.0, -1.0)
    shift = np.where(sign > 0.0, x.min(axis=0) - margin, x.max(axis=0) + margin)
    y = sign * (x - shift)
    my = y.mean(axis=0)
    vy = y.var(axis=0, ddof=1)
    alpha = my**2 / vy
    beta = my / vy
    return GammaModel(
        alpha=alpha,
        beta=beta,
        sign=sign,
        shift=shift,
        fit_meta={"seed": None, "jitter": None, "iterations": None, "final_loglik": None},
    )


# ---------------------------------------------------------------------------
# Gaussian mixture


@dataclass
class GmmModel:
    """Mixture of full-covariance Gaussians; weights kept normalized."""

    weights: np.ndarray
    means: np.ndarray
    covs: np.ndarray
    fit_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.means = np.asarray(self.means, dtype=float)
        self.covs = np.asarray(self.covs, dtype=float)
        if np.any(self.weights <= 0.0):
            raise ValueError("mixture weights must be positive")
        self.weights = self.weights / self.weights.sum()
        self._chols = [linalg.cholesky(c) for c in self.covs]
        self._log_w = np.log(self.weights)

    @property
    def n_components(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def _component_log_joint(self, x: np.ndarray) -> np.ndarray:
        out = np.empty(self.n_components)
        for i, chol in enumerate(self._chols):
            z = x - self.means[i]
            q = float(z @ linalg.chol_solve(chol, z))
            out[i] = self._log_w[i] - 0.5 * (self.dim * LOG_2PI + chol.log_det + q)
        return out

    def log_prob(self, x) -> float:
        x = _check_vec(x, self.dim)
        return float(_logsumexp(self._component_log_joint(x), axis=0))

    def log_prob_many(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        comp = np.empty((xs.shape[0], self.n_components))
        for i, chol in enumerate(self._chols):
            z = xs - self.means[i]
            y = linalg.chol_solve_many(chol, z.T)
            q = np.einsum("dn,nd->n", y, z)
            comp[:, i] = self._log_w[i] - 0.5 * (self.dim * LOG_2PI + chol.log_det + q)
        return _logsumexp(comp, axis=1)

    def responsibilities(self, x) -> np.ndarray:
        x = _check_vec(x, self.dim)
        lj = self._component_log_joint(x)
        return np.exp(lj - _logsumexp(lj, axis=0))

    def grad_log_prob(self, x) -> np.ndarray:
        x = _check_vec(x, self.dim)
        r = self.responsibilities(x)
        grad = np.zeros(self.dim)
        for i, chol in enumerate(self._chols):
            grad -= r[i] * linalg.chol_solve(chol, x - self.means[i])
        return grad

    def mode(self) -> np.ndarray:
        # Approximate: the component mean with the highest mixture density.
        best = int(np.argmax([self.log_prob(m) for m in self.means]))
        return self.means[best].copy()

    def mean_vector(self) -> np.ndarray:
        return self.weights @ self.means


def _kmeanspp_seeds(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = np.sum((x - x[chosen[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            j = int(rng.integers(n))
        else:
            j = int(rng.choice(n, p=d2 / total))
        chosen.append(j)
        d2 = np.minimum(d2, np.sum((x - x[j]) ** 2, axis=1))
    return x[chosen].copy()


def fit_gmm_em(data, k: int, seed: int = 0, reg: float = 1e-6, tol: float = 1e-8,
               max_iter: int = 500) -> GmmModel:
    """EM fit with k-means++ seeding and log-sum-exp responsibilities.

    Covariance M-steps divide by N_i * (N - 1) / N, which reduces to the
    unbiased N - 1 divisor at k = 1 so a one-component fit lands exactly
    on fit_mvn's moments (with reg = 0). A component whose responsibility
    mass collapses is re-seeded from the lowest-likelihood point, at most
    three times. Returns the model with its log-likelihood trace in
    fit_meta["loglik_trace"].
    """
    x = _samples_of(data)
    n, d = x.shape
    if k < 1:
        raise ValueError("k must be >= 1")
    if n < k:
        raise ValueError(f"need at least k={k} samples, got {n}")
    if reg < 0.0:
        raise ValueError("reg must be non-negative")
    if n < 2:
        raise ValueError("fit_gmm_em needs at least 2 samples")

    rng = np.random.default_rng(seed)
    centered = x - x.mean(axis=0)
    global_cov = linalg.symmetrize(centered.T @ centered / (n - 1))

    means = _kmeanspp_seeds(x, k, rng)
    weights = np.full(k, 1.0 / k)
    covs = np.repeat(global_cov[None, :, :], k, axis=0)
    chols = [linalg.cholesky(c) for c in covs]
    eye = np.eye(d)

    trace: list[float] = []
    reseeds = 0
    converged = False
    for _ in range(max_iter):
        comp = np.empty((n, k))
        for i in range(k):
            z = x - means[i]
            y = linalg.chol_solve_many(chols[i], z.T)
            q = np.einsum("dn,nd->n", y, z)
            comp[:, i] = math.log(weights[i]) - 0.5 * (d * LOG_2PI + chols[i].log_det + q)
        ll_n = _logsumexp(comp, axis=1)
        ll = float(np.sum(ll_n))
        trace.append(ll)
        if len(trace) >= 2 and ll - trace[-2] < tol * abs(trace[-2]):
            converged = True
            break

        r = np.exp(comp - ll_n[:, None])
        nk = r.sum(axis=0)
        dead = np.nonzero(nk < 1e-12)[0]
        if dead.size:
            reseeds += 1
            if reseeds > 3:
                raise NumericalError(
                    f"mixture component collapsed after {reseeds - 1} re-seeds"
                )
            worst = int(np.argmin(ll_n))
            for i in dead:
                means[i] = x[worst]
                covs[i] = global_cov
                chols[i] = linalg.cholesky(covs[i])
            weights = np.full(k, 1.0 / k)
            continue

        weights = nk / n
        means = (r.T @ x) / nk[:, None]
        denom = nk * (n - 1) / n
        for i in range(k):
            z = x - means[i]
            s = (z * r[:, i : i + 1]).T @ z / denom[i]
            covs[i] = linalg.symmetrize(s) + reg * eye
            chols[i] = linalg.cholesky(covs[i])

    model = GmmModel(weights=weights, means=means, covs=covs)
    model.fit_meta.update(
        seed=seed,
        jitter=max(c.jitter_applied for c in model._chols),
        iterations=len(trace),
        final_loglik=trace[-1],
        converged=converged,
        reg=reg,
        loglik_trace=trace,
    )
    return model


# ---------------------------------------------------------------------------
# Temporal mixture over motion deltas


@dataclass
class TemporalGmmModel:
    """GMM over stacked (dt, dtheta) vectors of dimension 1 + D."""

    gmm: GmmModel

    @property
    def dim(self) -> int:
        return self.gmm.dim

    @property
    def fit_meta(self) -> dict:
        return self.gmm.fit_meta

    def log_prob(self, x) -> float:
        return self.gmm.log_prob(x)

    def log_prob_many(self, xs) -> np.ndarray:
        return self.gmm.log_prob_many(xs)

    def grad_log_prob(self, x) -> np.ndarray:
        return self.gmm.grad_log_prob(x)

    def log_prob_delta(self, delta: TemporalDelta) -> float:
        return self.log_prob(delta.stacked())

    def mode(self) -> np.ndarray:
        return self.gmm.mode()

    def mean_vector(self) -> np.ndarray:
        return self.gmm.mean_vector()


def stack_deltas(deltas) -> np.ndarray:
    deltas = list(deltas)
    if not deltas:
        raise ValueError("no temporal deltas given")
    return np.vstack([dlt.stacked() for dlt in deltas])


def fit_temporal_gmm(deltas, k: int, seed: int = 0, reg: float = 1e-6,
                     tol: float = 1e-8, max_iter: int = 500) -> TemporalGmmModel:
    """Stack each delta as (dt, dtheta) and fit the mixture over those rows."""
    rows = stack_deltas(deltas)
    return TemporalGmmModel(gmm=fit_gmm_em(rows, k, seed=seed, reg=reg, tol=tol,
                                           max_iter=max_iter))


# ---------------------------------------------------------------------------
# Soft box limits


@dataclass
class BoxLimitModel:
    """Soft joint-angle box: quadratic log-penalty outside [lo, hi] per dim.

    log_prob is an unnormalized log-density (0 inside the box), C^1 at the
    boundaries so gradient-based pose recovery can cross them smoothly.
    """

    lo: np.ndarray
    hi: np.ndarray
    stiffness: float = 1.0
    fit_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.lo = np.asarray(self.lo, dtype=float)
        self.hi = np.asarray(self.hi, dtype=float)
        if self.lo.shape != self.hi.shape or self.lo.ndim != 1:
            raise ValueError("lo and hi must be vectors of equal length")
        if np.any(self.lo >= self.hi):
            raise ValueError("requires lo < hi in every dimension")
        if not self.stiffness > 0.0:
            raise ValueError("stiffness must be positive")

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    def _violations(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return np.maximum(0.0, x - self.hi), np.maximum(0.0, self.lo - x)

    def log_prob(self, x) -> float:
        x = _check_vec(x, self.dim)
        over, under = self._violations(x)
        return -self.stiffness * float(np.sum(over**2 + under**2))

    def log_prob_many(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        over = np.maximum(0.0, xs - self.hi)
        under = np.maximum(0.0, self.lo - xs)
        return -self.stiffness * np.sum(over**2 + under**2, axis=1)

    def grad_log_prob(self, x) -> np.ndarray:
        x = _check_vec(x, self.dim)
        over, under = self._violations(x)
        return -2.0 * self.stiffness * (over - under)

    def mode(self) -> np.ndarray:
        return (self.lo + self.hi) / 2.0

    def mean_vector(self) -> np.ndarray:
        return self.mode()


def box_from_data(data, stiffness: float = 1.0, margin: float = 0.0) -> BoxLimitModel:
    """Box limits from the per-dimension data range, optionally widened."""
    x = _samples_of(data)
    lo = x.min(axis=0) - margin
    hi = x.max(axis=0) + margin
    flat = lo >= hi
    lo[flat] -= 1e-9
    hi[flat] += 1e-9
    return BoxLimitModel(lo=lo, hi=hi, stiffness=stiffness,
                         fit_meta={"seed": None, "jitter": None,
                                   "iterations": None, "final_loglik": None})
