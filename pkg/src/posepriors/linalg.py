"""Dense symmetric linear algebra kernel.

Cyclic Jacobi eigendecomposition, lower Cholesky factorization with an
escalating diagonal-jitter retry policy, and triangular solves. Sized
for pose-covariance work (n up to a few hundred). All routines are pure
functions over float64 ndarrays; inputs are symmetrized defensively so
callers may pass the raw output of a covariance accumulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

_MAX_SWEEPS = 100
_JITTER_ESCALATIONS = 6


def symmetrize(a) -> np.ndarray:
    """Return (A + A.T) / 2 as a fresh float64 array, validating shape."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return (a + a.T) / 2.0


@dataclass(frozen=True)
class EigenDecomp:
    """Orthonormal eigenbasis (columns), eigenvalues sorted descending."""

    basis: np.ndarray
    eigenvalues: np.ndarray


@dataclass(frozen=True)
class CholFactor:
    """Lower-triangular factor L with L @ L.T equal to the (jittered) input.

    log_det is the log-determinant of the factored matrix, i.e.
    2 * sum(log(diag(L))). jitter_applied records the diagonal shift that
    was needed to reach positive definiteness (0.0 for healthy input).
    """

    lower: np.ndarray
    log_det: float
    jitter_applied: float

    @property
    def n(self) -> int:
        return self.lower.shape[0]


def jacobi_eigen(a, tol: float = 1e-12) -> EigenDecomp:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps rotate away off-diagonal entries until the largest one drops
    below ``tol``. Eigenpairs come back sorted by descending eigenvalue,
    and each basis column is flipped so its largest-magnitude entry is
    non-negative, which makes the first principal component deterministic.

    Raises NumericalError if 100 sweeps do not converge.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    d = symmetrize(a)
    n = d.shape[0]
    v = np.eye(n)

    if n == 1:
        return EigenDecomp(basis=v, eigenvalues=d[0, :1].copy())

    iu = np.triu_indices(n, k=1)
    off = float(np.max(np.abs(d[iu])))
    for _ in range(_MAX_SWEEPS):
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = d[p, q]
                if apq == 0.0:
                    continue
                tau = (d[q, q] - d[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(tau) + math.hypot(1.0, tau))
                if tau < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # A <- J.T A J with J the (p, q) plane rotation.
                cp = d[:, p].copy()
                cq = d[:, q].copy()
                d[:, p] = c * cp - s * cq
                d[:, q] = s * cp + c * cq
                rp = d[p, :].copy()
                rq = d[q, :].copy()
                d[p, :] = c * rp - s * rq
                d[q, :] = s * rp + c * rq
                d[p, q] = 0.0
                d[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        off = float(np.max(np.abs(d[iu])))
    else:
        raise NumericalError(
            f"jacobi_eigen did not converge after {_MAX_SWEEPS} sweeps; "
            f"max off-diagonal magnitude {off:.3e}"
        )

    eigenvalues = np.diag(d).copy()
    order = np.argsort(-eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    basis = v[:, order]
    for j in range(n):
        k = int(np.argmax(np.abs(basis[:, j])))
        if basis[k, j] < 0.0:
            basis[:, j] = -basis[:, j]
    return EigenDecomp(basis=basis, eigenvalues=eigenvalues)


def _chol_attempt(a: np.ndarray, jitter: float) -> np.ndarray | None:
    n = a.shape[0]
    aj = a if jitter == 0.0 else a + jitter * np.eye(n)
    lower = np.zeros_like(aj)
    for j in range(n):
        pivot = aj[j, j] - lower[j, :j] @ lower[j, :j]
        if not (pivot > 0.0) or not math.isfinite(pivot):
            return None
        ljj = math.sqrt(pivot)
        lower[j, j] = ljj
        if j + 1 < n:
            lower[j + 1 :, j] = (aj[j + 1 :, j] - lower[j + 1 :, :j] @ lower[j, :j]) / ljj
    return lower


def cholesky(a, base_jitter: float = 1e-10) -> CholFactor:
    """Lower Cholesky factorization with escalating diagonal jitter.

    A failed pivot triggers retries with base_jitter * 10**k added to the
    diagonal, k = 0..5. Raises NumericalError once escalation is exhausted.
    """
    if base_jitter < 0:
        raise ValueError("base_jitter must be non-negative")
    a = symmetrize(a)
    jitters = [0.0] + [base_jitter * 10.0**k for k in range(_JITTER_ESCALATIONS)]
    for jitter in jitters:
        lower = _chol_attempt(a, jitter)
        if lower is not None:
            log_det = 2.0 * float(np.sum(np.log(np.diag(lower))))
            return CholFactor(lower=lower, log_det=log_det, jitter_applied=jitter)
    raise NumericalError("matrix not positive definite")


def chol_solve(f: CholFactor, b) -> np.ndarray:
    """Solve (L @ L.T) y = b by forward then backward substitution."""
    b = np.asarray(b, dtype=float)
    if b.shape != (f.n,):
        raise ValueError(f"rhs has shape {b.shape}, expected ({f.n},)")
    return chol_solve_many(f, b[:, None])[:, 0]


def chol_solve_many(f: CholFactor, b: np.ndarray) -> np.ndarray:
    """Column-wise chol_solve for an (n, m) right-hand-side block."""
    lower = f.lower
    n = f.n
    b = np.asarray(b, dtype=float)
    if b.ndim != 2 or b.shape[0] != n:
        raise ValueError(f"rhs block has shape {b.shape}, expected ({n}, m)")
    y = np.empty_like(b)
    for i in range(n):
        y[i] = (b[i] - lower[i, :i] @ y[:i]) / lower[i, i]
    x = np.empty_like(b)
    for i in range(n - 1, -1, -1):
        x[i] = (y[i] - lower[i + 1 :, i] @ x[i + 1 :]) / lower[i, i]
    return x
