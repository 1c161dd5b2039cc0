"""Blockwise coordinate-descent graphical lasso with entrywise penalties.

The solver follows the classical covariance-update scheme: each column of
the working covariance estimate W is refreshed by an L1-penalized
regression against the remaining block, and the precision matrix is
reconstructed from the regression coefficients, which preserves exact
zeros.  Penalties are either a single scalar applied to every entry or a
full symmetric matrix of entrywise weights (used by the SCAD and
adaptive-lasso wrappers).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import glasso_kernel, lasso_cd_kernel
from .errors import DimensionMismatch, NonConvergence
from .linalg import cholesky, inv_pd, log_det_pd, sym_matrix


@dataclass
class GlassoOptions:
    """Convergence controls for ``glasso_fit``.

    tol is relative to the mean absolute off-diagonal of the input;
    inner_tol bounds the coordinate moves of the per-column lasso.
    """

    tol: float = 1e-5
    max_sweeps: int = 200
    inner_tol: float = 1e-7
    penalize_diagonal: bool = True

    def __post_init__(self):
        if self.tol <= 0 or self.inner_tol <= 0:
            raise ValueError("tol and inner_tol must be positive")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be at least 1")


@dataclass
class GlassoSolution:
    """Fitted precision/covariance pair with convergence diagnostics."""

    omega: np.ndarray
    sigma: np.ndarray
    sweeps: int
    converged: bool
    kkt_residual: float


def penalty_matrix(penalty, p: int) -> np.ndarray:
    """Normalize a scalar or matrix penalty to a full p x p weight matrix."""
    if np.isscalar(penalty):
        lam = float(penalty)
        if lam < 0 or not np.isfinite(lam):
            raise ValueError(f"scalar penalty must be finite and >= 0, got {penalty}")
        return np.full((p, p), lam)
    lam = sym_matrix(penalty)
    if lam.shape[0] != p:
        raise DimensionMismatch(
            f"penalty matrix is {lam.shape[0]}x{lam.shape[0]}, expected {p}x{p}"
        )
    if np.any(lam < 0):
        raise ValueError("penalty entries must be nonnegative")
    return lam


def lasso_cd(q, b, rho, beta0=None, inner_tol: float = 1e-7,
             max_sweeps: int = 2000) -> np.ndarray:
    """Solve min_beta 0.5 beta'q beta - b'beta + sum(rho_j |beta_j|).

    Parameters
    ----------
    q : (m, m) symmetric positive definite array
    b : (m,) array
    rho : scalar or (m,) nonnegative penalty weights
    beta0 : optional warm start, defaults to zeros
    inner_tol : stop once the largest coordinate move in a sweep is at
        most inner_tol * (1 + max|beta|)
    max_sweeps : sweep budget; ``NonConvergence`` is raised when exhausted

    Returns
    -------
    (m,) solution vector.
    """
    q = sym_matrix(q)
    b = np.asarray(b, dtype=float).ravel()
    m = b.size
    if q.shape[0] != m:
        raise DimensionMismatch(f"q is {q.shape}, b has length {m}")
    cholesky(q)  # positive definiteness gate
    if np.isscalar(rho):
        rho = np.full(m, float(rho))
    else:
        rho = np.asarray(rho, dtype=float).ravel()
        if rho.size != m:
            raise DimensionMismatch(f"rho has length {rho.size}, expected {m}")
    if np.any(rho < 0):
        raise ValueError("rho entries must be nonnegative")
    beta = np.zeros(m) if beta0 is None else np.array(beta0, dtype=float).ravel()
    if beta.size != m:
        raise DimensionMismatch(f"beta0 has length {beta.size}, expected {m}")
    _, converged = lasso_cd_kernel(q, b, rho, beta, inner_tol, max_sweeps)
    if not converged:
        raise NonConvergence(f"lasso did not converge within {max_sweeps} sweeps")
    return beta


def glasso_fit(s, penalty, opts: GlassoOptions | None = None,
               warm: GlassoSolution | None = None) -> GlassoSolution:
    """Fit an L1-penalized precision matrix by blockwise coordinate descent.

    Parameters
    ----------
    s : symmetric matrix with positive diagonal (sample covariance)
    penalty : scalar lambda or symmetric nonnegative weight matrix
    opts : GlassoOptions; defaults used when omitted
    warm : optional previous solution on the same dimension; its
        covariance and regression coefficients seed the sweep.  Cold
        starts initialize the covariance at s plus the penalized diagonal.

    Returns
    -------
    GlassoSolution with a positive definite ``omega`` carrying exact zeros,
    the covariance estimate ``sigma``, and the KKT residual of the fit.
    Non-convergence is reported through ``converged=False`` on the best
    iterate rather than an exception.
    """
    if opts is None:
        opts = GlassoOptions()
    s = sym_matrix(s)
    p = s.shape[0]
    if np.any(np.diag(s) <= 0):
        raise ValueError("s must have a strictly positive diagonal")
    lam = penalty_matrix(penalty, p)

    diag = np.diag(s) + (np.diag(lam) if opts.penalize_diagonal else 0.0)
    if warm is None:
        w = s.copy()
        np.fill_diagonal(w, diag)
        bmat = np.zeros((p, max(p - 1, 1)))
    else:
        if warm.sigma.shape[0] != p:
            raise DimensionMismatch(
                f"warm start is {warm.sigma.shape[0]}-dimensional, expected {p}"
            )
        w = warm.sigma.copy()
        np.fill_diagonal(w, diag)
        bmat = np.empty((p, max(p - 1, 1)))
        for i in range(p):
            idx = np.arange(p) != i
            bmat[i, : p - 1] = -warm.omega[idx, i] / warm.omega[i, i]
    cholesky(w)  # sigma_0 must be positive definite

    omega = np.zeros((p, p))
    sweeps, converged = glasso_kernel(
        s, lam, w, omega, bmat,
        opts.tol, opts.inner_tol, opts.max_sweeps, 10 * opts.max_sweeps,
    )
    residual = kkt_residual(omega, s, lam)
    return GlassoSolution(omega=omega, sigma=w, sweeps=sweeps,
                          converged=converged, kkt_residual=residual)


def kkt_residual(omega, s, penalty) -> float:
    """Largest violation of the penalized stationarity system.

    For nonzero entries: |(S - Omega^-1)_jk + lam_jk sign(omega_jk)|;
    for zeros: the excess of |(S - Omega^-1)_jk| over the feasibility
    slack lam_jk.
    """
    omega = np.asarray(omega, dtype=float)
    s = np.asarray(s, dtype=float)
    lam = penalty_matrix(penalty, omega.shape[0])
    grad = s - inv_pd(omega)
    nz = omega != 0.0
    viol_nz = np.abs(grad + lam * np.sign(omega))
    viol_z = np.abs(grad) - lam
    res = np.where(nz, viol_nz, np.maximum(viol_z, 0.0))
    return float(res.max())


def objective_penalized(omega, s, penalty) -> float:
    """-log|Omega| + tr(Omega S) + sum_jk lam_jk |omega_jk|."""
    omega = np.asarray(omega, dtype=float)
    s = np.asarray(s, dtype=float)
    lam = penalty_matrix(penalty, omega.shape[0])
    return (-log_det_pd(omega) + float(np.sum(omega * s))
            + float(np.sum(lam * np.abs(omega))))
