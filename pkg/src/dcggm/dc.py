"""Cardinality-targeted precision estimation by difference-of-convex descent.

The estimator minimizes the Gaussian negative log-likelihood under a bound
K on the number of nonzero entries of vec(Omega).  The bound is written as
a difference of the L1 norm and the largest-K norm, moved into the
objective with a weight eta, and the concave part is linearized at the
current iterate.  Each linearized problem is exactly a graphical-lasso
instance on the shifted matrix S - eta*V with scalar penalty eta, where V
carries the signs of the K dominant entries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EtaUnderflow, InvalidK
from .glasso import GlassoOptions, glasso_fit
from .linalg import (
    frobenius_sq_diff,
    inv_pd,
    is_positive_definite,
    log_det_pd,
    sym_matrix,
)


@dataclass
class DcOptions:
    """Controls for ``dc_fit``.

    k counts entries of vec(Omega) including the diagonal: a target of E
    undirected edges corresponds to k = p + 2E.  eta starts at the minimum
    diagonal of S and shrinks by alpha until the subproblem input is
    positive definite; eps bounds the squared Frobenius step at which the
    outer loop stops.
    """

    k: int
    alpha: float = 0.5
    eps: float = 1e-4
    max_outer: int = 50
    eta_min: float = 1e-12
    inner: GlassoOptions = field(default_factory=GlassoOptions)

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.max_outer < 1:
            raise ValueError("max_outer must be at least 1")


@dataclass
class DcTraceRow:
    """Diagnostics recorded after each outer iteration.

    objective and objective_prev evaluate the penalized objective at the
    new and previous iterate under this iteration's eta, so the descent
    property is checkable row by row.
    """

    t: int
    eta: float
    objective: float
    objective_prev: float
    frob_step: float
    constraint_gap: float


@dataclass
class DcSolution:
    omega: np.ndarray
    trace: list[DcTraceRow]
    converged: bool
    k: int
    kkt_residual: float


def _check_k(k: int, p: int) -> int:
    k = int(k)
    if not p <= k <= p * p:
        raise InvalidK(f"k must be in [p, p^2] = [{p}, {p * p}], got {k}")
    return k


def subgradient_matrix(omega_t: np.ndarray, k: int) -> np.ndarray:
    """Sign matrix of the K dominant entries of omega_t.

    Diagonal positions are always included (unit entries, since the
    diagonal of a positive definite matrix is positive).  Off-diagonal
    slots are filled two at a time so the result stays symmetric: pairs
    are ranked by |omega_jk| descending, ties by smaller row-major index,
    and a final odd slot is left unused.
    """
    omega_t = np.asarray(omega_t, dtype=float)
    p = omega_t.shape[0]
    k = _check_k(k, p)
    if np.any(np.diag(omega_t) <= 0):
        raise ValueError("omega_t must have a positive diagonal")
    v = np.zeros((p, p))
    np.fill_diagonal(v, 1.0)
    n_pairs = (k - p) // 2
    if n_pairs > 0:
        ju, ku = np.triu_indices(p, 1)
        vals = np.abs(omega_t[ju, ku])
        order = np.lexsort((ju * p + ku, -vals))[:n_pairs]
        sel_j, sel_k = ju[order], ku[order]
        signs = np.sign(omega_t[sel_j, sel_k])
        v[sel_j, sel_k] = signs
        v[sel_k, sel_j] = signs
    return v


def select_eta(s: np.ndarray, v: np.ndarray, alpha: float = 0.5,
               eta_min: float = 1e-12) -> float:
    """First eta in min(diag s) * alpha^m keeping s - eta*v positive definite."""
    eta = float(np.min(np.diag(s)))
    while eta >= eta_min:
        if is_positive_definite(s - eta * v):
            return eta
        eta *= alpha
    raise EtaUnderflow(
        f"no eta >= {eta_min} makes s - eta*v positive definite"
    )


def constraint_gap(omega: np.ndarray, k: int) -> float:
    """L1 norm of vec(omega) minus its largest-K norm (never negative).

    Computed as the sum of the p^2 - k smallest absolute entries, which is
    exact and nonnegative by construction.
    """
    omega = np.asarray(omega, dtype=float)
    p = omega.shape[0]
    k = _check_k(k, p)
    av = np.abs(omega).ravel()
    if k == av.size:
        return 0.0
    return float(np.partition(av, av.size - k)[: av.size - k].sum())


def dc_objective(omega, s, eta: float, k: int) -> float:
    """-log|Omega| + tr(Omega S) + eta * constraint_gap(Omega, k)."""
    omega = np.asarray(omega, dtype=float)
    s = np.asarray(s, dtype=float)
    if eta <= 0:
        raise ValueError(f"eta must be positive, got {eta}")
    return (-log_det_pd(omega) + float(np.sum(omega * s))
            + eta * constraint_gap(omega, k))


def linearized_objective(omega, s, eta: float, v) -> float:
    """Convex majorizer: -log|Omega| + tr(Omega S) + eta(||vec||_1 - <Omega, V>)."""
    omega = np.asarray(omega, dtype=float)
    s = np.asarray(s, dtype=float)
    v = np.asarray(v, dtype=float)
    return (-log_det_pd(omega) + float(np.sum(omega * s))
            + eta * (float(np.abs(omega).sum()) - float(np.sum(omega * v))))


def dc_fit(s, opts: DcOptions) -> DcSolution:
    """Run the outer linearization loop until the iterate stabilizes.

    Parameters
    ----------
    s : symmetric positive definite matrix (shrink upstream if needed)
    opts : DcOptions with the cardinality k and stopping controls

    Returns
    -------
    DcSolution.  ``converged`` is False when max_outer was exhausted before
    the squared Frobenius step dropped below opts.eps; the last iterate is
    still returned with its full trace.
    """
    s = sym_matrix(s)
    p = s.shape[0]
    k = _check_k(opts.k, p)
    if np.any(np.diag(s) <= 0):
        raise ValueError("s must have a strictly positive diagonal")

    omega = inv_pd(s + np.eye(p))
    trace: list[DcTraceRow] = []
    converged = False
    last_kkt = float("nan")
    for t in range(opts.max_outer):
        v = subgradient_matrix(omega, k)
        eta = select_eta(s, v, opts.alpha, opts.eta_min)
        sub = glasso_fit(s - eta * v, eta, opts.inner)
        omega_new = sub.omega
        last_kkt = sub.kkt_residual
        step = frobenius_sq_diff(omega_new, omega)
        trace.append(DcTraceRow(
            t=t,
            eta=eta,
            objective=dc_objective(omega_new, s, eta, k),
            objective_prev=dc_objective(omega, s, eta, k),
            frob_step=step,
            constraint_gap=constraint_gap(omega_new, k),
        ))
        omega = omega_new
        if step < opts.eps:
            converged = True
            break
    return DcSolution(omega=omega, trace=trace, converged=converged, k=k,
                      kkt_residual=last_kkt)
