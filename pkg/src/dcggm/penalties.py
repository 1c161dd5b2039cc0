"""SCAD and adaptive-lasso precision estimators as reweighted glasso fits.

SCAD is handled by local linear approximation: each round replaces the
entrywise penalty with the SCAD derivative evaluated at the previous
iterate and re-solves the resulting weighted glasso.  The adaptive lasso
weights a single glasso fit by 1/|omega_tilde|^gamma from a pilot
estimate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .glasso import GlassoOptions, GlassoSolution, glasso_fit
from .linalg import sym_matrix


@dataclass
class ScadParams:
    lam: float
    a: float = 3.7

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"lam must be nonnegative, got {self.lam}")
        if self.a <= 2:
            raise ValueError(f"a must exceed 2, got {self.a}")


@dataclass
class AdaptiveParams:
    lam: float
    gamma: float = 0.5
    weight_cap: float = 1e6

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"lam must be nonnegative, got {self.lam}")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")


def scad_value(x: float, params: ScadParams) -> float:
    """Three-branch SCAD penalty value at x."""
    lam, a = params.lam, params.a
    ax = abs(x)
    if ax <= lam:
        return lam * ax
    if ax <= a * lam:
        return (a * lam * ax - (ax * ax + lam * lam) / 2.0) / (a - 1.0)
    return (a + 1.0) * lam * lam / 2.0


def scad_weight(x: float, params: ScadParams) -> float:
    """SCAD derivative in |x|, the local-linear-approximation weight."""
    lam, a = params.lam, params.a
    ax = abs(x)
    if ax <= lam:
        return lam
    return max(a * lam - ax, 0.0) / (a - 1.0)


def scad_objective(omega, s, params: ScadParams) -> float:
    """-log|Omega| + tr(Omega S) + sum_jk SCAD(omega_jk)."""
    from .linalg import log_det_pd

    omega = np.asarray(omega, dtype=float)
    s = np.asarray(s, dtype=float)
    pen = sum(scad_value(x, params) for x in omega.ravel())
    return -log_det_pd(omega) + float(np.sum(omega * s)) + pen


def scad_fit(s, params: ScadParams, opts: GlassoOptions | None = None,
             lla_rounds: int = 3) -> GlassoSolution:
    """SCAD-penalized precision estimate by iterated reweighted glasso.

    Starts from the plain glasso fit at params.lam, then runs
    ``lla_rounds`` rounds where each entry's weight is the SCAD derivative
    at the previous estimate.
    """
    s = sym_matrix(s)
    sol = glasso_fit(s, params.lam, opts)
    weight = np.vectorize(lambda x: scad_weight(x, params))
    for _ in range(lla_rounds):
        lam_mat = weight(sol.omega)
        sol = glasso_fit(s, lam_mat, opts)
    return sol


def adaptive_weights(omega_tilde, params: AdaptiveParams) -> np.ndarray:
    """Entrywise weights lam / |omega_tilde|^gamma, capped at lam * weight_cap."""
    omega_tilde = sym_matrix(omega_tilde)
    cap = params.lam * params.weight_cap
    mag = np.abs(omega_tilde)
    raw = np.full_like(mag, cap)
    nz = mag > 0
    raw[nz] = params.lam / mag[nz] ** params.gamma
    return np.minimum(raw, cap)


def pilot_penalty(s) -> float:
    """Penalty for the pilot fit: a tenth of the largest off-diagonal of s."""
    s = np.asarray(s, dtype=float)
    p = s.shape[0]
    if p < 2:
        return 0.0
    off = np.abs(s[~np.eye(p, dtype=bool)])
    return 0.1 * float(off.max())


def adaptive_fit(s, params: AdaptiveParams,
                 opts: GlassoOptions | None = None) -> GlassoSolution:
    """Adaptive-lasso precision estimate.

    A pilot glasso fit at a tenth of the largest off-diagonal of s plays
    the role of the consistent initial estimator; its entries set the
    weights for the final weighted glasso.
    """
    s = sym_matrix(s)
    pilot = glasso_fit(s, pilot_penalty(s), opts)
    return glasso_fit(s, adaptive_weights(pilot.omega, params), opts)
