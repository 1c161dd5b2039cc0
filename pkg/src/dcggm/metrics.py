"""Edge-recovery metrics and the held-out negative log-likelihood."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .linalg import log_det_pd


@dataclass
class ConfusionCounts:
    tp: int
    fp: int
    fn: int


def edge_support(omega, zero_tol: float = 1e-8) -> set:
    """Upper-triangle pairs (j, k), j < k, with |omega_jk| above zero_tol."""
    omega = np.asarray(omega, dtype=float)
    ju, ku = np.triu_indices(omega.shape[0], 1)
    mask = np.abs(omega[ju, ku]) > zero_tol
    return set(zip(ju[mask].tolist(), ku[mask].tolist()))


def confusion(omega_hat, omega_true, zero_tol: float = 1e-8) -> ConfusionCounts:
    """Edge confusion counts of an estimate against the truth."""
    omega_hat = np.asarray(omega_hat, dtype=float)
    omega_true = np.asarray(omega_true, dtype=float)
    if omega_hat.shape != omega_true.shape:
        raise DimensionMismatch(
            f"shape mismatch: {omega_hat.shape} vs {omega_true.shape}"
        )
    hat = edge_support(omega_hat, zero_tol)
    true = edge_support(omega_true, zero_tol)
    tp = len(hat & true)
    return ConfusionCounts(tp=tp, fp=len(hat) - tp, fn=len(true) - tp)


def f1_score(c: ConfusionCounts) -> float:
    """Harmonic mean of edge precision and recall; 0 when tp is 0."""
    if c.tp == 0:
        return 0.0
    precision = c.tp / (c.tp + c.fp)
    recall = c.tp / (c.tp + c.fn)
    return 2.0 * precision * recall / (precision + recall)


def holdout_neg_loglik(omega, s_test) -> float:
    """-log|Omega| + tr(Omega S_test), the held-out fit criterion."""
    omega = np.asarray(omega, dtype=float)
    s_test = np.asarray(s_test, dtype=float)
    if omega.shape != s_test.shape:
        raise DimensionMismatch(
            f"shape mismatch: {omega.shape} vs {s_test.shape}"
        )
    return -log_det_pd(omega) + float(np.sum(omega * s_test))
