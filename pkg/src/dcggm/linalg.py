"""Dense symmetric linear algebra and the vector norms shared by all solvers.

Matrices are plain float64 numpy arrays.  ``sym_matrix`` is the checked
constructor used at I/O and API boundaries: it rejects non-finite or
materially asymmetric input and symmetrizes the rest, so downstream code can
assume exact symmetry.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import DimensionMismatch, InvalidK, NotPositiveDefinite

# Relative tolerance for accepting nearly-symmetric input.
SYM_RTOL = 1e-12


def sym_matrix(entries) -> np.ndarray:
    """Validate and symmetrize a square matrix.

    Entries must be finite and symmetric to within ``SYM_RTOL`` relative
    tolerance; the returned copy is exactly symmetric ((A + A^T)/2).
    """
    a = np.array(entries, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    gap = np.abs(a - a.T)
    tol = SYM_RTOL * (1.0 + np.abs(a))
    if np.any(gap > tol):
        j, k = np.unravel_index(np.argmax(gap - tol), a.shape)
        raise ValueError(
            f"matrix is not symmetric: entry ({j},{k}) differs from ({k},{j}) "
            f"by {gap[j, k]:.3e}"
        )
    return 0.5 * (a + a.T)


def cholesky(a: np.ndarray) -> np.ndarray:
    """Lower-triangular L with L @ L.T == a.

    Raises ``NotPositiveDefinite`` when the factorization hits a
    non-positive pivot.
    """
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc


def log_det_pd(a: np.ndarray) -> float:
    """log determinant of a positive definite matrix, via Cholesky."""
    l = cholesky(a)
    return 2.0 * float(np.sum(np.log(np.diag(l))))


def inv_pd(a: np.ndarray) -> np.ndarray:
    """Inverse of a positive definite matrix; the result is symmetrized."""
    try:
        factor = cho_factor(a, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    inv = cho_solve(factor, np.eye(a.shape[0]), check_finite=False)
    return 0.5 * (inv + inv.T)


def is_positive_definite(a: np.ndarray) -> bool:
    """True iff the Cholesky factorization succeeds."""
    try:
        np.linalg.cholesky(a)
        return True
    except np.linalg.LinAlgError:
        return False


def soft_threshold(x: float, t: float) -> float:
    """sign(x) * max(|x| - t, 0)."""
    if x > t:
        return x - t
    if x < -t:
        return x + t
    return 0.0


def largest_k_norm(v: np.ndarray, k: int) -> float:
    """Sum of the k largest absolute values of v."""
    v = np.asarray(v, dtype=float).ravel()
    m = v.size
    if not 1 <= k <= m:
        raise InvalidK(f"k must be in [1, {m}], got {k}")
    av = np.abs(v)
    if k == m:
        return float(av.sum())
    return float(np.partition(av, m - k)[m - k:].sum())


def topk_sign_subgradient(v: np.ndarray, k: int, forced=()) -> np.ndarray:
    """Sign vector supported on the k largest-magnitude entries of v.

    ``forced`` indices are always selected (their entries must be nonzero);
    the remaining ``k - len(forced)`` slots go to the largest remaining
    magnitudes, ties broken by larger |v| first, then smaller index.
    """
    v = np.asarray(v, dtype=float).ravel()
    m = v.size
    if not 1 <= k <= m:
        raise InvalidK(f"k must be in [1, {m}], got {k}")
    forced = np.asarray(sorted(forced), dtype=int)
    if forced.size > k:
        raise InvalidK(f"{forced.size} forced indices exceed k={k}")
    if forced.size and np.any(v[forced] == 0.0):
        raise ValueError("forced indices must point at nonzero entries")

    out = np.zeros(m)
    out[forced] = np.sign(v[forced])
    budget = k - forced.size
    if budget > 0:
        mask = np.ones(m, dtype=bool)
        mask[forced] = False
        rest = np.nonzero(mask)[0]
        # lexsort: last key is primary -> |v| descending, then index ascending
        order = rest[np.lexsort((rest, -np.abs(v[rest])))]
        chosen = order[:budget]
        out[chosen] = np.sign(v[chosen])
    return out


def frobenius_sq_diff(a: np.ndarray, b: np.ndarray) -> float:
    """Squared Frobenius norm of a - b."""
    if a.shape != b.shape:
        raise DimensionMismatch(f"shape mismatch: {a.shape} vs {b.shape}")
    d = a - b
    return float(np.sum(d * d))


def save_matrix_csv(path, a: np.ndarray) -> None:
    """Write a matrix as p comma-separated lines at round-trip precision."""
    with open(path, "w") as fh:
        for row in np.atleast_2d(a):
            fh.write(",".join(repr(float(x)) for x in row))
            fh.write("\n")


def load_matrix_csv(path) -> np.ndarray:
    """Read a symmetric matrix written by ``save_matrix_csv``."""
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(f) for f in line.split(",")])
    return sym_matrix(np.array(rows))
