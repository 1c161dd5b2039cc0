"""Ground-truth precision matrices, Gaussian sampling, covariance shrinkage.

Two generators: ``random`` perturbs a symmetrized Gaussian matrix sparsely
and shifts its spectrum so the minimum eigenvalue is exactly 1; ``chain``
keeps a random subset of the 1 / 0.5 / 0.25 two-band pattern.  Sample
covariances are shrunk toward their diagonal: the pipeline uses a
Stein-type weight sized to the sampling noise of the off-diagonal
(``shrink_from_samples``), while ``shrink_covariance`` applies the minimal
weight that restores positive definiteness when only the matrix is known.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .errors import GenerationFailed, InvalidEdgeCount, ShrinkageFailed
from .linalg import (
    cholesky,
    inv_pd,
    is_positive_definite,
    load_matrix_csv,
    save_matrix_csv,
    sym_matrix,
)
from .seeding import derive_seed, make_rng

KINDS = ("random", "chain")


@dataclass
class GroundTruth:
    omega_true: np.ndarray
    sigma_true: np.ndarray
    support: frozenset  # unordered pairs (j, k), 0-based, j < k
    kind: str
    seed: int
    n_nonzero: int


@dataclass
class Dataset:
    x: np.ndarray
    s: np.ndarray
    zeta: float
    n: int
    seed: int


def gen_random_precision(p: int, n_edges: int, seed: int) -> GroundTruth:
    """Sparse symmetrized-Gaussian precision matrix with min eigenvalue 1.

    Exactly ``n_edges`` uniformly chosen upper-triangle entries survive; the
    diagonal shift 1 - lambda_min places the smallest eigenvalue at 1.
    """
    max_edges = p * (p - 1) // 2
    if not 0 <= n_edges <= max_edges:
        raise InvalidEdgeCount(
            f"n_edges must be in [0, {max_edges}] for p={p}, got {n_edges}"
        )
    rng = make_rng(seed)
    a1 = rng.standard_normal((p, p))
    a2 = 0.5 * (a1 + a1.T)
    ju, ku = np.triu_indices(p, 1)
    keep = np.zeros(max_edges, dtype=bool)
    chosen = rng.choice(max_edges, size=n_edges, replace=False)
    keep[chosen] = True
    a2[ju[~keep], ku[~keep]] = 0.0
    a2[ku[~keep], ju[~keep]] = 0.0
    shift = 1.0 - float(np.linalg.eigvalsh(a2)[0])
    omega = a2 + shift * np.eye(p)
    support = frozenset(zip(ju[keep].tolist(), ku[keep].tolist()))
    return GroundTruth(
        omega_true=omega,
        sigma_true=inv_pd(omega),
        support=support,
        kind="random",
        seed=int(seed),
        n_nonzero=n_edges,
    )


def _chain_base_pairs(p: int):
    pairs = [(j, j + 1) for j in range(p - 1)]
    pairs += [(j, j + 2) for j in range(p - 2)]
    return pairs


def gen_chain_precision(p: int, n_edges: int, seed: int,
                        max_attempts: int = 100) -> GroundTruth:
    """Two-band chain precision matrix thinned to ``n_edges`` edges.

    Base values: 1 on the diagonal, 0.5 at distance one, 0.25 at distance
    two.  A uniformly random subset of the base edges is retained; the
    zeroing pattern is resampled (up to ``max_attempts`` times) if the
    result is not positive definite.
    """
    base = _chain_base_pairs(p)
    if not 0 <= n_edges <= len(base):
        raise InvalidEdgeCount(
            f"n_edges must be in [0, {len(base)}] for chain p={p}, got {n_edges}"
        )
    rng = make_rng(seed)
    for _ in range(max_attempts):
        keep = rng.choice(len(base), size=n_edges, replace=False)
        omega = np.eye(p)
        support = set()
        for idx in keep:
            j, k = base[idx]
            omega[j, k] = omega[k, j] = 0.5 if k - j == 1 else 0.25
            support.add((j, k))
        if is_positive_definite(omega):
            return GroundTruth(
                omega_true=omega,
                sigma_true=inv_pd(omega),
                support=frozenset(support),
                kind="chain",
                seed=int(seed),
                n_nonzero=n_edges,
            )
    raise GenerationFailed(
        f"no positive definite chain pattern found in {max_attempts} attempts"
    )


def sample_mvn(sigma, n: int, seed: int) -> np.ndarray:
    """n rows from N(0, sigma) via the Cholesky factor and a Philox stream."""
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    sigma = np.asarray(sigma, dtype=float)
    l = cholesky(sigma)
    z = make_rng(seed).standard_normal((n, sigma.shape[0]))
    return z @ l.T


def sample_covariance(x) -> np.ndarray:
    """1/n-normalized covariance about the sample mean."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    xc = x - x.mean(axis=0)
    return (xc.T @ xc) / x.shape[0]


def _pivots_ok(candidate: np.ndarray, floor: float) -> bool:
    try:
        l = np.linalg.cholesky(candidate)
    except np.linalg.LinAlgError:
        return False
    return float(np.min(np.diag(l)) ** 2) >= floor


def shrink_covariance(s) -> tuple[np.ndarray, float]:
    """Shrink s toward its diagonal just enough to be safely positive definite.

    Walks zeta over {0, 0.01, ..., 1} and returns the first
    zeta*diag(s) + (1-zeta)*s whose Cholesky pivots (squared factor
    diagonal) all reach 1e-8 * mean(diag(s)).
    """
    s = sym_matrix(s)
    d = np.diag(np.diag(s))
    floor = 1e-8 * float(np.mean(np.diag(s)))
    for step in range(101):
        zeta = step / 100.0
        candidate = zeta * d + (1.0 - zeta) * s
        if _pivots_ok(candidate, floor):
            return candidate, zeta
    raise ShrinkageFailed("no zeta on the grid yields a positive definite matrix")


def shrinkage_weight(x) -> float:
    """Stein-type weight for shrinking a sample covariance toward its diagonal.

    Ratio of the summed sampling variances of the off-diagonal covariance
    entries to their summed squares, clipped to [0, 1]: heavy shrinkage
    when the off-diagonal is mostly noise, none when it is clearly signal.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n, p = x.shape
    if n < 2 or p < 2:
        return 1.0 if p >= 2 else 0.0
    xc = x - x.mean(axis=0)
    s = (xc.T @ xc) / n
    w2sum = (xc ** 2).T @ (xc ** 2)  # sum_i of the squared centered products
    var_s = (w2sum - n * s ** 2) / (n * (n - 1))
    off = ~np.eye(p, dtype=bool)
    denom = float((s ** 2)[off].sum())
    if denom <= 0.0:
        return 0.0
    return float(min(1.0, max(0.0, var_s[off].sum() / denom)))


def shrink_from_samples(x) -> tuple[np.ndarray, float]:
    """Sample covariance shrunk by the Stein-type weight, PD guaranteed.

    The statistical weight sets the shrinkage level; in the rare case the
    result still fails the positive definiteness floor, zeta is raised
    along the same 0.01 grid ``shrink_covariance`` uses.
    """
    s = sample_covariance(x)
    d = np.diag(np.diag(s))
    floor = 1e-8 * float(np.mean(np.diag(s))) if s.shape[0] else 0.0
    zeta = shrinkage_weight(x)
    candidate = zeta * d + (1.0 - zeta) * s
    if _pivots_ok(candidate, floor):
        return candidate, zeta
    for step in range(int(np.ceil(zeta * 100)), 101):
        z = step / 100.0
        candidate = z * d + (1.0 - z) * s
        if _pivots_ok(candidate, floor):
            return candidate, z
    raise ShrinkageFailed("no zeta yields a positive definite matrix")


def make_dataset(kind: str, p: int, n: int, n_edges: int,
                 seed: int) -> tuple[GroundTruth, Dataset]:
    """Generate ground truth, samples, and the shrunk sample covariance.

    Stage seeds are derived from ``seed`` by tag, so the ground truth and
    the sample draw are each reproducible through their own entry points.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    gt_seed = derive_seed(seed, "ground-truth")
    sample_seed = derive_seed(seed, "samples")
    if kind == "random":
        gt = gen_random_precision(p, n_edges, gt_seed)
    else:
        gt = gen_chain_precision(p, n_edges, gt_seed)
    x = sample_mvn(gt.sigma_true, n, sample_seed)
    s, zeta = shrink_from_samples(x)
    return gt, Dataset(x=x, s=s, zeta=zeta, n=n, seed=sample_seed)


def save_samples_csv(path, x: np.ndarray) -> None:
    with open(path, "w") as fh:
        for row in np.atleast_2d(x):
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


def load_samples_csv(path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(f) for f in line.split(",")])
    return np.array(rows)


def save_dataset(outdir, gt: GroundTruth, ds: Dataset) -> None:
    """Write samples.csv, s.csv, omega_true.csv and the meta.json sidecar."""
    os.makedirs(outdir, exist_ok=True)
    save_samples_csv(os.path.join(outdir, "samples.csv"), ds.x)
    save_matrix_csv(os.path.join(outdir, "s.csv"), ds.s)
    save_matrix_csv(os.path.join(outdir, "omega_true.csv"), gt.omega_true)
    meta = {
        "kind": gt.kind,
        "p": int(gt.omega_true.shape[0]),
        "n": int(ds.n),
        "n_edges": int(gt.n_nonzero),
        "seed": int(gt.seed),
        "zeta": float(ds.zeta),
        "support": sorted([int(j), int(k)] for j, k in gt.support),
    }
    with open(os.path.join(outdir, "meta.json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_dataset(outdir) -> tuple[dict, np.ndarray, np.ndarray, np.ndarray]:
    """Read back (meta, samples, s, omega_true) written by ``save_dataset``."""
    with open(os.path.join(outdir, "meta.json")) as fh:
        meta = json.load(fh)
    x = load_samples_csv(os.path.join(outdir, "samples.csv"))
    s = load_matrix_csv(os.path.join(outdir, "s.csv"))
    omega_true = load_matrix_csv(os.path.join(outdir, "omega_true.csv"))
    return meta, x, s, omega_true
