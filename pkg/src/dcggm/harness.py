"""Cross-validation, fixed-edge calibration, and the experiment drivers.

Cells (scenario x replicate) are independent tasks with per-cell derived
seeds, so results are identical whether cells run sequentially or on a
thread pool.  All four estimators are dispatched through ``fit_method`` so
the drivers, the calibrator, and the CLI share one code path.
"""

from __future__ import annotations

import csv
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from .dc import DcOptions, dc_fit
from .errors import InvalidEdgeCount, InvalidFolds, NumericalError
from .glasso import GlassoOptions, glasso_fit
from .metrics import confusion, edge_support, f1_score, holdout_neg_loglik
from .penalties import AdaptiveParams, ScadParams, adaptive_fit, scad_fit
from .seeding import MASK64, derive_seed, make_rng
from .synthetic import Dataset, KINDS, make_dataset, sample_covariance, shrink_from_samples

logger = logging.getLogger("dcggm")

METHODS = ("dc", "glasso", "scad", "adapt")


@dataclass
class MethodSettings:
    """Fixed per-method options shared by every fit in a run."""

    inner: GlassoOptions = field(default_factory=GlassoOptions)
    scad_a: float = 3.7
    scad_lla_rounds: int = 3
    adapt_gamma: float = 0.5
    adapt_weight_cap: float = 1e6
    dc_alpha: float = 0.5
    dc_eps: float = 1e-4
    dc_max_outer: int = 50
    dc_eta_min: float = 1e-12


def fit_method(method: str, s: np.ndarray, param,
               settings: MethodSettings | None = None):
    """Fit one estimator at one parameter value.

    param is the vec-cardinality K for ``dc`` and the penalty lambda for
    the other methods.  Returns (omega, info) where info carries
    iterations, converged, kkt_residual, seconds, and for dc the
    constraint_gap of the final iterate.
    """
    if settings is None:
        settings = MethodSettings()
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    t0 = time.perf_counter()
    if method == "dc":
        opts = DcOptions(k=int(param), alpha=settings.dc_alpha,
                         eps=settings.dc_eps, max_outer=settings.dc_max_outer,
                         eta_min=settings.dc_eta_min, inner=settings.inner)
        sol = dc_fit(s, opts)
        info = {
            "iterations": len(sol.trace),
            "converged": sol.converged,
            "kkt_residual": sol.kkt_residual,
            "constraint_gap": sol.trace[-1].constraint_gap if sol.trace else 0.0,
        }
    elif method == "glasso":
        sol = glasso_fit(s, float(param), settings.inner)
        info = {"iterations": sol.sweeps, "converged": sol.converged,
                "kkt_residual": sol.kkt_residual}
    elif method == "scad":
        sol = scad_fit(s, ScadParams(lam=float(param), a=settings.scad_a),
                       settings.inner, lla_rounds=settings.scad_lla_rounds)
        info = {"iterations": sol.sweeps, "converged": sol.converged,
                "kkt_residual": sol.kkt_residual}
    else:
        sol = adaptive_fit(s, AdaptiveParams(lam=float(param),
                                             gamma=settings.adapt_gamma,
                                             weight_cap=settings.adapt_weight_cap),
                           settings.inner)
        info = {"iterations": sol.sweeps, "converged": sol.converged,
                "kkt_residual": sol.kkt_residual}
    info["seconds"] = time.perf_counter() - t0
    return sol.omega, info


def kfold_split(n: int, k: int = 5, seed: int = 0) -> list[np.ndarray]:
    """Seeded permutation of range(n) cut into k folds, sizes differing by <= 1."""
    if not 2 <= k <= n:
        raise InvalidFolds(f"folds must satisfy 2 <= k <= n, got k={k}, n={n}")
    perm = make_rng(seed).permutation(n)
    base, rem = divmod(n, k)
    folds, start = [], 0
    for i in range(k):
        size = base + (1 if i < rem else 0)
        folds.append(perm[start:start + size])
        start += size
    return folds


def k_grid(p: int, points: int = 100) -> list[int]:
    """Integer cardinality grid from p+1 to p(p+1)/2, deduplicated."""
    if points < 2:
        raise ValueError(f"points must be at least 2, got {points}")
    raw = np.round(np.linspace(p + 1, p * (p + 1) // 2, points)).astype(int)
    return list(dict.fromkeys(raw.tolist()))


def lambda_max(s) -> float:
    """Largest off-diagonal magnitude of s: the penalty killing every edge."""
    s = np.asarray(s, dtype=float)
    p = s.shape[0]
    if p < 2:
        return 0.0
    return float(np.abs(s[~np.eye(p, dtype=bool)]).max())


def lambda_grid(s, points: int = 100) -> list[float]:
    """Evenly spaced penalties from 0 to lambda_max(s), deduplicated."""
    if points < 2:
        raise ValueError(f"points must be at least 2, got {points}")
    grid = np.linspace(0.0, lambda_max(s), points)
    return list(dict.fromkeys(grid.tolist()))


@dataclass
class CvResult:
    grid: list
    mean_holdout_ll: list
    mean_edges: list
    chosen: float
    chosen_edges: int
    omega: np.ndarray
    fit_seconds: float


def cross_validate(method: str, dataset: Dataset, grid, folds: int = 5,
                   seed: int = 0,
                   settings: MethodSettings | None = None) -> CvResult:
    """Pick a grid point by k-fold held-out likelihood, then refit on all data.

    Training covariances are re-shrunk per fold; test folds are scored with
    their raw sample covariance.  A grid point whose fit fails on any fold
    scores +inf.  Ties go to the sparser model (smaller K, larger lambda),
    which also makes the choice independent of grid order.
    """
    grid = list(grid)
    if not grid:
        raise ValueError("grid must be nonempty")
    splits = kfold_split(dataset.n, folds, seed)
    all_idx = np.arange(dataset.n)
    n_grid = len(grid)
    ll = np.zeros((n_grid, folds))
    edges = np.zeros((n_grid, folds))
    for f, test_idx in enumerate(splits):
        train_idx = np.setdiff1d(all_idx, test_idx)
        s_train, _ = shrink_from_samples(dataset.x[train_idx])
        s_test = sample_covariance(dataset.x[test_idx])
        for gi, param in enumerate(grid):
            try:
                omega, _ = fit_method(method, s_train, param, settings)
                ll[gi, f] = holdout_neg_loglik(omega, s_test)
                edges[gi, f] = len(edge_support(omega))
            except NumericalError as exc:
                logger.warning("cv fit failed (method=%s, param=%s, fold=%d): %s",
                               method, param, f, exc)
                ll[gi, f] = math.inf
                edges[gi, f] = math.nan
    mean_ll = ll.mean(axis=1)
    mean_edges = edges.mean(axis=1)
    finite = np.isfinite(mean_ll)
    if not finite.any():
        raise NumericalError(f"every {method} grid point failed during CV")
    best = mean_ll[finite].min()
    candidates = [grid[i] for i in range(n_grid)
                  if finite[i] and mean_ll[i] == best]
    chosen = min(candidates) if method == "dc" else max(candidates)
    omega, info = fit_method(method, dataset.s, chosen, settings)
    return CvResult(grid=grid, mean_holdout_ll=mean_ll.tolist(),
                    mean_edges=mean_edges.tolist(), chosen=chosen,
                    chosen_edges=len(edge_support(omega)), omega=omega,
                    fit_seconds=info["seconds"])


@dataclass
class CalibrationResult:
    omega: np.ndarray
    param: float
    achieved_edges: int
    exact: bool
    fit_seconds: float
    constraint_gap: float | None = None
    vec_nonzeros: int | None = None


def calibrate_edges(method: str, s: np.ndarray, target_edges: int,
                    settings: MethodSettings | None = None,
                    max_fits: int = 60) -> CalibrationResult:
    """Tune a method so its estimate carries ``target_edges`` edges.

    dc starts at the nominal mapping K = p + 2 * target_edges and, because
    the penalized solution may miss the budget, adjusts K by integer
    bisection on [p, p^2] until the estimate carries the target count.
    Penalty methods bisect lambda on [0, lambda_max].  Either way, if the
    exact count is not attained within ``max_fits`` fits, the iterate with
    the smallest |edges - target| is returned (ties: fewer edges) flagged
    exact=False.
    """
    s = np.asarray(s, dtype=float)
    p = s.shape[0]
    max_edges = p * (p - 1) // 2
    if not 0 <= target_edges <= max_edges:
        raise InvalidEdgeCount(
            f"target_edges must be in [0, {max_edges}], got {target_edges}"
        )
    if method == "dc":
        best = None  # ((|diff|, edges, k), omega, k, edges, info)

        def evaluate_k(k):
            nonlocal best
            omega, info = fit_method("dc", s, k, settings)
            e = len(edge_support(omega))
            key = (abs(e - target_edges), e, k)
            if best is None or key < best[0]:
                best = (key, omega, k, e, info)
            return e

        k0 = p + 2 * target_edges
        e = evaluate_k(k0)
        used = 1
        if e != target_edges:
            lo, hi = (p, k0) if e > target_edges else (k0, p * p)
            while used < max_fits and lo < hi - 1:
                mid = (lo + hi) // 2
                e = evaluate_k(mid)
                used += 1
                if e == target_edges:
                    break
                if e > target_edges:
                    hi = mid
                else:
                    lo = mid
        _, omega, k, e, info = best
        return CalibrationResult(
            omega=omega, param=k, achieved_edges=e,
            exact=e == target_edges, fit_seconds=info["seconds"],
            constraint_gap=info["constraint_gap"],
            vec_nonzeros=int(np.count_nonzero(omega)),
        )

    lam_hi = lambda_max(s)
    best = None  # (|diff|, edges, -lam, omega, lam, seconds)

    def evaluate(lam):
        nonlocal best
        omega, info = fit_method(method, s, lam, settings)
        e = len(edge_support(omega))
        key = (abs(e - target_edges), e, -lam)
        if best is None or key < best[0]:
            best = (key, omega, lam, e, info["seconds"])
        return e

    e_hi = evaluate(lam_hi)
    used = 1
    if e_hi != target_edges and lam_hi > 0.0:
        lo, hi = 0.0, lam_hi
        while used < max_fits:
            mid = 0.5 * (lo + hi)
            e = evaluate(mid)
            used += 1
            if e == target_edges:
                break
            if e > target_edges:
                lo = mid
            else:
                hi = mid
    _, omega, lam, e, seconds = best
    return CalibrationResult(omega=omega, param=lam, achieved_edges=e,
                             exact=e == target_edges, fit_seconds=seconds)


@dataclass
class RunConfig:
    """Experiment grid: scenarios, methods, seeds, and output location."""

    kinds: list[str]
    p_list: list[int]
    n_rule: dict
    replicates: int
    methods: list[str]
    master_seed: int
    n_edges: int = 30
    grid_points: int = 100
    folds: int = 5
    targets: list[int] = field(default_factory=lambda: [20, 30, 40])
    parallelism: int = 1
    bench_runs: int = 10
    output_dir: str | None = None

    def __post_init__(self):
        for name in ("kinds", "p_list", "methods", "targets"):
            if not getattr(self, name):
                raise ValueError(f"config field {name} must be nonempty")
        bad = set(self.kinds) - set(KINDS)
        if bad:
            raise ValueError(f"unknown kinds: {sorted(bad)}")
        bad = set(self.methods) - set(METHODS)
        if bad:
            raise ValueError(f"unknown methods: {sorted(bad)}")
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        if "ratio" in self.n_rule:
            if not self.n_rule["ratio"]:
                raise ValueError("n_rule.ratio must be nonempty")
        elif "explicit" in self.n_rule:
            if not self.n_rule["explicit"]:
                raise ValueError("n_rule.explicit must be nonempty")
        else:
            raise ValueError("n_rule needs a 'ratio' or 'explicit' entry")
        self.master_seed = int(self.master_seed) & MASK64

    def ns_for(self, p: int) -> list[int]:
        if "ratio" in self.n_rule:
            return [max(2, round(r * p)) for r in self.n_rule["ratio"]]
        return [int(n) for n in self.n_rule["explicit"]]

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        bad = set(d) - known
        if bad:
            raise ValueError(f"unknown config fields: {sorted(bad)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(RunConfig)}


@dataclass
class ResultRow:
    kind: str
    p: int
    n: int
    replicate: int
    method: str
    mode: str
    param: float
    edges: float
    tp: float
    fp: float
    fn: float
    precision: float
    recall: float
    f1: float
    fit_seconds: float
    extra: dict = field(default_factory=dict, compare=False)


RESULT_COLUMNS = ("kind", "p", "n", "replicate", "method", "mode", "param",
                  "edges", "tp", "fp", "fn", "precision", "recall", "f1",
                  "fit_seconds")


def _metric_row(kind, p, n, rep, method, mode, param, omega, gt,
                seconds, extra=None) -> ResultRow:
    c = confusion(omega, gt.omega_true)
    precision = c.tp / (c.tp + c.fp) if c.tp + c.fp else 0.0
    recall = c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0
    return ResultRow(kind=kind, p=p, n=n, replicate=rep, method=method,
                     mode=mode, param=param,
                     edges=len(edge_support(omega)), tp=c.tp, fp=c.fp,
                     fn=c.fn, precision=precision, recall=recall,
                     f1=f1_score(c), fit_seconds=seconds,
                     extra=extra or {})


def _failed_row(kind, p, n, rep, method, mode, exc) -> ResultRow:
    logger.warning("cell failed (kind=%s p=%d n=%d rep=%d method=%s): %s",
                   kind, p, n, rep, method, exc)
    nan = math.nan
    return ResultRow(kind=kind, p=p, n=n, replicate=rep, method=method,
                     mode=mode, param=nan, edges=nan, tp=nan, fp=nan, fn=nan,
                     precision=nan, recall=nan, f1=nan, fit_seconds=nan,
                     extra={"error": str(exc)})


def _scenario_cells(config: RunConfig):
    return [(kind, p, n, rep)
            for kind in config.kinds
            for p in config.p_list
            for n in config.ns_for(p)
            for rep in range(config.replicates)]


def _run_cells(cells, fn, parallelism: int):
    if parallelism <= 1:
        return [fn(cell) for cell in cells]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(fn, cells))


def _cell_dataset(config: RunConfig, kind, p, n, rep):
    seed = derive_seed(config.master_seed, f"data|{kind}|{p}|{n}|{rep}")
    return make_dataset(kind, p, n, config.n_edges, seed)


def run_experiment1(config: RunConfig,
                    settings: MethodSettings | None = None):
    """Cross-validated edge selection over every scenario cell.

    Returns (rows, curves): one ResultRow per scenario x replicate x
    method, plus per-grid-point (method, param, edges_mean,
    holdout_ll_mean) curves taken from the first replicate of each
    scenario, mirroring the single-dataset likelihood curves.
    """
    def one_cell(cell):
        kind, p, n, rep = cell
        gt, dataset = _cell_dataset(config, kind, p, n, rep)
        cv_seed = derive_seed(config.master_seed, f"cv|{kind}|{p}|{n}|{rep}")
        rows, curves = [], []
        for method in config.methods:
            grid = (k_grid(p, config.grid_points) if method == "dc"
                    else lambda_grid(dataset.s, config.grid_points))
            try:
                cv = cross_validate(method, dataset, grid, config.folds,
                                    cv_seed, settings)
            except NumericalError as exc:
                rows.append(_failed_row(kind, p, n, rep, method, "cv", exc))
                continue
            rows.append(_metric_row(kind, p, n, rep, method, "cv", cv.chosen,
                                    cv.omega, gt, cv.fit_seconds))
            if rep == 0:
                curves.extend(
                    {"method": method, "param": cv.grid[i],
                     "edges_mean": cv.mean_edges[i],
                     "holdout_ll_mean": cv.mean_holdout_ll[i]}
                    for i in range(len(cv.grid))
                )
        return rows, curves

    results = _run_cells(_scenario_cells(config), one_cell, config.parallelism)
    rows = [r for cell_rows, _ in results for r in cell_rows]
    curves = [c for _, cell_curves in results for c in cell_curves]
    return rows, curves


def run_experiment2(config: RunConfig,
                    settings: MethodSettings | None = None):
    """Fixed-edge-count comparison: calibrate each method to each target."""
    def one_cell(cell):
        kind, p, n, rep = cell
        gt, dataset = _cell_dataset(config, kind, p, n, rep)
        rows = []
        for method in config.methods:
            for target in config.targets:
                try:
                    cal = calibrate_edges(method, dataset.s, target, settings)
                except NumericalError as exc:
                    rows.append(_failed_row(kind, p, n, rep, method, "fixed", exc))
                    continue
                extra = {"target": target, "exact": cal.exact}
                if method == "dc":
                    extra["constraint_gap"] = cal.constraint_gap
                    extra["vec_nonzeros"] = cal.vec_nonzeros
                    extra["k"] = cal.param
                    if not cal.exact:
                        logger.info(
                            "dc target %d not met exactly: %d edges, gap %.3g",
                            target, cal.achieved_edges, cal.constraint_gap)
                rows.append(_metric_row(kind, p, n, rep, method, "fixed",
                                        cal.param, cal.omega, gt,
                                        cal.fit_seconds, extra))
        return rows

    results = _run_cells(_scenario_cells(config), one_cell, config.parallelism)
    return [r for cell_rows in results for r in cell_rows]


def bench_params(method: str, p: int, s: np.ndarray):
    """Benchmark parameter rule: half of all edges for dc, median |s_jk| else."""
    if method == "dc":
        return max(p, round(p * (p - 1) / 4))
    off = np.abs(s[~np.eye(p, dtype=bool)])
    return float(np.median(off)) if off.size else 0.0


def run_benchmark(config: RunConfig,
                  settings: MethodSettings | None = None):
    """Average fit time per (method, p, n) over bench_runs fresh datasets."""
    def one_cell(cell):
        p, n, run = cell
        times = {}
        for kind in config.kinds:
            seed = derive_seed(config.master_seed, f"bench|{kind}|{p}|{n}|{run}")
            _, dataset = make_dataset(kind, p, n, config.n_edges, seed)
            for method in config.methods:
                param = bench_params(method, p, dataset.s)
                _, info = fit_method(method, dataset.s, param, settings)
                times.setdefault(method, []).append(info["seconds"])
        return p, n, times

    cells = [(p, n, run)
             for p in config.p_list
             for n in config.ns_for(p)
             for run in range(config.bench_runs)]
    acc: dict[tuple, list] = {}
    for p, n, times in _run_cells(cells, one_cell, config.parallelism):
        for method, secs in times.items():
            acc.setdefault((method, p, n), []).extend(secs)
    return [{"method": method, "p": p, "n": n,
             "seconds_mean": float(np.mean(secs))}
            for (method, p, n), secs in sorted(acc.items())]


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_results_csv(path, rows: list[ResultRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(getattr(row, col)) for col in RESULT_COLUMNS])


def read_results_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


CURVE_COLUMNS = ("method", "param", "edges_mean", "holdout_ll_mean")


def write_curves_csv(path, curves: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CURVE_COLUMNS)
        for c in curves:
            writer.writerow([_fmt(c[col]) for col in CURVE_COLUMNS])


BENCH_COLUMNS = ("method", "p", "n", "seconds_mean")


def write_bench_csv(path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(BENCH_COLUMNS)
        for r in rows:
            writer.writerow([_fmt(r[col]) for col in BENCH_COLUMNS])
