"""Deterministic experiment runners behind the CLI."""

from __future__ import annotations

import itertools
import logging
import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache

import numpy as np

from .. import cluster as cl
from ..dissimilarity import pairwise_distances
from ..evaluation import clustering_error, confusion_entropy
from ..genmodel import CorruptionSpec, GenerativeModel, ar2_model, make_dataset, tabulated_model
from ..spectra import bartlett_window, default_grid_size, estimate_psds
from ..theory import (
    clustering_condition,
    inner_product_dominance_mc,
    model_distance,
    prop1_model_bound,
    quadform_mc_tail,
    quadform_tail_bound,
    spectral_norm,
)
from .config import DataError, ExperimentConfig
from .io import load_labels, load_series

log = logging.getLogger(__name__)

HIERARCHICAL = {"sl": "single", "al": "average", "cl": "complete"}


@lru_cache(maxsize=64)
def _ar2(a: float, nu: float) -> GenerativeModel:
    return ar2_model(a, nu)


@lru_cache(maxsize=16)
def _tabulated(path: str) -> GenerativeModel:
    return tabulated_model(load_series(path).samples)


def build_models(cfg: ExperimentConfig) -> list[GenerativeModel]:
    return [_ar2(float(a), float(nu)) for a, nu in cfg.models] + [_tabulated(p) for p in cfg.psd_files]


def grid_points(cfg: ExperimentConfig) -> list[dict]:
    """Cartesian product of the sweep axes in file order (one empty point if none)."""
    axes = [a for a, _ in cfg.sweep]
    return [dict(zip(axes, combo)) for combo in itertools.product(*(v for _, v in cfg.sweep))]


def cell_seed(master_seed: int, point: dict, trial: int) -> int:
    """Seed from the master seed, the point's coordinate values and the trial index.

    Keyed on values rather than positions so inserting grid points leaves
    existing cells unchanged.
    """
    key = [zlib.crc32(f"{axis}={float(v)!r}".encode()) for axis, v in sorted(point.items())]
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(key) + (int(trial),))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def window_for(cfg: ExperimentConfig, M: int):
    W = cfg.W if cfg.W is not None else M
    return bartlett_window(W)


def cluster_psds(P, X, cfg: ExperimentConfig, seed: int, truth=None) -> cl.ClusteringResult:
    """Dispatch ``cfg.algorithm`` on PSD rows ``P`` (and raw rows ``X`` for TSC)."""
    N = P.shape[0]
    D = pairwise_distances(P, cfg.metric)
    q = min(cfg.q, N - 1)
    L = cfg.L
    if L is None:
        L = cl.eigengap_estimate(cl.nnpc_adjacency(D, q).adjacency, min(cfg.L_max, N))
    alg = cfg.algorithm
    if alg == "nnpc":
        res = cl.nnpc(P, L, q, metric=cfg.metric, seed=seed, truth=truth, D=D)
    elif alg == "km":
        res = cl.km_farthest(D, L)
    elif alg == "kmit":
        res = cl.kmit(P, L, iters=cfg.kmit_iters, metric=cfg.metric, D=D)
    elif alg in HIERARCHICAL:
        res = cl.hierarchical(D, HIERARCHICAL[alg], L)
    else:
        if X is None:
            raise DataError("the tsc baseline needs equal-length raw series")
        res = cl.tsc_baseline(X, L, q, seed=seed)
    res.extra["D"] = D
    return res


def run_trial(cfg: ExperimentConfig, seed: int) -> float:
    """Generate one dataset for ``cfg`` and return the clustering error."""
    models = build_models(cfg)
    data = make_dataset(models, cfg.n_per_model, cfg.M, CorruptionSpec(cfg.sigma, cfg.p, seed))
    p_est = cfg.p if cfg.bias_correction else 1.0
    P = estimate_psds(data, window_for(cfg, cfg.M), p=p_est, normalize=cfg.normalize, center=cfg.center)
    X = np.stack([o.samples for o in data]) if cfg.algorithm == "tsc" else None
    truth = [o.label for o in data]
    res = cluster_psds(P, X, cfg, seed=seed)
    return clustering_error(res.assignments, truth)


def _map(fn, jobs, threads: int):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda j: fn(*j), jobs))
    return [fn(*j) for j in jobs]


def run_sweep(cfg: ExperimentConfig, threads: int = 1) -> tuple[list[dict], list[str]]:
    """Mean/std clustering error over ``cfg.trials`` datasets per grid point.

    Returns ``(rows, header)``; rows come out in grid order whatever the
    thread count.
    """
    points = grid_points(cfg)
    axes = [a for a, _ in cfg.sweep]
    jobs = [(cfg.at(pt), cell_seed(cfg.master_seed, pt, t)) for pt in points for t in range(cfg.trials)]
    ces = _map(run_trial, jobs, threads)
    rows = []
    for k, pt in enumerate(points):
        vals = np.array(ces[k * cfg.trials : (k + 1) * cfg.trials])
        row = dict(pt)
        row.update(mean_CE=vals.mean(), std_CE=vals.std(), trials=cfg.trials)
        pcfg = cfg.at(pt)
        if "nu2" in axes or len(pcfg.models) == 2:
            models = build_models(pcfg)
            row["model_distance"] = min(
                model_distance(a, b) for a, b in itertools.combinations(models, 2)
            )
        rows.append(row)
    header = axes + ["mean_CE", "std_CE", "trials"]
    if any("model_distance" in r for r in rows):
        header.append("model_distance")
    return rows, header


def theory_report(cfg: ExperimentConfig) -> tuple[list[dict], list[str]]:
    """Clustering-condition quantities for every grid point of ``cfg``."""
    points = grid_points(cfg)
    axes = [a for a, _ in cfg.sweep]
    rows = []
    for pt in points:
        pcfg = cfg.at(pt)
        rep = clustering_condition(build_models(pcfg), window_for(pcfg, pcfg.M), pcfg.M, pcfg.sigma, pcfg.p)
        row = dict(pt)
        row.update(M=pcfg.M, sigma=pcfg.sigma, p=pcfg.p)
        row.update(rep.as_row())
        rows.append(row)
    header = axes + [
        h for h in ("M", "sigma", "p") if h not in axes
    ] + ["min_model_distance", "rhs", "mu_max", "A", "B", "satisfied", "margin"]
    return rows, header


def lemma2_suite(n_matrices=20, M=50, ps=(0.3, 0.5, 0.9), cs=(2, 3, 4), trials=100_000, seed=0):
    """Empirical quadratic-form tails against the analytic bound, one row per case."""
    rows = []
    ss = np.random.SeedSequence(seed)
    for h, child in enumerate(ss.spawn(n_matrices)):
        rng = np.random.default_rng(child)
        G = rng.standard_normal((M, M))
        H = (G + G.T) / 2
        norm = spectral_norm(H)
        for p, c in itertools.product(ps, cs):
            t = c * math.sqrt(M) * norm
            mc_seed = cell_seed(seed, {"H": h, "p": p, "c": c}, 0)
            emp = quadform_mc_tail(H, p, t, trials, seed=mc_seed)
            bound = quadform_tail_bound(H, p, t)
            slack = 3 * math.sqrt(max(bound * (1 - bound), 0.0) / trials) if bound < 1 else 0.0
            rows.append(
                dict(suite="lemma2", case=h, p=p, c=c, empirical=emp, bound=bound, slack=slack,
                     passed=emp <= bound + slack)
            )
    return rows


def prop1_suite(a=0.6, nus=(0.7 * math.pi, 0.4 * math.pi), sigmas=(0.0, 0.5), M=64, trials=100_000, seed=0):
    """Empirical inner-product dominance probability against its lower bound."""
    m1, m2 = _ar2(a, nus[0]), _ar2(a, nus[1])
    rows = []
    for sigma in sigmas:
        for k, (mk, ml) in enumerate(((m1, m2), (m2, m1))):
            emp = inner_product_dominance_mc(mk, ml, sigma, M, trials, seed=cell_seed(seed, {"s": sigma}, k))
            bound = prop1_model_bound(mk, ml, sigma, M)
            slack = 3 * math.sqrt(bound * (1 - bound) / trials)
            rows.append(
                dict(suite="prop1", case=k, sigma=sigma, M=M, empirical=emp, bound=bound, slack=slack,
                     passed=emp + slack >= bound)
            )
    return rows


VALIDATE_HEADER = ["suite", "case", "p", "c", "sigma", "M", "empirical", "bound", "slack", "passed"]


def cluster_files(paths, cfg: ExperimentConfig, labels_path=None, fmt="one-column-text", seed=None):
    """Cluster series files; returns ``(assignment_rows, diagnostics)``.

    Each file gets its own BT estimate on a grid shared by all files, with
    ``W`` taken from the config (or the file's length for ``window = bartlett``
    without a length).
    """
    paths = [str(p) for p in paths]
    if len(paths) < 2:
        raise DataError("need at least two series files")
    obs = [load_series(p, fmt, center=cfg.center) for p in paths]
    lengths = {len(o) for o in obs}
    F = default_grid_size(max(lengths))
    p_est = cfg.p if cfg.bias_correction else 1.0
    P = np.concatenate(
        [estimate_psds([o], window_for(cfg, len(o)), p=p_est, F=F, normalize=cfg.normalize) for o in obs]
    )
    X = np.stack([o.samples for o in obs]) if len(lengths) == 1 else None
    truth = None
    if labels_path is not None:
        truth = load_labels(labels_path)
        if len(truth) != len(paths):
            raise DataError(f"{labels_path}: {len(truth)} labels for {len(paths)} files")
    seed = cfg.master_seed if seed is None else seed
    res = cluster_psds(P, X, cfg, seed=seed, truth=truth)
    D = res.extra["D"]
    N = len(paths)
    diag = {"N": N, "L": res.n_clusters}
    graph = res.graph or cl.nnpc_adjacency(D, min(cfg.q, N - 1))
    try:
        evals = np.linalg.eigvalsh(cl.normalized_laplacian(graph.adjacency))
        diag["eigenvalues"] = " ".join(f"{v:.6g}" for v in evals)
    except ValueError as exc:
        log.warning("no eigengap spectrum: %s", exc)
        diag["eigenvalues"] = ""
    if truth is not None:
        diag["CE"] = clustering_error(res.assignments, truth)
        diag["S"] = confusion_entropy(res.assignments, truth)
    rows = [{"path": p, "cluster": int(c)} for p, c in zip(paths, res.assignments)]
    return rows, diag
