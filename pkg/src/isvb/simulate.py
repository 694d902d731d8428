"""Monte Carlo scenario runner, metrics aggregation and design diagnostics.

Each replication owns an rng substream keyed by (seed, rep), and each
method within a replication a substream keyed by (seed, rep, method id),
so results are identical however replications are scheduled.
"""

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import baselines, model
from .data import generate_dataset
from .errors import ConfigError, DataError
from .regions import contains, ellipsoid_from_samples, interval_from_samples, volume_proxy
from .rng import rng_stream

METHODS = {"isvb": 1, "mf": 2, "zz": 3, "oracle": 4, "isvb-mean": 5}

CSV_COLUMNS = (
    "scenario_id,method,coverage,coverage_se,mae_mean,mae_sd,size_mean,size_sd,"
    "rel_volume_mean,rel_volume_sd,time_mean,time_sd,n_reps_ok"
)


@dataclass(frozen=True)
class RunConfig:
    scenario: object
    methods: tuple
    n_reps: int
    seed: int = 0
    n_samples: int = 1000
    gamma: float = 0.95
    n_workers: int | None = None  # None: ISVB_THREADS env var, else 1
    use_vb_mean: bool = False  # applies to the "isvb" method

    def __post_init__(self):
        if self.n_reps < 1:
            raise ConfigError("need n_reps >= 1")
        methods = tuple(self.methods)
        for m in methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r} (choose from {sorted(METHODS)})")
        if self.scenario.k > 1 and "zz" in methods:
            raise ConfigError("the zz baseline is defined for a single target coordinate only")
        object.__setattr__(self, "methods", methods)


@dataclass(frozen=True)
class MetricsRow:
    scenario_id: str
    method: str
    coverage: float
    coverage_se: float
    mae_mean: float
    mae_sd: float
    size_mean: float
    size_sd: float
    rel_volume_mean: float
    rel_volume_sd: float
    time_mean: float
    time_sd: float
    n_reps_ok: int

    def to_csv_line(self):
        vals = [
            self.scenario_id, self.method,
            self.coverage, self.coverage_se, self.mae_mean, self.mae_sd,
            self.size_mean, self.size_sd, self.rel_volume_mean, self.rel_volume_sd,
            self.time_mean, self.time_sd, self.n_reps_ok,
        ]
        out = []
        for v in vals:
            if isinstance(v, float):
                out.append(repr(v))
            else:
                out.append(str(v))
        return ",".join(out)


def _region_and_center(draws, gamma):
    if draws.shape[1] == 1:
        region = interval_from_samples(draws[:, 0], gamma)
        return region, np.array([(region.lower + region.upper) / 2.0])
    region = ellipsoid_from_samples(draws, gamma)
    return region, region.center


def _run_method(method, ds, scenario, n_samples, gamma, rng, use_vb_mean=False):
    targets = np.arange(scenario.k)
    if method in ("isvb", "isvb-mean"):
        cfg = model.ISVBConfig(use_vb_mean=use_vb_mean or method == "isvb-mean")
        fitted = model.fit(ds, targets, cfg, rng)
        draws = model.draw(fitted, n_samples, rng)
        return _region_and_center(draws, gamma)
    if method == "mf":
        fitted = baselines.full_mf(ds, targets, rng=rng)
        draws = baselines.draw_mf(fitted, n_samples, rng)
        return _region_and_center(draws, gamma)
    if method == "zz":
        region, estimate = baselines.zz_debiased(ds, 0, gamma, rng=rng)
        return region, np.array([estimate])
    if method == "oracle":
        region = baselines.oracle(ds, targets, gamma, rng=rng)
        return region, region.center.copy()
    raise ConfigError(f"unknown method {method!r}")


def _run_rep(scenario, methods, n_samples, gamma, seed, rep, use_vb_mean):
    ds = generate_dataset(scenario, rng_stream(seed, rep, 0))
    truth = ds.beta_true[: scenario.k]
    out = {}
    for m in methods:
        rng = rng_stream(seed, rep, METHODS[m])
        t0 = time.perf_counter()
        try:
            region, center = _run_method(m, ds, scenario, n_samples, gamma, rng, use_vb_mean)
        except Exception as exc:  # noqa: BLE001 - per-rep failures are recorded, not fatal
            out[m] = {"failed": f"{type(exc).__name__}: {exc}"}
            continue
        elapsed = time.perf_counter() - t0
        err = float(np.linalg.norm(center - truth)) if scenario.k > 1 else float(
            abs(center[0] - truth[0])
        )
        out[m] = {
            "covered": bool(contains(region, truth if scenario.k > 1 else truth[0])),
            "err": err,
            "size": float(volume_proxy(region)),
            "time": elapsed,
        }
    return rep, out


def _resolve_workers(n_workers):
    if n_workers is not None:
        return max(1, int(n_workers))
    env = os.environ.get("ISVB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"ISVB_THREADS must be an integer, got {env!r}") from exc
    return 1


def run_scenario(cfg):
    """Run all replications and aggregate one MetricsRow per method.

    Per-replication failures are recorded and skipped; n_reps_ok counts
    the successful replications per method. Output is deterministic given
    the seed, independent of the worker count.
    """
    workers = _resolve_workers(cfg.n_workers)
    args = [
        (cfg.scenario, cfg.methods, cfg.n_samples, cfg.gamma, cfg.seed, rep, cfg.use_vb_mean)
        for rep in range(cfg.n_reps)
    ]
    results = {}
    if workers == 1 or cfg.n_reps == 1:
        for a in args:
            rep, res = _run_rep(*a)
            results[rep] = res
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for rep, res in pool.map(_run_rep_star, args):
                results[rep] = res

    rows = []
    sizes_by_method = {}
    for m in cfg.methods:
        recs = [results[rep][m] for rep in range(cfg.n_reps)]
        oks = [r for r in recs if "failed" not in r]
        sizes_by_method[m] = np.array([r["size"] for r in oks])

    denom = np.nan
    if "oracle" in cfg.methods and sizes_by_method["oracle"].size:
        oracle_mean = float(sizes_by_method["oracle"].mean())
        if oracle_mean > 0:
            denom = oracle_mean
    if not np.isfinite(denom) and "isvb" in cfg.methods and sizes_by_method["isvb"].size:
        isvb_mean = float(sizes_by_method["isvb"].mean())
        if isvb_mean > 0:
            denom = isvb_mean

    for m in cfg.methods:
        recs = [results[rep][m] for rep in range(cfg.n_reps)]
        oks = [r for r in recs if "failed" not in r]
        n_ok = len(oks)
        cov = np.array([r["covered"] for r in oks], dtype=float)
        err = np.array([r["err"] for r in oks])
        size = sizes_by_method[m]
        times = np.array([r["time"] for r in oks])
        rel = size / denom if np.isfinite(denom) else np.full(size.shape, np.nan)

        def _mean(a):
            return float(a.mean()) if a.size else np.nan

        def _sd(a):
            return float(a.std(ddof=1)) if a.size > 1 else 0.0

        rows.append(
            MetricsRow(
                scenario_id=cfg.scenario.id,
                method=m,
                coverage=_mean(cov),
                coverage_se=float(np.sqrt(cfg.gamma * (1.0 - cfg.gamma) / cfg.n_reps)),
                mae_mean=_mean(err),
                mae_sd=_sd(err),
                size_mean=_mean(size),
                size_sd=_sd(size),
                rel_volume_mean=_mean(rel) if rel.size and np.isfinite(denom) else np.nan,
                rel_volume_sd=_sd(rel) if rel.size and np.isfinite(denom) else np.nan,
                time_mean=_mean(times),
                time_sd=_sd(times),
                n_reps_ok=n_ok,
            )
        )
    return rows


def _run_rep_star(a):
    return _run_rep(*a)


def write_metrics_csv(rows, path):
    with open(path, "w") as fh:
        fh.write(CSV_COLUMNS + "\n")
        for row in rows:
            fh.write(row.to_csv_line() + "\n")


def design_diagnostics(X, target_indices):
    """Mutual coherence of the design, the projection bias ratio for the
    given target columns, and whether the coherence bound
    bias_ratio <= mc / (1 - mc) holds (vacuously true at mc >= 1)."""
    X = np.asarray(X, dtype=float)
    norms = np.sqrt((X**2).sum(axis=0))
    if np.any(norms == 0):
        raise DataError("design has a zero column")
    Xn = X / norms
    G = np.abs(Xn.T @ Xn)
    np.fill_diagonal(G, 0.0)
    mc = float(G.max())

    idx = np.asarray(target_indices, dtype=np.int64).reshape(-1)
    rest = np.setdiff1d(np.arange(X.shape[1]), idx)
    Q, _ = np.linalg.qr(X[:, idx])
    proj = Q.T @ X[:, rest]
    h_norm2 = (proj**2).sum(axis=0)
    resid_norm2 = np.maximum(norms[rest] ** 2 - h_norm2, 0.0)
    max_resid = float(np.sqrt(resid_norm2.max()))
    max_h = float(np.sqrt(h_norm2.max()))
    bias_ratio = np.inf if max_resid == 0 else max_h / max_resid

    if mc >= 1.0:
        bound_ok = True  # bound degenerate, check skipped
    else:
        bound_ok = bool(bias_ratio <= mc / (1.0 - mc) + 1e-9)
    return {"mc": mc, "bias_ratio": float(bias_ratio), "bound_ok": bound_ok}
