"""Method dispatch and seeded benchmark sweeps."""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .datagen import DatasetSpec, generate
from .heuristics import RhsConfig, SolveResult, hypersteiner, randomized_hypersteiner
from .nj import NJ_GD, nj_embed
from .optimize import GdConfig
from .tree import mst_tree
from .triangulation import mst

logger = logging.getLogger(__name__)

METHODS = ("mst", "hs", "rhs", "nj")
COLUMNS = ("dataset", "|P|", "method", "red_mean", "red_std", "time_mean_s", "trials", "errors")


def reduction_upper_bound(p_count):
    """``p / (2 (p - 1))``: reference value for near-boundary point sets (a fraction, not percent)."""
    if p_count < 2:
        raise ValueError(f"p_count must be >= 2, got {p_count}")
    return p_count / (2.0 * (p_count - 1))


def _gd_from(overrides, base):
    return GdConfig(**{**base.to_dict(), **(overrides or {})})


def solve(points, method, seed=0, overrides=None):
    """Run ``method`` on ``points`` and return a :class:`SolveResult`.

    ``overrides`` may hold ``gd`` (a dict of descent settings) and, for
    ``rhs``, any other :class:`RhsConfig` field.
    """
    overrides = dict(overrides or {})
    start = time.perf_counter()
    if method == "mst":
        pts = np.asarray(points, dtype=float)
        edges = mst(pts)
        res = SolveResult("mst", mst_tree(pts, edges), edges.total, edges.total, seed=seed)
    elif method == "hs":
        res = hypersteiner(points)
        res.seed = seed
    elif method == "rhs":
        gd = _gd_from(overrides.pop("gd", None), GdConfig())
        if "insertion_range" in overrides:
            overrides["insertion_range"] = tuple(overrides["insertion_range"])
        res = randomized_hypersteiner(points, RhsConfig(seed=seed, gd=gd, **overrides))
    elif method == "nj":
        res = nj_embed(points, seed=seed, gd=_gd_from(overrides.pop("gd", None), NJ_GD))
    else:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    res.wall_time_ms = (time.perf_counter() - start) * 1e3
    return res


@dataclass(frozen=True)
class BenchConfig:
    """A sweep: every dataset times every method, ``trials`` times each.

    Trial ``k`` draws its dataset seed and method seed from
    ``SeedSequence([master_seed, k])``, so a row can be rebuilt from the
    recorded seeds alone.
    """

    datasets: tuple
    methods: tuple = ("mst", "hs", "rhs")
    trials: int = 3
    master_seed: int = 0
    overrides: dict | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}; expected one of {METHODS}")
        if not self.datasets:
            raise ValueError("bench config lists no datasets")

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - {"datasets", "methods", "trials", "master_seed", "overrides"}
        if unknown:
            raise ValueError(f"unknown bench config keys: {sorted(unknown)}")
        if "datasets" not in data:
            raise ValueError("bench config needs a 'datasets' list")
        specs = tuple(DatasetSpec.from_dict(d) for d in data["datasets"])
        return cls(
            datasets=specs,
            methods=tuple(data.get("methods", cls.methods)),
            trials=int(data.get("trials", cls.trials)),
            master_seed=int(data.get("master_seed", 0)),
            overrides=data.get("overrides"),
        )


def trial_seeds(master_seed, trial):
    data_seed, method_seed = np.random.SeedSequence([master_seed, trial]).generate_state(2)
    return int(data_seed), int(method_seed)


def _run_trial(task):
    ds_index, spec_dict, method, trial, master_seed, overrides = task
    data_seed, method_seed = trial_seeds(master_seed, trial)
    spec = DatasetSpec.from_dict({**spec_dict, "seed": data_seed})
    record = {
        "dataset_index": ds_index,
        "dataset": spec.digest,
        "method": method,
        "trial": trial,
        "data_seed": data_seed,
        "method_seed": method_seed,
    }
    try:
        pts = generate(spec)
        res = solve(pts, method, seed=method_seed, overrides=(overrides or {}).get(method))
        record.update(res.to_dict())
        record["mst_length"] = res.mst_length
        record["error"] = None
    except Exception as exc:  # recorded per row, the sweep continues
        logger.warning("trial failed: %s %s #%d: %s", spec.digest, method, trial, exc)
        record["error"] = f"{type(exc).__name__}: {exc}"
    record["n_points"] = spec.size
    return record


def aggregate(records, config):
    """One row per (dataset, method) in config order; independent of record order."""
    rows = []
    for ds_index, spec in enumerate(config.datasets):
        for method in config.methods:
            group = sorted(
                (r for r in records if r["dataset_index"] == ds_index and r["method"] == method),
                key=lambda r: r["trial"],
            )
            ok = [r for r in group if r["error"] is None]
            reds = np.array([r["red_percent"] for r in ok], dtype=float)
            times = np.array([r["wall_time_ms"] / 1e3 for r in ok], dtype=float)
            rows.append({
                "dataset": spec.digest,
                "|P|": spec.size,
                "method": method,
                "red_mean": float(reds.mean()) if len(ok) else math.nan,
                "red_std": float(reds.std()) if len(ok) else math.nan,
                "time_mean_s": float(times.mean()) if len(ok) else math.nan,
                "trials": len(ok),
                "errors": len(group) - len(ok),
            })
    return rows


def run_bench(config, out_csv, jobs=1, artifacts_dir=None):
    """Run a sweep, write the table to ``out_csv`` and per-trial JSON files.

    Artifacts go to ``artifacts_dir`` (default: ``<out_csv stem>_trials``)
    together with ``summary.json``, which also lists the near-boundary
    reduction bound for each ``|P|``.  Returns the rows.
    """
    if artifacts_dir is None:
        stem, _ = os.path.splitext(out_csv)
        artifacts_dir = stem + "_trials"
    os.makedirs(artifacts_dir, exist_ok=True)
    tasks = [
        (i, spec.to_dict(), method, trial, config.master_seed, config.overrides)
        for i, spec in enumerate(config.datasets)
        for method in config.methods
        for trial in range(config.trials)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_trial, tasks))
    else:
        records = [_run_trial(t) for t in tasks]
    for r in records:
        name = f"d{r['dataset_index']:03d}_{r['method']}_t{r['trial']:03d}.json"
        with open(os.path.join(artifacts_dir, name), "w", encoding="utf-8") as fh:
            json.dump(r, fh, indent=1, sort_keys=True)
    rows = aggregate(records, config)
    with open(out_csv, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (f"{v:.6f}" if isinstance(v, float) else v) for k, v in row.items()})
    summary = {
        "master_seed": config.master_seed,
        "trials": config.trials,
        "allocation": sorted({s.allocation for s in config.datasets}),
        "rows": rows,
        "red_upper_bound_percent": {
            str(s.size): 100.0 * reduction_upper_bound(s.size) for s in config.datasets if s.size >= 2
        },
    }
    with open(os.path.join(artifacts_dir, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=1, sort_keys=True)
    return rows
