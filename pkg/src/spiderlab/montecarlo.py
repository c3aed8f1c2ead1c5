"""Parallel Monte Carlo experiments over random spider trees.

Each replicate owns its random stream, keyed by (master_seed, replicate
index), so a run is a pure function of its configuration: the same config
gives bit-identical summaries no matter how many workers execute it or in
what order they finish.  Replicates are processed in fixed-size blocks and
block statistics are merged in block order with the pairwise
mean/M2 update, which keeps variance accumulation single-pass and stable
at any replicate count.

A deterministic one-percent subsample of replicates is audited by
re-evaluating every requested index directly from the degree multiset and
comparing against the closed form the engine actually uses.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import ndtr

from .analytics import moment_catalog
from .indices import Generic, IndexSpec, UnknownIndexError, eval_direct, index_name, reduced_values
from .tree import GrowthModel, RngStream, TreeState, grow_legs

__all__ = [
    "SimConfig",
    "IndexStats",
    "SampleSummary",
    "run_experiment",
    "standardize",
    "ks_normal",
    "ProbeRow",
    "convergence_probe",
]

CHUNK_SIZE = 1024          # replicates per reduction block; fixed so results never depend on worker count
SPOT_CHECK_STRIDE = 100    # deterministic 1% direct-evaluation audit
SAMPLE_CAP = 1_000_000     # retained samples per index, thinned deterministically beyond this
DIRECT_CHECK_RTOL = 1e-12


def model_probability(model: GrowthModel) -> float:
    """Centroid recruitment probability of a growth model."""
    return model.centroid_probability


@dataclass(frozen=True)
class SimConfig:
    """One experiment: grow ``replicates`` trees to time ``horizon`` and
    evaluate ``indices`` on each.

    ``clt_shift`` is the free shift k allowed in every CLT scale
    sqrt(...(n + k)...); it only affects ``standardize``.
    """

    model: GrowthModel
    horizon: int
    replicates: int
    master_seed: int
    indices: tuple[IndexSpec, ...]
    clt_shift: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(self.indices))
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.replicates < 1:
            raise ValueError(f"replicates must be >= 1, got {self.replicates}")
        if int(self.master_seed) < 0:
            raise ValueError(f"master_seed must be non-negative, got {self.master_seed}")
        if not self.indices:
            raise ValueError("at least one index is required")
        if self.horizon + self.clt_shift <= 0:
            raise ValueError(
                f"clt_shift {self.clt_shift} must keep horizon + k positive"
            )
        for spec in self.indices:
            if isinstance(spec, Generic):
                # Surface bad degree functions before any replicate runs.
                for d in (1, 2, 3):
                    if not spec.h(d) > 0:
                        raise UnknownIndexError(
                            f"degree function must be positive on occurring degrees; "
                            f"h({d}) = {spec.h(d)!r}"
                        )

    def to_json(self) -> dict:
        return {
            "model": self.model.name,
            "horizon": self.horizon,
            "replicates": self.replicates,
            "master_seed": self.master_seed,
            "indices": [index_name(spec) for spec in self.indices],
            "clt_shift": self.clt_shift,
        }


@dataclass
class IndexStats:
    """Streaming summary of one index over the replicates."""

    count: int
    mean: float
    variance: float


@dataclass
class SampleSummary:
    """Result of ``run_experiment``: per-index statistics, the retained
    (possibly thinned) sample values when requested, and the number of
    replicates that passed the direct-evaluation audit."""

    config: SimConfig
    stats: dict[str, IndexStats]
    samples: Optional[dict[str, np.ndarray]]
    spot_checks: int

    def to_json(self) -> dict:
        return {
            "config": self.config.to_json(),
            "stats": {
                key: {"count": s.count, "mean": s.mean, "variance": s.variance}
                for key, s in self.stats.items()
            },
            "spot_checks": self.spot_checks,
        }

    def to_json_str(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"


def _audit_replicate(config: SimConfig, legs: np.ndarray) -> None:
    state = TreeState(time=config.horizon, legs=tuple(legs.tolist()))
    for spec in config.indices:
        direct = float(eval_direct(state, spec))
        reduced = float(reduced_values(spec, config.horizon, np.array([len(legs)]))[0])
        tol = DIRECT_CHECK_RTOL * max(1.0, abs(reduced))
        if abs(direct - reduced) > tol:
            raise RuntimeError(
                f"direct/reduced mismatch for {index_name(spec)} at n={config.horizon}, "
                f"L={len(legs)}: direct={direct!r} reduced={reduced!r}"
            )


def _chunk_worker(args) -> tuple:
    config, start, stop, keep_stride = args
    size = stop - start
    leaf_counts = np.empty(size, dtype=np.int64)
    spot_checks = 0
    for i in range(start, stop):
        legs = grow_legs(config.model, config.horizon, RngStream(config.master_seed, i))
        leaf_counts[i - start] = len(legs)
        if i % SPOT_CHECK_STRIDE == 0:
            _audit_replicate(config, legs)
            spot_checks += 1
    stats = []
    kept = []
    if keep_stride:
        keep_mask = (np.arange(start, stop) % keep_stride) == 0
    for spec in config.indices:
        values = reduced_values(spec, config.horizon, leaf_counts)
        mean = float(values.mean())
        m2 = float(((values - mean) ** 2).sum())
        stats.append((size, mean, m2))
        kept.append(values[keep_mask] if keep_stride else None)
    return stats, kept, spot_checks


def _merge_stats(a: tuple, b: tuple) -> tuple:
    count_a, mean_a, m2_a = a
    count_b, mean_b, m2_b = b
    count = count_a + count_b
    delta = mean_b - mean_a
    mean = mean_a + delta * count_b / count
    m2 = m2_a + m2_b + delta * delta * count_a * count_b / count
    return count, mean, m2


def run_experiment(config: SimConfig, threads: int = 1, keep_samples: bool = False) -> SampleSummary:
    """Run the experiment described by ``config``.

    ``threads`` > 1 distributes replicate blocks over worker processes;
    the result is identical either way.  ``keep_samples`` retains the raw
    index values (thinned to at most SAMPLE_CAP per index by a fixed
    replicate stride) for later diagnostics.
    """
    R = config.replicates
    keep_stride = math.ceil(R / SAMPLE_CAP) if keep_samples else 0
    tasks = [
        (config, start, min(start + CHUNK_SIZE, R), keep_stride)
        for start in range(0, R, CHUNK_SIZE)
    ]
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_chunk_worker, tasks, chunksize=1))
    else:
        results = [_chunk_worker(t) for t in tasks]

    keys = [index_name(spec) for spec in config.indices]
    merged = results[0][0]
    for stats, _, _ in results[1:]:
        merged = [_merge_stats(a, b) for a, b in zip(merged, stats)]
    spot_checks = sum(r[2] for r in results)

    stats_out = {}
    for key, (count, mean, m2) in zip(keys, merged):
        variance = m2 / (count - 1) if count > 1 else 0.0
        stats_out[key] = IndexStats(count=count, mean=mean, variance=variance)

    samples_out = None
    if keep_samples:
        samples_out = {
            key: np.concatenate([r[1][j] for r in results])
            for j, key in enumerate(keys)
        }
    return SampleSummary(config=config, stats=stats_out, samples=samples_out,
                         spot_checks=spot_checks)


def standardize(samples, index: IndexSpec, n: int, p, k: float = 0.0) -> np.ndarray:
    """Apply the index's cataloged CLT normalizer elementwise:
    (x - center(n, p)) / scale(n, p, k)."""
    entry = moment_catalog(index)
    if entry.clt is None:
        raise UnknownIndexError(f"no CLT normalizer cataloged for index {entry.key!r}")
    x = np.asarray(samples, dtype=np.float64)
    center = float(entry.clt.center_value(n, p))
    scale = entry.clt.scale_value(n, p, k)
    return (x - center) / scale


def ks_normal(samples) -> float:
    """Two-sided Kolmogorov-Smirnov distance between the empirical
    distribution of ``samples`` and the standard normal."""
    x = np.sort(np.asarray(samples, dtype=np.float64))
    size = len(x)
    if size < 10:
        raise ValueError(f"need at least 10 samples for a KS diagnostic, got {size}")
    cdf = ndtr(x)
    i = np.arange(1, size + 1)
    d_plus = (i / size - cdf).max()
    d_minus = (cdf - (i - 1) / size).max()
    return float(max(d_plus, d_minus))


@dataclass
class ProbeRow:
    """Per-horizon convergence diagnostics for one scaled index."""

    index: str
    n: int
    p: float
    mean: float
    variance: float
    exceedance: float
    r_mean_error: float
    limit: float


def convergence_probe(
    index: IndexSpec,
    model: GrowthModel,
    n_grid: Sequence[int],
    epsilon: float,
    r: float,
    replicates: int,
    master_seed: int,
    threads: int = 1,
) -> list[ProbeRow]:
    """Empirical convergence diagnostics toward the cataloged limit.

    For each horizon n the index is scaled by n**exponent and compared to
    the limit constant c(p): the exceedance P(|scaled - c| > epsilon) and
    the r-mean error E|scaled - c|**r are estimated from ``replicates``
    grown trees.  Both sequences should shrink along the grid.
    """
    entry = moment_catalog(index)
    if entry.limit is None:
        raise UnknownIndexError(f"no limit constant cataloged for index {entry.key!r}")
    if epsilon <= 0 or r <= 0:
        raise ValueError("epsilon and r must be positive")
    p = model_probability(model)
    c = float(entry.limit.constant_value(p))
    exponent = entry.limit.exponent
    rows = []
    for n in n_grid:
        config = SimConfig(model=model, horizon=n, replicates=replicates,
                           master_seed=master_seed, indices=(index,))
        summary = run_experiment(config, threads=threads, keep_samples=True)
        scaled = summary.samples[index_name(index)] / float(n) ** exponent
        err = np.abs(scaled - c)
        rows.append(ProbeRow(
            index=index_name(index),
            n=n,
            p=p,
            mean=float(scaled.mean()),
            variance=float(scaled.var(ddof=1)) if len(scaled) > 1 else 0.0,
            exceedance=float((err > epsilon).mean()),
            r_mean_error=float((err ** r).mean()),
            limit=c,
        ))
    return rows
