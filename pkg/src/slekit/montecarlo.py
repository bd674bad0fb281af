"""Trial orchestration, exponent regression, and goodness-of-fit tests.

Every estimate is reproducible bit-for-bit from (experiment, master_seed):
per-trial seeds are derived by the splitmix jump in `seeds`, per-trial values
are placed into a trial-indexed array, and the reduction is numpy's pairwise
summation of that array, so thread count and scheduling cannot change the
result.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import ndimage, stats

from .seeds import child_rng

__all__ = [
    "EstimateRecord",
    "PowerLawFit",
    "run_trials",
    "fit_power_law",
    "chi_square_uniform",
    "ks_two_sample",
    "disconnection_indicator",
    "disconnection_probability",
    "nonintersection_indicator",
    "nonintersection_probability",
    "box_dimension_estimate",
    "estimates_to_csv",
    "read_estimates_csv",
]


@dataclass(frozen=True)
class EstimateRecord:
    """Named scalar estimate with its provenance."""

    name: str
    scale: float
    value: float
    stderr: float
    trials: int
    seed: int

    def __post_init__(self):
        if self.trials <= 0:
            raise ValueError("trials must be positive")
        if self.stderr < 0:
            raise ValueError("stderr must be non-negative")


@dataclass(frozen=True)
class PowerLawFit:
    """Weighted least-squares line through (log scale, log value)."""

    slope: float
    intercept: float
    slope_stderr: float
    points: tuple


def _bernoulli_like(values: np.ndarray) -> bool:
    return bool(np.all((values == 0.0) | (values == 1.0)))


def run_trials(statistic: Callable[[np.random.Generator], float], trials: int,
               master_seed: int, threads: int = 1, name: str = "estimate",
               scale: float = 0.0) -> EstimateRecord:
    """Mean and standard error of a per-trial statistic.

    `statistic` receives a fresh generator per trial (seed derived from the
    master seed and the trial index), so the record is independent of the
    thread count.  Bernoulli statistics get the binomial stderr
    sqrt(p(1-p)/n); others the sample stderr.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    values = np.empty(trials, dtype=float)

    def work(i):
        values[i] = statistic(child_rng(master_seed, i))

    if threads <= 1:
        for i in range(trials):
            work(i)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, range(trials)))

    value = float(np.sum(values) / trials)  # pairwise summation
    if _bernoulli_like(values):
        stderr = math.sqrt(max(value * (1.0 - value), 0.0) / trials)
        _check_batch_consistency(values, stderr)
    elif trials > 1:
        stderr = float(np.std(values, ddof=1) / math.sqrt(trials))
    else:
        stderr = 0.0
    return EstimateRecord(name=name, scale=scale, value=value, stderr=stderr,
                          trials=trials, seed=master_seed)


def _check_batch_consistency(values: np.ndarray, stderr: float) -> None:
    """Sanity-check the Bernoulli stderr against a two-batch split."""
    n = len(values)
    if n < 64 or stderr == 0.0:
        return
    half = n // 2
    spread = abs(float(values[:half].mean()) - float(values[half:].mean()))
    # the halves differ by ~2*stderr in distribution; 12 sigma is a bug
    if spread > 12.0 * stderr:
        raise AssertionError(
            f"batch-split spread {spread} inconsistent with stderr {stderr}")


def fit_power_law(records: Sequence[EstimateRecord],
                  drop_outlier_scales: bool = False) -> PowerLawFit:
    """Weighted least squares of log value against log scale.

    Weights are (value/stderr)^2, the inverse variance of log value; records
    with stderr 0 fall back to an unweighted fit.  With
    `drop_outlier_scales`, the smallest scale is removed when its residual
    exceeds 3 of its own sigma (finite-size correction).
    """
    recs = sorted(records, key=lambda r: r.scale)
    if len(recs) < 3:
        raise ValueError("need at least 3 records to fit")
    if any(r.value <= 0.0 for r in recs):
        raise ValueError("power-law fit requires positive values")

    def solve(rr):
        x = np.log([r.scale for r in rr])
        y = np.log([r.value for r in rr])
        weighted = all(r.stderr > 0.0 for r in rr)
        if weighted:
            w = np.array([(r.value / r.stderr) ** 2 for r in rr])
        else:
            w = np.ones_like(x)
        sw = w.sum()
        xbar = (w * x).sum() / sw
        ybar = (w * y).sum() / sw
        sxx = (w * (x - xbar) ** 2).sum()
        slope = (w * (x - xbar) * (y - ybar)).sum() / sxx
        intercept = ybar - slope * xbar
        # with w = 1/var(log y), Var(slope) = 1/sum w (x - xbar)^2
        slope_stderr = 1.0 / math.sqrt(sxx) if weighted else 0.0
        pts = tuple((float(a), float(b), float(c)) for a, b, c in zip(x, y, w))
        return PowerLawFit(slope=float(slope), intercept=float(intercept),
                           slope_stderr=float(slope_stderr), points=pts)

    fit = solve(recs)
    if drop_outlier_scales and len(recs) > 3:
        r0 = recs[0]
        pred = fit.intercept + fit.slope * math.log(r0.scale)
        sigma = r0.stderr / r0.value if r0.stderr > 0 else 0.0
        if sigma > 0 and abs(math.log(r0.value) - pred) > 3.0 * sigma:
            fit = solve(recs[1:])
    return fit


# ---------------------------------------------------------------------------
# goodness of fit
# ---------------------------------------------------------------------------


def chi_square_uniform(counts: Sequence[int]) -> float:
    """p-value of the chi-square test against the uniform null."""
    counts = np.asarray(counts, dtype=float)
    if counts.sum() < 5 * len(counts):
        raise ValueError("chi-square needs expected count >= 5 per cell")
    return float(stats.chisquare(counts).pvalue)


def ks_two_sample(a: Sequence[float], b: Sequence[float]) -> float:
    """p-value of the two-sample Kolmogorov-Smirnov test."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) < 5 or len(b) < 5:
        raise ValueError("KS test needs at least 5 samples per side")
    return float(stats.ks_2samp(a, b).pvalue)


# ---------------------------------------------------------------------------
# planar-walk exponent experiments
# ---------------------------------------------------------------------------


def _walk_until_radius(rng: np.random.Generator, start: tuple, radius: float,
                       max_steps: int = 200_000_000) -> np.ndarray:
    """SRW positions from `start` (inclusive) until |Z| >= radius."""
    moves = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]], dtype=np.int64)
    pos = [np.array([start], dtype=np.int64)]
    cur = np.array(start, dtype=np.int64)
    r2 = radius * radius
    total = 0
    block = 16384
    while True:
        steps = moves[rng.integers(0, 4, size=block)]
        path = cur + np.cumsum(steps, axis=0)
        d2 = path[:, 0].astype(float) ** 2 + path[:, 1].astype(float) ** 2
        hit = np.flatnonzero(d2 >= r2)
        if hit.size:
            pos.append(path[:hit[0] + 1])
            break
        pos.append(path)
        cur = path[-1]
        total += block
        if total > max_steps:
            raise RuntimeError("walk exceeded its step budget")
    return np.concatenate(pos, axis=0)


def disconnection_indicator(R: int, mesh: int, rng: np.random.Generator) -> bool:
    """Does a walk from (mesh, 0) run to radius R*mesh leave the origin
    connected to the outer circle?

    The walk's visited cells block a 4-connected flood fill that starts
    outside the circle; the indicator is True when the fill reaches the
    origin cell.  A walk that covers the origin cell disconnects it.
    """
    radius = R * mesh
    path = _walk_until_radius(rng, (mesh, 0), radius)
    return _origin_connected(path, radius)


def _origin_connected(path: np.ndarray, radius: float) -> bool:
    span = int(math.ceil(radius)) + 2
    size = 2 * span + 1
    blocked = np.zeros((size, size), dtype=bool)
    blocked[path[:, 0] + span, path[:, 1] + span] = True
    if blocked[span, span]:
        return False
    free = ~blocked
    labels, _ = ndimage.label(free)  # default structure = 4-connectivity
    idx = np.arange(-span, span + 1)
    ii, jj = np.meshgrid(idx, idx, indexing="ij")
    outside = (ii.astype(float) ** 2 + jj.astype(float) ** 2) >= radius * radius
    outer_labels = np.unique(labels[outside & free])
    outer_labels = outer_labels[outer_labels > 0]
    return bool(np.isin(labels[span, span], outer_labels))


def disconnection_probability(R: int, mesh: int, trials: int,
                              master_seed: int) -> EstimateRecord:
    hits = 0
    for i in range(trials):
        if disconnection_indicator(R, mesh, child_rng(master_seed, i)):
            hits += 1
    p = hits / trials
    return EstimateRecord(name="nondisconnection", scale=float(R), value=p,
                          stderr=math.sqrt(max(p * (1 - p), 0.0) / trials),
                          trials=trials, seed=master_seed)


def nonintersection_indicator(n_steps: int, rng: np.random.Generator) -> bool:
    """Are the ranges of two n-step SRWs from adjacent origins disjoint?"""
    if n_steps == 0:
        return True
    moves = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]], dtype=np.int64)
    s1 = np.cumsum(moves[rng.integers(0, 4, size=n_steps)], axis=0)
    s2 = np.cumsum(moves[rng.integers(0, 4, size=n_steps)], axis=0)
    enc = 1 << 32
    r1 = np.concatenate(([0], s1[:, 0] * enc + s1[:, 1]))
    r2 = np.concatenate(([enc], (s2[:, 0] + 1) * enc + s2[:, 1]))
    return not bool(np.isin(r1, r2, assume_unique=False).any())


def nonintersection_probability(n_steps: int, trials: int,
                                master_seed: int) -> EstimateRecord:
    hits = 0
    for i in range(trials):
        if nonintersection_indicator(n_steps, child_rng(master_seed, i)):
            hits += 1
    p = hits / trials
    return EstimateRecord(name="nonintersection", scale=float(n_steps), value=p,
                          stderr=math.sqrt(max(p * (1 - p), 0.0) / trials),
                          trials=trials, seed=master_seed)


# ---------------------------------------------------------------------------
# box-counting dimension
# ---------------------------------------------------------------------------


def box_dimension_estimate(points: Sequence[complex],
                           scales: Sequence[float]) -> PowerLawFit:
    """Box-counting fit: slope of log N(eps) against log eps is -dimension."""
    pts = np.asarray(points, dtype=complex)
    if len(pts) < 1000:
        raise ValueError("need at least 1000 points")
    if len(scales) < 3:
        raise ValueError("need at least 3 scales")
    records = []
    for eps in scales:
        keys = np.unique(np.round(pts.real / eps).astype(np.int64) * (1 << 32)
                         + np.round(pts.imag / eps).astype(np.int64))
        records.append(EstimateRecord(name="boxcount", scale=float(eps),
                                      value=float(len(keys)), stderr=0.0,
                                      trials=1, seed=0))
    return fit_power_law(records)


# ---------------------------------------------------------------------------
# estimate serialization
# ---------------------------------------------------------------------------


def estimates_to_csv(records: Sequence[EstimateRecord], path) -> None:
    with open(path, "w") as fh:
        fh.write("name,scale,value,stderr,trials,seed\n")
        for r in records:
            fh.write(f"{r.name},{r.scale:.12g},{r.value:.12g},"
                     f"{r.stderr:.12g},{r.trials},{r.seed}\n")


def read_estimates_csv(path) -> list:
    out = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "name,scale,value,stderr,trials,seed":
            raise ValueError(f"unexpected estimates header {header!r}")
        for line in fh:
            name, scale, value, stderr, trials, seed = line.strip().split(",")
            out.append(EstimateRecord(name=name, scale=float(scale),
                                      value=float(value), stderr=float(stderr),
                                      trials=int(trials), seed=int(seed)))
    return out
