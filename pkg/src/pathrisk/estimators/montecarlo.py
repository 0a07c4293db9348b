"""Monte Carlo ground truth for the stopped-process collision model.

Each trial draws one obstacle position from ``N(mu_O, Sigma_T)`` and walks
the discretized path; the trial collides if any path point comes within
the combined radius. Since the draw is fixed for the whole walk, that is
the same as comparing the minimum point distance against the radius.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.spatial import cKDTree

from ..gauss import sample_n
from ..path import arc_length_parameters
from .scenario import Estimate, Scenario, stopwatch

CHUNK = 8192


def path_points(sc: Scenario, ds_max: float) -> np.ndarray:
    lo, hi = sc.param_range
    return sc.trajectory.position(arc_length_parameters(sc.trajectory, ds_max, lo, hi))


def min_distances(sc: Scenario, trials: int, ds_max: float, seed, workers: int = 1,
                  upper_bound: float = np.inf) -> np.ndarray:
    """Distance from each sampled obstacle position to the discretized path.

    Trials are drawn in fixed-size chunks, each from its own spawned seed
    stream, so the result does not depend on ``workers``. Distances
    beyond ``upper_bound`` come back as ``inf``.
    """
    trials = int(trials)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not ds_max > 0:
        raise ValueError("ds_max must be positive")
    tree = cKDTree(path_points(sc, ds_max))
    obstacle = sc.obstacle
    n_chunks = math.ceil(trials / CHUNK)
    streams = np.random.SeedSequence(seed).spawn(n_chunks)

    def run(i):
        n = min(CHUNK, trials - i * CHUNK)
        pts = sample_n(obstacle, np.random.default_rng(streams[i]), n)
        d, _ = tree.query(pts, distance_upper_bound=upper_bound)
        return d

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, range(n_chunks)))
    else:
        parts = [run(i) for i in range(n_chunks)]
    return np.concatenate(parts)


def default_ds_max(radius: float) -> float:
    return radius / 10.0


def mc_ground_truth(sc: Scenario, trials: int = 10_000, ds_max: float | None = None,
                    seed=0, workers: int = 1) -> Estimate:
    ds_max = default_ds_max(sc.radius) if ds_max is None else float(ds_max)
    with stopwatch() as t:
        d = min_distances(sc, trials, ds_max, seed, workers, upper_bound=sc.radius * (1 + 1e-12))
        hits = int(np.count_nonzero(d <= sc.radius))
    p = hits / trials
    # Floored so a run with zero (or all) hits still reports some uncertainty.
    se = math.sqrt(max(p * (1 - p), 0.25 / trials) / trials)
    return Estimate.from_raw("montecarlo", p, t[0], trials=trials, hits=hits, seed=seed,
                             ds_max=ds_max, std_error=se)
