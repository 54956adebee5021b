"""Lloyd k-means with k-means++ seeding, plus round-robin extraction.

The clustering diversifies semantic retrieval: candidates are split into
k clusters and picked cyclically, one per cluster per turn, always the
unconsumed member most similar to the query.  Empty clusters are
repaired by stealing the point farthest from its assigned center, and
the recorded objective history is non-increasing by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import UsageError

MAX_ITERATIONS = 100
REL_TOLERANCE = 1e-4


@dataclass
class KMeansResult:
    assignments: np.ndarray  # (n,) int cluster ids
    centers: np.ndarray  # (k, d)
    objective_history: list[float]
    iterations: int

    def members(self, cluster: int) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.assignments == cluster)]


def _plus_plus_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]), dtype=points.dtype)
    first = int(rng.integers(n))
    centers[0] = points[first]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = float(d2.sum())
        if total <= 0.0:
            idx = int(rng.integers(n))  # all remaining points coincide
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[c] = points[idx]
        d2 = np.minimum(d2, np.sum((points - centers[c]) ** 2, axis=1))
    return centers


def kmeans(
    points: np.ndarray,
    k: int,
    seed: int = 0,
    max_iter: int = MAX_ITERATIONS,
    rel_tol: float = REL_TOLERANCE,
) -> KMeansResult:
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if not 1 <= k <= n:
        raise UsageError(f"k must be within [1, {n}], got {k}")
    rng = np.random.default_rng(seed)
    centers = _plus_plus_init(points, k, rng)

    history: list[float] = []
    assign = np.zeros(n, dtype=np.int64)
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        d2 = np.sum((points[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        assign = d2.argmin(axis=1)
        point_cost = d2[np.arange(n), assign]

        counts = np.bincount(assign, minlength=k)
        for c in range(k):
            if counts[c] == 0:
                donors = np.flatnonzero(counts[assign] > 1)
                far = int(donors[np.argmax(point_cost[donors])])
                counts[assign[far]] -= 1
                assign[far] = c
                counts[c] = 1
                centers[c] = points[far]
                point_cost[far] = 0.0

        objective = float(point_cost.sum())
        history.append(objective)
        if len(history) >= 2:
            prev = history[-2]
            if prev - objective <= rel_tol * max(prev, 1e-12):
                break
        for c in range(k):
            centers[c] = points[assign == c].mean(axis=0)

    return KMeansResult(
        assignments=assign, centers=centers, objective_history=history,
        iterations=iterations,
    )


def round_robin_select(
    cluster_members: list[list[int]],
    similarity: np.ndarray,
    n_target: int,
) -> list[int]:
    """Cycle clusters in id order, taking each cluster's unconsumed
    member most similar to the query, until ``n_target`` picks or all
    clusters are exhausted.  Similarity ties break on lower index."""
    if n_target <= 0:
        return []
    remaining = [sorted(m, key=lambda i: (-float(similarity[i]), i))
                 for m in cluster_members]
    picks: list[int] = []
    while len(picks) < n_target and any(remaining):
        for members in remaining:
            if members:
                picks.append(members.pop(0))
                if len(picks) == n_target:
                    break
    return picks
