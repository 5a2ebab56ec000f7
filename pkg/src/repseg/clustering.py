"""Adaptive k-means consolidation of candidate segmentation points.

Candidates are clustered on their feature vectors; the cluster count is
chosen by minimising ``intra + (N / K^2) * inter`` starting from K = 2 and
stopping at the first increase.  The winning cluster is the one whose
member points cover the most frames within a radius of one average cycle,
and its member frames become the repetition boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError

MAX_K = 10
RESTARTS = 5
_MAX_ITER = 200


@dataclass(frozen=True)
class ClusterModel:
    """One k-means fit: centres, assignment and both distance costs."""

    k: int
    centers: np.ndarray     # (k, n_features)
    labels: np.ndarray      # (n_points,)
    intra: float            # sum of squared member-to-centre distances
    inter: float            # sum over all ordered centre pairs
    n_points: int

    def indicator(self) -> np.ndarray:
        g = np.zeros((self.k, self.n_points))
        g[self.labels, np.arange(self.n_points)] = 1.0
        return g

    def members(self, cluster: int) -> np.ndarray:
        return np.flatnonzero(self.labels == cluster)


@dataclass(frozen=True)
class BoundarySelection:
    """Chosen cluster and the boundaries it contributes."""

    cluster_count: int
    chosen_cluster: int
    boundaries: list          # sorted member frames of the chosen cluster
    spans: list               # per-cluster covered-frame counts
    n_frames: int
    primary_bin: int


def _features_of(points):
    if not points:
        raise InputError("no candidate points")
    x = np.stack([np.asarray(p.features, dtype=float) for p in points])
    if x.ndim != 2:
        raise InputError("candidate features must be vectors")
    return x


def _costs(x: np.ndarray, centers: np.ndarray, labels: np.ndarray):
    intra = float(((x - centers[labels]) ** 2).sum())
    diff = centers[:, None, :] - centers[None, :, :]
    inter = float((diff ** 2).sum())
    return intra, inter


def _lloyd(x: np.ndarray, k: int, rng, spread_init: bool) -> tuple:
    n = len(x)
    # seeded first pick, then farthest-point; later restarts sample the
    # next centre proportionally to squared distance instead, which
    # explores more local optima than repeated farthest-point chains
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[int(rng.integers(n))]
    for c in range(1, k):
        d = ((x[:, None, :] - centers[None, :c, :]) ** 2).sum(axis=2).min(axis=1)
        if spread_init or d.sum() <= 0:
            centers[c] = x[int(np.argmax(d))]
        else:
            centers[c] = x[int(rng.choice(n, p=d / d.sum()))]

    labels = np.zeros(n, dtype=int)
    for _ in range(_MAX_ITER):
        d = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = np.argmin(d, axis=1)
        for c in range(k):
            mask = new_labels == c
            if mask.any():
                centers[c] = x[mask].mean(axis=0)
            else:
                # re-seed an emptied cluster at the point farthest from its centre
                far = int(np.argmax(((x - centers[c]) ** 2).sum(axis=1)))
                centers[c] = x[far]
                new_labels[far] = c
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return centers, labels


def kmeans(points, k: int, seed: int, restarts: int = RESTARTS) -> ClusterModel:
    """Best-of-restarts k-means on the candidate feature vectors."""
    x = _features_of(points)
    n = len(x)
    if not 1 <= k <= n:
        raise InputError(f"cluster count must lie in [1, {n}]")
    best = None
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        centers, labels = _lloyd(x, k, rng, spread_init=(r == 0))
        intra, inter = _costs(x, centers, labels)
        if best is None or intra < best.intra:
            best = ClusterModel(k=k, centers=centers, labels=labels,
                                intra=intra, inter=inter, n_points=n)
    return best


def clustering_cost(model: ClusterModel) -> float:
    """Combined cost ``intra + (N / K^2) * inter``."""
    weight = model.n_points / model.k ** 2
    return model.intra + weight * model.inter


def adaptive_k(points, seed: int = 0, k_cap: int = MAX_K,
               full_sweep: bool = False, restarts: int = RESTARTS):
    """Pick the cluster count by the combined cost.

    Starts at K = 2 and stops at the first cost increase (set
    ``full_sweep`` to scan every K up to the cap instead).  Returns
    ``(model, costs)`` where ``costs`` maps each evaluated K to its cost.
    """
    n = len(points)
    if n < 2:
        raise InputError("need at least 2 candidate points to cluster")
    k_max = min(k_cap, n)
    costs = {}
    best_model = None
    best_cost = np.inf
    previous = np.inf
    for k in range(2, k_max + 1):
        model = kmeans(points, k, seed, restarts=restarts)
        cost = clustering_cost(model)
        costs[k] = cost
        if cost < best_cost:
            best_cost = cost
            best_model = model
        if not full_sweep and cost > previous:
            break
        previous = cost
    return best_model, costs


def _span(frames, n_frames: int, radius: float) -> int:
    """Frames strictly closer than ``radius`` to any of ``frames`` (union)."""
    intervals = []
    for t in sorted(frames):
        lo = max(0, int(np.floor(t - radius)) + 1)
        hi = min(n_frames - 1, int(np.ceil(t + radius)) - 1)
        if hi < lo:
            continue
        if intervals and lo <= intervals[-1][1] + 1:
            intervals[-1][1] = max(intervals[-1][1], hi)
        else:
            intervals.append([lo, hi])
    return sum(hi - lo + 1 for lo, hi in intervals)


def select_boundaries(model: ClusterModel, points, n_frames: int,
                      primary_bin: int) -> BoundarySelection:
    """Pick the cluster covering the most frames; ties go to the cluster
    holding the earliest candidate."""
    if primary_bin < 1:
        raise InputError("primary bin must be >= 1")
    frames = np.array([p.frame for p in points])
    radius = n_frames / primary_bin
    spans = []
    earliest = []
    for c in range(model.k):
        member_frames = frames[model.members(c)]
        spans.append(_span(member_frames, n_frames, radius))
        earliest.append(int(member_frames.min()) if len(member_frames) else n_frames)
    ranked = sorted(range(model.k), key=lambda c: (-spans[c], earliest[c], c))
    chosen = ranked[0]
    boundaries = sorted(int(f) for f in frames[model.members(chosen)])
    return BoundarySelection(cluster_count=model.k, chosen_cluster=chosen,
                             boundaries=boundaries, spans=spans,
                             n_frames=n_frames, primary_bin=primary_bin)


def boundaries_to_segments(selection: BoundarySelection, n_frames: int) -> list:
    """Half-open [start, end) intervals between consecutive boundaries.

    Partial intervals at either end are kept as segments only when at
    least half an average cycle long, otherwise they are absorbed into
    the neighbouring segment.  The segments partition [0, n_frames).
    """
    threshold = n_frames / (2.0 * selection.primary_bin)
    b = [t for t in selection.boundaries if 0 <= t <= n_frames]
    if not b:
        return [(0, n_frames)]
    segments = [(b[i], b[i + 1]) for i in range(len(b) - 1)]
    lead = (0, b[0])
    trail = (b[-1], n_frames)
    if lead[1] - lead[0] > 0:
        if lead[1] - lead[0] >= threshold:
            segments.insert(0, lead)
        elif segments:
            segments[0] = (0, segments[0][1])
        else:
            trail = (0, trail[1])
    if trail[1] - trail[0] > 0:
        if trail[1] - trail[0] >= threshold:
            segments.append(trail)
        elif segments:
            segments[-1] = (segments[-1][0], n_frames)
        else:
            segments.append((0, n_frames))
    return segments
