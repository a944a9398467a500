"""Cosine-similarity K-means over embedding vectors and representative selection.

The clustering is spherical: vectors are L2-normalized, similarity is the dot
product, and each update step maximizes the summed cosine similarity of
members to their own (unit-norm) centroid. Runs are deterministic for a fixed
seed and invariant to input order: internally the vectors are processed in a
canonical order keyed by their content hash, so permuting the inputs permutes
the labels without changing the partition.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyCluster, TooFewVectors, ZeroVector

_EPS = 1e-12


@dataclass
class ClusterAssignment:
    labels: list[int]
    centroids: np.ndarray  # shape (k, d), unit-norm rows
    k: int
    seed: int
    iterations_run: int
    objective_trace: list[float] = field(default_factory=list)

    def members(self, cluster_id: int) -> list[int]:
        return [i for i, l in enumerate(self.labels) if l == cluster_id]


def _as_array(v) -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("expected a 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector has non-finite entries")
    return arr


def normalize(v) -> np.ndarray:
    """Scale a vector to unit L2 norm, preserving direction."""
    arr = _as_array(v)
    n = float(np.linalg.norm(arr))
    if n < _EPS:
        raise ZeroVector("cannot normalize a zero vector")
    return arr / n


def cosine_similarity(a, b) -> float:
    return float(np.dot(normalize(a), normalize(b)))


def _content_keys(rows: np.ndarray) -> list[bytes]:
    return [hashlib.sha256(row.tobytes()).digest() for row in rows]


def _canonical_order(rows: np.ndarray) -> np.ndarray:
    keys = _content_keys(rows)
    return np.array(sorted(range(len(keys)), key=lambda i: keys[i]), dtype=np.int64)


def _init_plus_plus(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ style seeding over unit vectors (D^2 = 2 - 2*cos)."""
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]), dtype=np.float64)
    first = int(rng.integers(n))
    centers[0] = x[first]
    if k == 1:
        return centers
    best_sim = x @ centers[0]
    for j in range(1, k):
        d2 = np.maximum(2.0 - 2.0 * best_sim, 0.0)
        total = float(d2.sum())
        if total < _EPS:
            # all points coincide with chosen centers; take the first unseeded row
            idx = int(j % n)
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[j] = x[idx]
        best_sim = np.maximum(best_sim, x @ centers[j])
    return centers


def _recenter(x: np.ndarray, labels: np.ndarray, k: int, old: np.ndarray) -> np.ndarray:
    centers = np.empty_like(old)
    for j in range(k):
        mask = labels == j
        if not mask.any():
            centers[j] = old[j]
            continue
        s = x[mask].sum(axis=0)
        n = float(np.linalg.norm(s))
        centers[j] = s / n if n > _EPS else x[mask][0]
    return centers


def kmeans(vectors, k: int, seed: int, max_iter: int = 100, tol: float = 1e-6) -> ClusterAssignment:
    """Spherical K-means; deterministic for fixed (vector multiset, k, seed)."""
    x_in = np.asarray([_as_array(v) for v in vectors], dtype=np.float64)
    n = x_in.shape[0]
    if k <= 0:
        raise ValueError("k must be positive")
    if n < k:
        raise TooFewVectors(k, n)
    norms = np.linalg.norm(x_in, axis=1)
    if np.any(norms < _EPS):
        raise ZeroVector("all input vectors must be nonzero")
    x_all = x_in / norms[:, None]

    order = _canonical_order(x_all)
    x = x_all[order]
    rng = np.random.default_rng(seed)
    centers = _init_plus_plus(x, k, rng)

    labels = np.full(n, -1, dtype=np.int64)
    trace: list[float] = []
    iterations = 0
    for iterations in range(1, max_iter + 1):
        sims = x @ centers.T
        new_labels = np.argmax(sims, axis=1)

        # repair empty clusters from the globally worst-fit point
        for j in range(k):
            if (new_labels == j).any():
                continue
            fit = sims[np.arange(n), new_labels]
            counts = np.bincount(new_labels, minlength=k)
            movable = counts[new_labels] > 1
            if not movable.any():
                break
            worst = int(np.flatnonzero(movable)[np.argmin(fit[movable])])
            new_labels[worst] = j
            centers[j] = x[worst]
            sims = x @ centers.T

        new_centers = _recenter(x, new_labels, k, centers)
        trace.append(float((x * new_centers[new_labels]).sum()))
        shift = float(np.max(np.linalg.norm(new_centers - centers, axis=1)))
        converged = np.array_equal(new_labels, labels) or shift < tol
        labels, centers = new_labels, new_centers
        if converged:
            break

    out_labels = np.empty(n, dtype=np.int64)
    out_labels[order] = labels
    return ClusterAssignment(
        labels=[int(l) for l in out_labels],
        centroids=centers,
        k=k,
        seed=seed,
        iterations_run=iterations,
        objective_trace=trace,
    )


def top_representatives(cluster_members, centroid, m: int) -> list:
    """Ids of the min(m, size) members most similar to the centroid.

    Descending similarity; ties broken by ascending id.
    """
    members = list(cluster_members)
    if not members:
        raise EmptyCluster("cannot pick representatives from an empty cluster")
    if m <= 0:
        raise ValueError("m must be positive")
    c = normalize(centroid)
    scored = [(float(np.dot(normalize(vec), c)), mid) for mid, vec in members]
    scored.sort(key=lambda p: (-p[0], p[1]))
    return [mid for _, mid in scored[: min(m, len(scored))]]
