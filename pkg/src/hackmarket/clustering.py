"""Seeded and random-init K-means under cosine similarity or Euclidean distance.

Cosine mode is spherical K-means: centroids are member means rescaled to unit
length, and points go to the centroid of highest cosine similarity. Euclidean
mode is plain Lloyd iteration on squared distance. Ties always go to the
lowest cluster index.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateSeedError, PipelineError
from .vectorizer import SparseVector, stack

logger = logging.getLogger(__name__)

DISTANCES = ("cosine", "euclidean")
INITS = ("seeded", "random")
DEFAULT_OUTLIER_THRESHOLD = 0.1


@dataclass(frozen=True)
class KMeansConfig:
    k: int = 34
    distance: str = "cosine"
    init: str = "seeded"
    max_iter: int = 100
    tol: float = 1e-6
    rng_seed: int = 0
    frozen_centroids: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise PipelineError("k must be at least 1")
        if self.distance not in DISTANCES:
            raise PipelineError(f"unknown distance {self.distance!r}")
        if self.init not in INITS:
            raise PipelineError(f"unknown init {self.init!r}")
        if self.max_iter < 1:
            raise PipelineError("max_iter must be positive")
        if self.tol < 0:
            raise PipelineError("tol must be non-negative")


@dataclass
class LabeledSeedSet:
    groups: dict[str, list[SparseVector]]

    @classmethod
    def from_pairs(cls, vectors: Sequence[SparseVector], labels: Sequence[str]) -> "LabeledSeedSet":
        groups: dict[str, list[SparseVector]] = {}
        for v, lab in zip(vectors, labels, strict=True):
            groups.setdefault(lab, []).append(v)
        return cls(groups)

    @property
    def labels(self) -> list[str]:
        return sorted(self.groups)


@dataclass(eq=False)
class CentroidSet:
    centroids: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        self.centroids = np.atleast_2d(np.asarray(self.centroids, dtype=float))
        if self.labels is not None and len(self.labels) != len(self.centroids):
            raise PipelineError("one label per centroid required")

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels else f"cluster_{i}"

    def to_json(self) -> dict:
        out = []
        for i, row in enumerate(self.centroids):
            idx = np.flatnonzero(row)
            out.append({
                "index": i,
                "label": self.label(i),
                "indices": idx.tolist(),
                "weights": row[idx].tolist(),
            })
        return {"dim": int(self.centroids.shape[1]), "labeled": self.labels is not None, "centroids": out}

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json()) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "CentroidSet":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        rows = payload["centroids"]
        c = np.zeros((len(rows), payload["dim"]))
        for i, row in enumerate(rows):
            c[i, row["indices"]] = row["weights"]
        labels = tuple(r["label"] for r in rows) if payload.get("labeled") else None
        return cls(c, labels)


@dataclass
class ClusteringResult:
    assignment: np.ndarray
    best_score: np.ndarray
    n_iterations: int
    converged: bool
    objective: float
    # Objective after every assignment pass, in order.
    objective_history: list[float] = field(default_factory=list)


def as_matrix(points) -> sp.csr_matrix:
    if sp.issparse(points):
        return sp.csr_matrix(points, dtype=float)
    if isinstance(points, np.ndarray):
        return sp.csr_matrix(np.atleast_2d(points).astype(float))
    return stack(list(points))


def _unit_rows(c: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(c, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    return c / safe[:, None]


def cosine_similarities(x: sp.csr_matrix, c: np.ndarray) -> np.ndarray:
    """(n, k) cosine similarities; zero rows on either side score 0."""
    xn = np.sqrt(np.asarray(x.multiply(x).sum(axis=1)).ravel())
    xn[xn == 0] = 1.0
    return np.asarray(x @ _unit_rows(c).T) / xn[:, None]


def squared_distances(x: sp.csr_matrix, c: np.ndarray) -> np.ndarray:
    xx = np.asarray(x.multiply(x).sum(axis=1)).ravel()
    cc = np.einsum("ij,ij->i", c, c)
    d = xx[:, None] - 2.0 * np.asarray(x @ c.T) + cc[None, :]
    return np.maximum(d, 0.0)


def assign(x: sp.csr_matrix, centroids: np.ndarray, distance: str) -> tuple[np.ndarray, np.ndarray, float]:
    """Nearest centroid per point.

    Returns the assignment, the per-point score (cosine similarity or
    Euclidean distance) and the objective (similarity sum or SSE).
    """
    if distance == "cosine":
        sims = cosine_similarities(x, centroids)
        a = np.argmax(sims, axis=1)
        best = sims[np.arange(len(a)), a]
        return a, best, float(best.sum())
    d2 = squared_distances(x, centroids)
    a = np.argmin(d2, axis=1)
    best = d2[np.arange(len(a)), a]
    return a, np.sqrt(best), float(best.sum())


def _member_means(x: sp.csr_matrix, a: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    n = x.shape[0]
    onehot = sp.csr_matrix((np.ones(n), (a, np.arange(n))), shape=(k, n))
    sums = np.asarray((onehot @ x).todense())
    counts = np.bincount(a, minlength=k)
    return sums, counts


def seed_centroids(seeds: LabeledSeedSet | Mapping[str, Sequence[SparseVector]], distance: str = "cosine") -> CentroidSet:
    """One centroid per label: the mean of its seed vectors (unit length in cosine mode)."""
    groups = seeds.groups if isinstance(seeds, LabeledSeedSet) else dict(seeds)
    if not groups:
        raise PipelineError("no seed groups")
    labels = sorted(groups)
    rows = []
    for lab in labels:
        vecs = groups[lab]
        if len(vecs) == 0:
            raise PipelineError(f"empty seed group {lab!r}")
        mean = np.asarray(as_matrix(vecs).mean(axis=0)).ravel()
        if not np.any(mean):
            raise DegenerateSeedError(f"degenerate seed group {lab!r}")
        if distance == "cosine":
            mean = mean / np.linalg.norm(mean)
        rows.append(mean)
    return CentroidSet(np.vstack(rows), tuple(labels))


def random_centroids(x: sp.csr_matrix, k: int, rng_seed: int, distance: str) -> CentroidSet:
    n = x.shape[0]
    if k > n:
        raise PipelineError(f"k={k} exceeds the {n} points available for random init")
    picks = np.random.default_rng(rng_seed).choice(n, size=k, replace=False)
    c = np.asarray(x[picks].todense())
    return CentroidSet(_unit_rows(c) if distance == "cosine" else c)


def _update(x, a, best, old, distance, repair):
    k = old.shape[0]
    sums, counts = _member_means(x, a, k)
    new = old.copy()
    filled = counts > 0
    new[filled] = sums[filled] / counts[filled, None]
    if distance == "cosine":
        norms = np.linalg.norm(new[filled], axis=1)
        rows = np.flatnonzero(filled)
        keep = norms > 0
        new[rows[keep]] = new[rows[keep]] / norms[keep, None]
        # All-zero members: the old centroid stays.
        new[rows[~keep]] = old[rows[~keep]]
    empty = np.flatnonzero(~filled)
    if repair and len(empty):
        # Farthest points first; never strip a cluster of its only member.
        order = np.argsort(best if distance == "cosine" else -best, kind="stable")
        remaining = counts.copy()
        chosen = []
        for i in order:
            if len(chosen) == len(empty):
                break
            if remaining[a[i]] > 1:
                remaining[a[i]] -= 1
                chosen.append(i)
        for j, i in zip(empty, chosen):
            row = np.asarray(x[i].todense()).ravel()
            if distance == "cosine" and np.any(row):
                row = row / np.linalg.norm(row)
            new[j] = row
            logger.debug("re-seeded empty cluster %d with point %d", j, i)
    return new


def kmeans(points, config: KMeansConfig,
           seeds: LabeledSeedSet | CentroidSet | None = None) -> tuple[CentroidSet, ClusteringResult]:
    """Lloyd iteration from seeded or random initial centroids.

    Stops when no assignment changes, when the largest centroid coordinate
    moves by at most ``tol``, or after ``max_iter`` passes. The returned
    assignment is always nearest-centroid with respect to the returned
    centroids. With ``frozen_centroids`` the seeded centroids are only used
    for a single assignment pass.
    """
    x = as_matrix(points)
    if x.shape[0] == 0:
        raise PipelineError("cannot cluster an empty point set")

    if config.init == "seeded":
        if seeds is None:
            raise PipelineError("seeded init needs a labeled seed set")
        init = seeds if isinstance(seeds, CentroidSet) else seed_centroids(seeds, config.distance)
        if init.k != config.k:
            raise PipelineError(f"seed set has {init.k} labels but k={config.k}")
    else:
        init = random_centroids(x, config.k, config.rng_seed, config.distance)
    if init.centroids.shape[1] != x.shape[1]:
        raise PipelineError("centroids and points live in different vocabulary spaces")

    c = init.centroids.copy()
    if config.frozen_centroids:
        a, best, obj = assign(x, c, config.distance)
        return CentroidSet(c, init.labels), ClusteringResult(a, best, 1, True, obj, [obj])

    history: list[float] = []
    prev = None
    converged = False
    stale = False
    it = 0
    for it in range(1, config.max_iter + 1):
        a, best, obj = assign(x, c, config.distance)
        history.append(obj)
        if prev is not None and np.array_equal(a, prev):
            converged = True
            stale = False
            break
        prev = a
        new = _update(x, a, best, c, config.distance, repair=config.init == "random")
        shift = float(np.max(np.abs(new - c)))
        c = new
        stale = True
        if shift <= config.tol:
            converged = True
            break

    if stale:
        # Centroids moved after the last pass: label against the final ones.
        a, best, obj = assign(x, c, config.distance)
        history.append(obj)
    return CentroidSet(c, init.labels), ClusteringResult(a, best, it, converged, obj, history)


def max_similarity(points, centroids: CentroidSet) -> np.ndarray:
    return cosine_similarities(as_matrix(points), centroids.centroids).max(axis=1)


def filter_outliers(points, centroids: CentroidSet,
                    threshold: float = DEFAULT_OUTLIER_THRESHOLD) -> tuple[np.ndarray, np.ndarray]:
    """Split point indices into (kept, outliers).

    A point is an outlier when its best cosine similarity to any centroid is
    strictly below ``threshold``.
    """
    best = max_similarity(points, centroids)
    mask = best < threshold
    return np.flatnonzero(~mask), np.flatnonzero(mask)
