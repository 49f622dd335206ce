"""N-gram TF-IDF vectorization.

TF is the raw in-document count, IDF is smoothed as
``ln((1 + n_docs) / (1 + df)) + 1`` and every document vector is L2-normalized.
Feature indices follow lexicographic feature order so refitting a permuted
corpus gives the same model.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import PipelineError
from .textprep import DEFAULT_STOPWORDS, NgramSpec, analyze

MODEL_FORMAT = "hackmarket.tfidf/1"


@dataclass(frozen=True, eq=False)
class SparseVector:
    """Sorted ``(index, weight)`` entries of one document in vocabulary space."""

    indices: np.ndarray
    weights: np.ndarray
    dim: int

    def __post_init__(self):
        if len(self.indices) != len(self.weights):
            raise ValueError("indices and weights differ in length")
        if len(self.indices) > 1 and np.any(np.diff(self.indices) <= 0):
            raise ValueError("indices must be strictly ascending")
        if np.any(self.weights == 0) or not np.all(np.isfinite(self.weights)):
            raise ValueError("weights must be finite and nonzero")

    @property
    def is_zero(self) -> bool:
        return len(self.indices) == 0

    @property
    def entries(self) -> list[tuple[int, float]]:
        return list(zip(self.indices.tolist(), self.weights.tolist()))

    def norm(self) -> float:
        return float(np.sqrt(np.dot(self.weights, self.weights)))

    def dot(self, other: "SparseVector") -> float:
        common, ia, ib = np.intersect1d(self.indices, other.indices, assume_unique=True, return_indices=True)
        return float(np.dot(self.weights[ia], other.weights[ib])) if len(common) else 0.0

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        out[self.indices] = self.weights
        return out

    @classmethod
    def from_dense(cls, values) -> "SparseVector":
        values = np.asarray(values, dtype=float)
        idx = np.flatnonzero(values)
        return cls(idx, values[idx], len(values))

    def __eq__(self, other):
        if not isinstance(other, SparseVector):
            return NotImplemented
        return (self.dim == other.dim and np.array_equal(self.indices, other.indices)
                and np.array_equal(self.weights, other.weights))


def stack(vectors: Sequence[SparseVector], dim: int | None = None) -> sp.csr_matrix:
    """Rows of a CSR matrix from sparse vectors sharing one space."""
    if not vectors:
        if dim is None:
            raise PipelineError("no vectors to stack")
        return sp.csr_matrix((0, dim))
    dim = vectors[0].dim if dim is None else dim
    if any(v.dim != dim for v in vectors):
        raise PipelineError("vectors come from different vocabulary spaces")
    indptr = np.cumsum([0] + [len(v.indices) for v in vectors])
    indices = np.concatenate([v.indices for v in vectors]).astype(np.int64)
    data = np.concatenate([v.weights for v in vectors]).astype(float)
    return sp.csr_matrix((data, indices, indptr), shape=(len(vectors), dim))


def unstack(matrix: sp.spmatrix) -> list[SparseVector]:
    m = sp.csr_matrix(matrix)
    m.sort_indices()
    return [
        SparseVector(m.indices[m.indptr[i]:m.indptr[i + 1]].copy(),
                     m.data[m.indptr[i]:m.indptr[i + 1]].copy(), m.shape[1])
        for i in range(m.shape[0])
    ]


@dataclass(frozen=True, eq=False)
class TfIdfModel:
    spec: NgramSpec
    features: tuple[str, ...]
    doc_freq: np.ndarray
    n_docs: int
    stopwords: frozenset[str] = DEFAULT_STOPWORDS

    def __post_init__(self):
        object.__setattr__(self, "_index", {f: i for i, f in enumerate(self.features)})
        idf = np.log((1.0 + self.n_docs) / (1.0 + self.doc_freq)) + 1.0
        object.__setattr__(self, "idf", idf)

    @property
    def feature_to_index(self) -> dict[str, int]:
        return self._index

    @property
    def dim(self) -> int:
        return len(self.features)

    def _counts(self, title: str) -> Counter:
        return analyze(title, self.spec, self.stopwords)

    def transform(self, title: str) -> SparseVector:
        """TF-IDF vector of one title; out-of-vocabulary grams are dropped.

        A title with no known grams gives the zero vector (``is_zero`` set).
        """
        pairs = sorted((self._index[g], c) for g, c in self._counts(title).items() if g in self._index)
        if not pairs:
            return SparseVector(np.empty(0, dtype=np.int64), np.empty(0), self.dim)
        idx = np.array([p[0] for p in pairs], dtype=np.int64)
        w = np.array([p[1] for p in pairs], dtype=float) * self.idf[idx]
        return SparseVector(idx, w / np.sqrt(np.dot(w, w)), self.dim)

    def transform_many(self, titles: Iterable[str]) -> sp.csr_matrix:
        return stack([self.transform(t) for t in titles], self.dim)

    def save(self, path: str | Path) -> None:
        payload = {
            "format": MODEL_FORMAT,
            "spec": {"analyzer": self.spec.analyzer, "n_min": self.spec.n_min, "n_max": self.spec.n_max},
            "n_docs": self.n_docs,
            "features": list(self.features),
            "doc_freq": [int(x) for x in self.doc_freq],
            "stopwords": sorted(self.stopwords),
        }
        Path(path).write_text(json.dumps(payload, ensure_ascii=False) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "TfIdfModel":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        if payload.get("format") != MODEL_FORMAT:
            raise PipelineError(f"{path}: not a TF-IDF model file")
        return cls(
            spec=NgramSpec(**payload["spec"]),
            features=tuple(payload["features"]),
            doc_freq=np.asarray(payload["doc_freq"], dtype=np.int64),
            n_docs=int(payload["n_docs"]),
            stopwords=frozenset(payload.get("stopwords", DEFAULT_STOPWORDS)),
        )


def fit_vocabulary(docs: Sequence[str], spec: NgramSpec, stopwords: Iterable[str] = DEFAULT_STOPWORDS,
                   min_df: int = 1) -> TfIdfModel:
    if not docs:
        raise PipelineError("cannot fit empty corpus")
    stop = frozenset(stopwords)
    df: Counter = Counter()
    for doc in docs:
        df.update(analyze(doc, spec, stop).keys())
    features = tuple(sorted(f for f, c in df.items() if c >= min_df))
    return TfIdfModel(
        spec=spec,
        features=features,
        doc_freq=np.array([df[f] for f in features], dtype=np.int64),
        n_docs=len(docs),
        stopwords=stop,
    )


def fit_transform(docs: Sequence[str], spec: NgramSpec, stopwords: Iterable[str] = DEFAULT_STOPWORDS,
                  min_df: int = 1) -> tuple[TfIdfModel, list[SparseVector]]:
    model = fit_vocabulary(docs, spec, stopwords, min_df)
    return model, [model.transform(d) for d in docs]


def cosine(a: SparseVector, b: SparseVector) -> float:
    na, nb = a.norm(), b.norm()
    return a.dot(b) / (na * nb) if na and nb else 0.0
