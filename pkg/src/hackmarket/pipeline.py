"""End-to-end experiments: holdout evaluation grid and cluster diversity report."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .clustering import (DEFAULT_OUTLIER_THRESHOLD, CentroidSet, ClusteringResult, KMeansConfig,
                         LabeledSeedSet, filter_outliers, kmeans, max_similarity, seed_centroids)
from .corpus import DistinctProduct, ProductRecord, group_records
from .errors import PipelineError
from .evaluation import FacetEntropyRow, facet_entropy_report, holdout_evaluate
from .textprep import DEFAULT_STOPWORDS, STANDARD_SPECS, NgramSpec, normalize_text
from .vectorizer import TfIdfModel, fit_vocabulary, unstack

logger = logging.getLogger(__name__)

DEFAULT_HOLDOUT_FRAC = 0.2
DEFAULT_RANDOM_SPEC = NgramSpec("char", 3, 6)


def read_seed_file(path: str | Path) -> list[tuple[str, str]]:
    """(title, label) rows of a labeled-seed CSV with a ``title,label`` header."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames or not {"title", "label"} <= set(reader.fieldnames):
            raise PipelineError(f"{path}: seed file needs title and label columns")
        pairs = []
        for row in reader:
            title, label = (row["title"] or "").strip(), (row["label"] or "").strip()
            if not title or not label:
                raise PipelineError(f"{path}: empty title or label at line {reader.line_num}")
            pairs.append((title, label))
    if not pairs:
        raise PipelineError(f"{path}: no labeled rows")
    return pairs


def split_holdout(pairs: Sequence[tuple[str, str]], holdout_frac: float = DEFAULT_HOLDOUT_FRAC,
                  rng_seed: int = 0) -> tuple[list[tuple[str, str]], list[tuple[str, str]]]:
    """Stratified (seeds, holdout) split; every label keeps at least one seed.

    The holdout size is ``round(len(pairs) * holdout_frac)`` where label sizes
    allow, apportioned across labels by largest remainder.
    """
    if not 0.0 < holdout_frac < 1.0:
        raise PipelineError("holdout fraction must lie in (0, 1)")
    by_label: dict[str, list[int]] = {}
    for i, (_, lab) in enumerate(pairs):
        by_label.setdefault(lab, []).append(i)
    labels = sorted(by_label)
    target = round(len(pairs) * holdout_frac)
    cap = {lab: len(by_label[lab]) - 1 for lab in labels}
    exact = {lab: len(by_label[lab]) * holdout_frac for lab in labels}
    take = {lab: min(cap[lab], math.floor(exact[lab])) for lab in labels}
    spare = target - sum(take.values())
    for lab in sorted(labels, key=lambda l: (-(exact[l] - math.floor(exact[l])), l)):
        if spare <= 0:
            break
        if take[lab] < cap[lab]:
            take[lab] += 1
            spare -= 1

    rng = np.random.default_rng(rng_seed)
    held: set[int] = set()
    for lab in labels:
        idx = by_label[lab]
        held.update(idx[j] for j in rng.permutation(len(idx))[: take[lab]])
    seeds = [p for i, p in enumerate(pairs) if i not in held]
    holdout = [p for i, p in enumerate(pairs) if i in held]
    return seeds, holdout


@dataclass
class LabeledData:
    """Corpus titles plus an analyst-labeled sample split into seeds and holdout."""

    corpus_titles: list[str]
    seeds: list[tuple[str, str]]
    holdout: list[tuple[str, str]]

    @classmethod
    def build(cls, corpus_titles: Sequence[str], labeled: Sequence[tuple[str, str]],
              holdout_frac: float = DEFAULT_HOLDOUT_FRAC, rng_seed: int = 0) -> "LabeledData":
        seeds, holdout = split_holdout(labeled, holdout_frac, rng_seed)
        return cls(list(corpus_titles), seeds, holdout)

    @property
    def labels(self) -> list[str]:
        return sorted({lab for _, lab in self.seeds})

    def fit_titles(self) -> list[str]:
        """Distinct titles across corpus and labeled sample, for vocabulary fitting."""
        seen, out = set(), []
        for t in list(self.corpus_titles) + [t for t, _ in self.seeds + self.holdout]:
            key = normalize_text(t)
            if key not in seen:
                seen.add(key)
                out.append(t)
        return out

    def train_titles(self) -> list[str]:
        """Corpus titles minus the holdout ones."""
        held = {normalize_text(t) for t, _ in self.holdout}
        return [t for t in self.corpus_titles if normalize_text(t) not in held]


@dataclass
class Features:
    model: TfIdfModel
    train: object
    holdout: object
    holdout_truth: list[str]
    seeds: LabeledSeedSet


def featurize(data: LabeledData, spec: NgramSpec, stopwords=DEFAULT_STOPWORDS) -> Features:
    model = fit_vocabulary(data.fit_titles(), spec, stopwords)
    seed_vecs = unstack(model.transform_many([t for t, _ in data.seeds]))
    return Features(
        model=model,
        train=model.transform_many(data.train_titles()),
        holdout=model.transform_many([t for t, _ in data.holdout]),
        holdout_truth=[lab for _, lab in data.holdout],
        seeds=LabeledSeedSet.from_pairs(seed_vecs, [lab for _, lab in data.seeds]),
    )


@dataclass
class GridCell:
    spec: str
    distance: str
    init: str
    rand_index: float
    rand_index_sd: float
    entropy: float
    entropy_sd: float
    n_runs: int


@dataclass
class GridResult:
    specs: list[str]
    distances: list[str]
    random_spec: str
    cells: list[GridCell] = field(default_factory=list)

    def cell(self, spec: str, distance: str, init: str) -> GridCell:
        for c in self.cells:
            if (c.spec, c.distance, c.init) == (spec, distance, init):
                return c
        raise KeyError((spec, distance, init))

    @property
    def columns(self) -> list[str]:
        return list(self.specs) + ["Random"]

    def panel(self, metric: str) -> list[list]:
        """Rows of one panel: distance name, then one value per column."""
        attr = {"Rand-index": "rand_index", "Entropy": "entropy"}[metric]
        rows = []
        for d in self.distances:
            row = [d.capitalize()]
            row += [getattr(self.cell(s, d, "seeded"), attr) for s in self.specs]
            row.append(getattr(self.cell(self.random_spec, d, "random"), attr))
            rows.append(row)
        return rows

    def write_table_csv(self, path: str | Path, digits: int = 6) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            for metric in ("Rand-index", "Entropy"):
                writer.writerow([metric] + self.columns)
                for row in self.panel(metric):
                    writer.writerow([row[0]] + [f"{v:.{digits}f}" for v in row[1:]])

    def write_cells_csv(self, path: str | Path, digits: int = 6) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["spec", "distance", "init", "rand_index", "rand_index_sd", "entropy", "entropy_sd", "n_runs"])
            for c in self.cells:
                writer.writerow([c.spec, c.distance, c.init, f"{c.rand_index:.{digits}f}", f"{c.rand_index_sd:.{digits}f}",
                                 f"{c.entropy:.{digits}f}", f"{c.entropy_sd:.{digits}f}", c.n_runs])

    def to_json(self) -> dict:
        return {
            "columns": self.columns,
            "random_spec": self.random_spec,
            "panels": {m: self.panel(m) for m in ("Rand-index", "Entropy")},
            "cells": [asdict(c) for c in self.cells],
        }


def run_grid(data: LabeledData, specs: Sequence[NgramSpec] = STANDARD_SPECS,
             distances: Sequence[str] = ("cosine", "euclidean"), inits: Sequence[str] = ("seeded", "random"),
             n_random_seeds: int = 10, rng_seed: int = 0, random_spec: NgramSpec = DEFAULT_RANDOM_SPEC,
             frozen_centroids: bool = False, max_iter: int = 100, tol: float = 1e-6,
             stopwords=DEFAULT_STOPWORDS) -> GridResult:
    """Holdout Rand index and entropy for every feature spec x distance x init.

    Random-init cells average ``n_random_seeds`` runs (seeds ``rng_seed``,
    ``rng_seed + 1``, ...) and carry the standard deviation.
    """
    missing = set(lab for _, lab in data.holdout) - set(data.labels)
    if missing:
        raise PipelineError(f"labeled seeds lack labels: {', '.join(sorted(missing))}")
    k = len(data.labels)
    columns = list(specs)
    extra = [random_spec] if "random" in inits and random_spec not in columns else []
    result = GridResult([str(s) for s in columns], list(distances), str(random_spec))
    for spec in columns + extra:
        feats = featurize(data, spec, stopwords)
        for distance in distances:
            for init in inits:
                if spec in extra and init != "random":
                    continue
                seeds = range(rng_seed, rng_seed + n_random_seeds) if init == "random" else [rng_seed]
                ri, ent = [], []
                for s in seeds:
                    cfg = KMeansConfig(k=k, distance=distance, init=init, max_iter=max_iter, tol=tol, rng_seed=s,
                                       frozen_centroids=frozen_centroids and init == "seeded")
                    rep = holdout_evaluate(feats.train, feats.holdout, feats.holdout_truth, cfg, feats.seeds)
                    ri.append(rep.rand_index)
                    ent.append(rep.total_entropy_bits)
                result.cells.append(GridCell(str(spec), distance, init, float(np.mean(ri)), float(np.std(ri)),
                                             float(np.mean(ent)), float(np.std(ent)), len(ri)))
                logger.info("%s %s %s rand=%.4f entropy=%.4f", spec, distance, init, np.mean(ri), np.mean(ent))
    return result


@dataclass
class ClusterOutput:
    products: list[DistinctProduct]
    centroids: CentroidSet
    result: ClusteringResult
    kept: np.ndarray
    outliers: np.ndarray
    outlier_similarity: np.ndarray


def cluster_products(products: Sequence[DistinctProduct], model: TfIdfModel, config: KMeansConfig,
                     seeds: Sequence[tuple[str, str]] = (), threshold: float | None = DEFAULT_OUTLIER_THRESHOLD
                     ) -> ClusterOutput:
    """Cluster distinct products, dropping low-similarity outliers.

    Seeded runs filter against the seed centroids before clustering the kept
    products. Random-init runs filter against the final centroids afterwards
    and leave the kept products' assignments as they are.
    """
    x = model.transform_many([p.title or p.canonical_title for p in products])
    if config.init == "seeded":
        if not seeds:
            raise PipelineError("seeded clustering needs a seeds file")
        vecs = unstack(model.transform_many([t for t, _ in seeds]))
        init = seed_centroids(LabeledSeedSet.from_pairs(vecs, [lab for _, lab in seeds]), config.distance)
        if threshold is not None:
            kept, out = filter_outliers(x, init, threshold)
        else:
            kept, out = np.arange(x.shape[0]), np.empty(0, dtype=int)
        if not len(kept):
            raise PipelineError("every product fell below the outlier threshold")
        centroids, result = kmeans(x[kept], config, init)
    else:
        centroids, result = kmeans(x, config)
        if threshold is not None:
            kept, out = filter_outliers(x, centroids, threshold)
        else:
            kept, out = np.arange(x.shape[0]), np.empty(0, dtype=int)
        result = ClusteringResult(result.assignment[kept], result.best_score[kept], result.n_iterations,
                                  result.converged, result.objective, result.objective_history)
    sims = max_similarity(x[out], centroids) if len(out) else np.empty(0)
    return ClusterOutput(list(products), centroids, result, kept, out, sims)


def write_assignments(out: ClusterOutput, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["listing_id", "cluster_index", "cluster_label", "best_score"])
        for pos, i in enumerate(out.kept):
            a = int(out.result.assignment[pos])
            for lid in out.products[i].listing_ids:
                writer.writerow([lid, a, out.centroids.label(a), repr(float(out.result.best_score[pos]))])


def write_outliers(out: ClusterOutput, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["listing_id", "canonical_title", "max_similarity"])
        for i, sim in zip(out.outliers, out.outlier_similarity):
            for lid in out.products[i].listing_ids:
                writer.writerow([lid, out.products[i].canonical_title, repr(float(sim))])


def read_assignments(path: str | Path) -> dict[str, tuple[int, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        need = {"listing_id", "cluster_index", "cluster_label"}
        if not reader.fieldnames or not need <= set(reader.fieldnames):
            raise PipelineError(f"{path}: not an assignment file")
        return {row["listing_id"]: (int(row["cluster_index"]), row["cluster_label"]) for row in reader}


def run_report(records: Sequence[ProductRecord], products: Sequence[DistinctProduct],
               assignments: dict[str, tuple[int, str]]) -> list[FacetEntropyRow]:
    """Per-cluster market/vendor diversity of the clustered products.

    Products whose listings are absent from ``assignments`` (outliers) are
    skipped; a product whose listings disagree on the cluster is an error.
    """
    grouped = group_records(records, products)
    names: dict[int, str] = {}
    point_assign, point_records = [], []
    for prod, recs in zip(products, grouped):
        hits = {assignments[lid] for lid in prod.listing_ids if lid in assignments}
        if not hits:
            continue
        if len(hits) > 1:
            raise PipelineError(f"listings of {prod.canonical_title!r} carry different clusters")
        idx, label = hits.pop()
        names[idx] = label
        point_assign.append(idx)
        point_records.append(recs)
    if not point_assign:
        return []
    k = max(names) + 1
    labels = [names.get(i, f"cluster_{i}") for i in range(k)]
    return facet_entropy_report(point_assign, point_records, labels)
