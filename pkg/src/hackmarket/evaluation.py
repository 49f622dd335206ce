"""Rand index, class-mixture entropy and per-cluster market/vendor diversity."""

from __future__ import annotations

import csv
import json
import logging
import math
from collections import Counter
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Hashable, Iterable, Mapping, Sequence


from .clustering import CentroidSet, KMeansConfig, LabeledSeedSet, assign, as_matrix, kmeans
from .corpus import ProductRecord
from .errors import PipelineError

logger = logging.getLogger(__name__)

FACET_COLUMNS = (
    "Rank", "Cluster Name", "No of Products", "No of Markets",
    "Market Entropy", "No of Vendors", "Vendor Entropy",
)


def _pairs(n: int) -> int:
    return n * (n - 1) // 2


def rand_index(pred: Sequence[Hashable], truth: Sequence[Hashable]) -> float:
    """Fraction of point pairs on which the two labelings agree.

    A pair agrees when both put it in one group or both split it. Computed
    from the contingency table in exact integer arithmetic.
    """
    n = len(pred)
    if n != len(truth):
        raise PipelineError(f"label vectors differ in length ({n} vs {len(truth)})")
    if n < 2:
        raise PipelineError("rand index needs at least two points")
    joint = Counter(zip(pred, truth))
    together_both = sum(_pairs(c) for c in joint.values())
    together_pred = sum(_pairs(c) for c in Counter(pred).values())
    together_truth = sum(_pairs(c) for c in Counter(truth).values())
    total = _pairs(n)
    agree = total + 2 * together_both - together_pred - together_truth
    return agree / total


def _counts(class_counts) -> list[int]:
    if isinstance(class_counts, Mapping):
        return list(class_counts.values())
    return list(class_counts)


def cluster_entropy(class_counts: Mapping[Hashable, int] | Sequence[int]) -> float:
    """Entropy in bits of the class mix inside one cluster (0 log 0 taken as 0)."""
    counts = _counts(class_counts)
    if any(c < 0 for c in counts):
        raise PipelineError("class counts must be non-negative")
    size = sum(counts)
    if size < 1:
        raise PipelineError("entropy of an empty cluster is undefined")
    h = 0.0
    for c in counts:
        if c > 0:
            p = c / size
            h -= p * math.log2(p)
    return max(h, 0.0)


def total_entropy(clusters: Iterable[Mapping[Hashable, int] | Sequence[int]]) -> float:
    """Cluster entropies averaged with weights |cluster| / |all points|; empty clusters drop out."""
    sized = [(sum(_counts(c)), c) for c in clusters]
    sized = [(s, c) for s, c in sized if s > 0]
    n = sum(s for s, _ in sized)
    if n == 0:
        raise PipelineError("all clusters are empty")
    return sum(s / n * cluster_entropy(c) for s, c in sized)


def contingency(pred: Sequence[Hashable], truth: Sequence[Hashable]) -> dict[Hashable, Counter]:
    table: dict[Hashable, Counter] = {}
    for p, t in zip(pred, truth, strict=True):
        table.setdefault(p, Counter())[t] += 1
    return table


@dataclass
class EvalReport:
    rand_index: float
    total_entropy_bits: float
    per_cluster_entropy: dict[str, float]
    n_points: int

    def to_json(self) -> dict:
        return asdict(self)


def evaluate_labels(pred: Sequence[Hashable], truth: Sequence[Hashable]) -> EvalReport:
    table = contingency(pred, truth)
    per = {str(k): cluster_entropy(v) for k, v in sorted(table.items(), key=lambda kv: str(kv[0]))}
    return EvalReport(
        rand_index=rand_index(pred, truth),
        total_entropy_bits=total_entropy(table.values()),
        per_cluster_entropy=per,
        n_points=len(pred),
    )


def holdout_evaluate(train_points, holdout_points, holdout_truth: Sequence[str], config: KMeansConfig,
                     seeds: LabeledSeedSet | None = None) -> EvalReport:
    """Cluster the training points, then score holdout points on the final centroids.

    Predicted groups are cluster labels (seeded) or indices (random), so no
    cluster-to-class matching is needed for either metric.
    """
    if seeds is not None and config.init == "seeded":
        missing = set(holdout_truth) - set(seeds.groups)
        if missing:
            raise PipelineError(f"seed set lacks holdout labels: {', '.join(sorted(missing))}")
    centroids, _ = kmeans(train_points, config, seeds)
    a, _, _ = assign(as_matrix(holdout_points), centroids.centroids, config.distance)
    pred = [centroids.label(i) for i in a]
    return evaluate_labels(pred, list(holdout_truth))


@dataclass(frozen=True)
class FacetEntropyRow:
    rank: int
    cluster_name: str
    n_products: int
    n_markets: int
    market_entropy: float
    market_entropy_bits: float
    n_vendors: int
    vendor_entropy: float
    vendor_entropy_bits: float

    def table_row(self, normalized: bool = True) -> list:
        return [
            self.rank, self.cluster_name, self.n_products, self.n_markets,
            self.market_entropy if normalized else self.market_entropy_bits,
            self.n_vendors,
            self.vendor_entropy if normalized else self.vendor_entropy_bits,
        ]


def facet_entropy(values: Iterable[str]) -> tuple[int, float, float]:
    """(distinct values, entropy in bits, entropy / log2(max(2, distinct)))."""
    counts = Counter(values)
    bits = cluster_entropy(counts)
    return len(counts), bits, bits / math.log2(max(2, len(counts)))


def facet_entropy_report(assignment: Sequence[int], point_records: Sequence[ProductRecord | Sequence[ProductRecord]],
                         centroids: CentroidSet | Sequence[str] | None = None,
                         k: int | None = None) -> list[FacetEntropyRow]:
    """Market and vendor diversity per cluster, ranked by product count.

    Each point is a distinct product; every listing of it counts toward the
    cluster's market and vendor distributions. Clusters without members are
    left out.
    """
    if len(assignment) != len(point_records):
        raise PipelineError("assignment and records are not aligned")
    if isinstance(centroids, CentroidSet):
        names = [centroids.label(i) for i in range(centroids.k)]
    elif centroids is not None:
        names = list(centroids)
    else:
        names = None
    n_clusters = len(names) if names is not None else (k if k is not None else (max(assignment, default=-1) + 1))

    members: dict[int, list[Sequence[ProductRecord]]] = {i: [] for i in range(n_clusters)}
    for a, recs in zip(assignment, point_records):
        members.setdefault(int(a), []).append([recs] if isinstance(recs, ProductRecord) else list(recs))

    rows = []
    for idx, products in members.items():
        name = names[idx] if names is not None and idx < len(names) else f"cluster_{idx}"
        if not products:
            logger.warning("cluster %s has no members; omitted from report", name)
            continue
        listings = [r for p in products for r in p]
        nm, mb, mn = facet_entropy(r.market_name for r in listings)
        nv, vb, vn = facet_entropy(r.vendor_name for r in listings)
        rows.append((name, len(products), nm, mn, mb, nv, vn, vb))
    rows.sort(key=lambda r: (-r[1], r[0]))
    return [FacetEntropyRow(rank, *r) for rank, r in enumerate(rows, start=1)]


def write_facet_csv(rows: Sequence[FacetEntropyRow], path: str | Path, normalized: bool = True,
                    digits: int = 3) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(FACET_COLUMNS)
        for row in rows:
            cells = row.table_row(normalized)
            cells[4] = f"{cells[4]:.{digits}f}"
            cells[6] = f"{cells[6]:.{digits}f}"
            writer.writerow(cells)


def write_facet_json(rows: Sequence[FacetEntropyRow], path: str | Path) -> None:
    Path(path).write_text(json.dumps([asdict(r) for r in rows], indent=2) + "\n", encoding="utf-8")
