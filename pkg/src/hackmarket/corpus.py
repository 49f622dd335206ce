"""Listing ingestion, cross-post deduplication and corpus statistics."""

from __future__ import annotations

import csv
import datetime as dt
import io
import json
import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Iterable, Sequence

from .errors import IngestError
from .textprep import normalize_text

logger = logging.getLogger(__name__)

REQUIRED_FIELDS = ("market", "vendor", "title")
OPTIONAL_FIELDS = ("listing_id", "description", "price", "currency", "rating", "posted_date")


@dataclass(frozen=True)
class ProductRecord:
    listing_id: str
    market_name: str
    vendor_name: str
    title: str
    description: str | None = None
    price: Decimal | None = None
    currency: str | None = None
    rating: float | None = None
    posted_date: dt.date | None = None

    def to_json(self) -> dict:
        out = {
            "listing_id": self.listing_id,
            "market": self.market_name,
            "vendor": self.vendor_name,
            "title": self.title,
        }
        if self.description is not None:
            out["description"] = self.description
        if self.price is not None:
            out["price"] = str(self.price)
        if self.currency is not None:
            out["currency"] = self.currency
        if self.rating is not None:
            out["rating"] = self.rating
        if self.posted_date is not None:
            out["posted_date"] = self.posted_date.isoformat()
        return out


@dataclass(frozen=True)
class DistinctProduct:
    canonical_title: str
    listing_ids: tuple[str, ...]
    vendors: frozenset[str]
    markets: frozenset[str]
    # First raw title seen for the group; kept for display only.
    title: str = ""

    def to_json(self) -> dict:
        return {
            "canonical_title": self.canonical_title,
            "title": self.title,
            "listing_ids": list(self.listing_ids),
            "vendors": sorted(self.vendors),
            "markets": sorted(self.markets),
        }


@dataclass(frozen=True)
class CorpusSummary:
    n_markets: int
    n_listings_total: int
    n_products_distinct: int
    n_vendors: int

    @property
    def distinct_fraction(self) -> float:
        return self.n_products_distinct / self.n_listings_total if self.n_listings_total else 0.0


@dataclass
class IngestReport:
    records: list[ProductRecord] = field(default_factory=list)
    skipped: list[IngestError] = field(default_factory=list)


def _blank(value) -> bool:
    return value is None or (isinstance(value, str) and not value.strip())


def _make_record(raw: dict, source: str, line: int, seen_ids: set[str]) -> ProductRecord:
    if not isinstance(raw, dict):
        raise IngestError("record is not an object", line)
    for key in REQUIRED_FIELDS:
        value = raw.get(key)
        if _blank(value):
            raise IngestError(f"empty {key}", line)
        if not isinstance(value, str):
            raise IngestError(f"{key} is not a string", line)

    listing_id = raw.get("listing_id")
    listing_id = f"{source}:{line}" if _blank(listing_id) else str(listing_id)
    if listing_id in seen_ids:
        raise IngestError(f"duplicate listing_id {listing_id!r}", line)

    price = None
    if not _blank(raw.get("price")):
        try:
            price = Decimal(str(raw["price"]))
        except InvalidOperation:
            raise IngestError(f"bad price {raw['price']!r}", line) from None
        if not price.is_finite() or price < 0:
            raise IngestError(f"bad price {raw['price']!r}", line)

    rating = None
    if not _blank(raw.get("rating")):
        try:
            rating = float(raw["rating"])
        except (TypeError, ValueError):
            raise IngestError(f"bad rating {raw['rating']!r}", line) from None
        if not math.isfinite(rating):
            raise IngestError(f"bad rating {raw['rating']!r}", line)

    posted = None
    if not _blank(raw.get("posted_date")):
        try:
            posted = dt.date.fromisoformat(str(raw["posted_date"])[:10])
        except ValueError:
            raise IngestError(f"bad posted_date {raw['posted_date']!r}", line) from None

    return ProductRecord(
        listing_id=listing_id,
        market_name=raw["market"].strip(),
        vendor_name=raw["vendor"].strip(),
        title=raw["title"].strip(),
        description=None if _blank(raw.get("description")) else str(raw["description"]),
        price=price,
        currency=None if _blank(raw.get("currency")) else str(raw["currency"]).strip(),
        rating=rating,
        posted_date=posted,
    )


def _jsonl_rows(text: str):
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            yield lineno, json.loads(line)
        except json.JSONDecodeError as exc:
            yield lineno, IngestError(f"malformed JSON ({exc.msg})", lineno)


def _csv_rows(text: str):
    reader = csv.DictReader(io.StringIO(text))
    missing = [k for k in REQUIRED_FIELDS if k not in (reader.fieldnames or [])]
    if missing:
        raise IngestError(f"CSV header lacks {', '.join(missing)}", 1)
    for row in reader:
        # Physical line of the row; the header is line 1.
        lineno = reader.line_num
        if None in row:
            yield lineno, IngestError("too many fields", lineno)
        elif any(v is None for v in row.values()):
            yield lineno, IngestError("too few fields", lineno)
        else:
            yield lineno, row


def ingest_products(path: str | Path, format: str | None = None, strict: bool = True) -> IngestReport:
    """Read a JSONL or CSV listing file into records, in file order.

    In strict mode the first bad line raises ``IngestError``; otherwise bad
    lines are collected in ``IngestReport.skipped``.
    """
    path = Path(path)
    fmt = format or ("csv" if path.suffix.lower() == ".csv" else "jsonl")
    if fmt not in ("jsonl", "csv"):
        raise IngestError(f"unknown format {fmt!r}")
    text = path.read_text(encoding="utf-8")
    rows = _jsonl_rows(text) if fmt == "jsonl" else _csv_rows(text)

    report = IngestReport()
    seen: set[str] = set()
    for lineno, raw in rows:
        try:
            if isinstance(raw, IngestError):
                raise raw
            record = _make_record(raw, path.name, lineno, seen)
        except IngestError as err:
            if strict:
                raise
            logger.warning("skipping %s: %s", path.name, err)
            report.skipped.append(err)
            continue
        seen.add(record.listing_id)
        report.records.append(record)
    return report


def write_jsonl(records: Iterable[ProductRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json(), sort_keys=True, ensure_ascii=False) + "\n")


def title_key(title: str, raw: bool = False) -> str:
    return title if raw else normalize_text(title)


def deduplicate(records: Sequence[ProductRecord], raw_titles: bool = False) -> list[DistinctProduct]:
    """Group listings whose normalized titles are equal.

    Groups come out in order of first appearance. ``raw_titles`` compares the
    untouched title strings instead.
    """
    groups: dict[str, list[ProductRecord]] = {}
    for rec in records:
        groups.setdefault(title_key(rec.title, raw_titles), []).append(rec)
    return [
        DistinctProduct(
            canonical_title=key,
            listing_ids=tuple(r.listing_id for r in members),
            vendors=frozenset(r.vendor_name for r in members),
            markets=frozenset(r.market_name for r in members),
            title=members[0].title,
        )
        for key, members in groups.items()
    ]


def group_records(records: Sequence[ProductRecord], products: Sequence[DistinctProduct]) -> list[list[ProductRecord]]:
    """Listings belonging to each distinct product, aligned with ``products``."""
    by_id = {r.listing_id: r for r in records}
    return [[by_id[i] for i in p.listing_ids] for p in products]


def vendor_market_distribution(records: Iterable[ProductRecord]) -> dict[int, int]:
    """Histogram of how many distinct markets each vendor name appears in."""
    markets: dict[str, set[str]] = defaultdict(set)
    for rec in records:
        markets[rec.vendor_name].add(rec.market_name)
    return dict(sorted(Counter(len(m) for m in markets.values()).items()))


def product_vendor_distribution(products: Iterable[DistinctProduct]) -> dict[int, int]:
    """Histogram of vendor-set size per distinct product."""
    return dict(sorted(Counter(len(p.vendors) for p in products).items()))


def unique_fraction(histogram: dict[int, int]) -> float:
    total = sum(histogram.values())
    return histogram.get(1, 0) / total if total else 0.0


def corpus_summary(records: Sequence[ProductRecord], products: Sequence[DistinctProduct]) -> CorpusSummary:
    return CorpusSummary(
        n_markets=len({r.market_name for r in records}),
        n_listings_total=len(records),
        n_products_distinct=len(products),
        n_vendors=len({r.vendor_name for r in records}),
    )


def write_histogram_csv(histogram: dict[int, int], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["bucket", "count"])
        for bucket, count in sorted(histogram.items()):
            writer.writerow([bucket, count])
