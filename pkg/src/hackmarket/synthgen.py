"""Labeled synthetic marketplace corpora with known ground truth.

Each distinct product belongs to one category and draws 2-6 keywords from
that category's pool. Pools start disjoint; ``keyword_overlap_rate`` is the
chance that a pool slot instead holds a word native to another category, so
that vocabulary is shared between the two. With probability ``cross_list_rate`` a product is re-listed
verbatim; the number of extra listings follows a geometric law with
continuation probability ``cross_list_rate``, truncated so that every listing
of a product sits in its own market (own vendor for single-market
categories).
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Sequence

import numpy as np

from ._wordlists import KEYWORDS, NOISE, TAXONOMY
from .corpus import ProductRecord, write_jsonl
from .textprep import DEFAULT_STOPWORDS, normalize_text, stem

_CONSONANTS = "bcdfghjklmnprstvz"
_VOWELS = "aeiou"


@dataclass(frozen=True)
class SynthConfig:
    n_categories: int = 34
    keywords_per_category: int = 10
    titles_per_category: int = 30
    n_vendors: int = 300
    n_markets: int = 17
    cross_list_rate: float = 0.43
    keyword_overlap_rate: float = 0.0
    noise_token_rate: float = 0.0
    rng_seed: int = 0
    vendor_skew: float = 1.0
    market_skew: float = 0.8
    # Category names whose listings all come from one market / one vendor.
    single_market_categories: tuple[str, ...] = ()
    single_vendor_categories: tuple[str, ...] = ()
    # Inclusive range of keywords drawn per title.
    title_words: tuple[int, int] = (2, 6)

    def __post_init__(self):
        for name in ("cross_list_rate", "keyword_overlap_rate", "noise_token_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        for name in ("n_categories", "keywords_per_category", "titles_per_category", "n_vendors", "n_markets"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        lo, hi = self.title_words
        if not 1 <= lo <= hi:
            raise ValueError(f"title_words must satisfy 1 <= min <= max, got {self.title_words}")
        if self.vendor_skew < 0 or self.market_skew < 0:
            raise ValueError("skew exponents must be non-negative")
        unknown = set(self.single_market_categories + self.single_vendor_categories) - set(self.category_names)
        if unknown:
            raise ValueError(f"unknown categories: {sorted(unknown)}")

    @property
    def category_names(self) -> list[str]:
        names = list(TAXONOMY[: self.n_categories])
        names += [f"Category {i + 1}" for i in range(len(names), self.n_categories)]
        return names


@dataclass
class SynthCorpus:
    config: SynthConfig
    records: list[ProductRecord]
    # Category of each distinct product, in first-appearance order (the order
    # deduplicate() returns).
    truth: list[str]
    titles: list[str]
    listing_labels: dict[str, str]
    keyword_pools: dict[str, list[str]] = field(repr=False, default_factory=dict)


def _pseudoword(rng: np.random.Generator) -> str:
    n = int(rng.integers(3, 5))
    return "".join(_CONSONANTS[rng.integers(len(_CONSONANTS))] + _VOWELS[rng.integers(len(_VOWELS))]
                   for _ in range(n))


def native_pools(config: SynthConfig) -> dict[str, list[str]]:
    """Disjoint pools: no two keywords anywhere share a stem, and none is a stopword."""
    used = {stem(normalize_text(w)) for w in NOISE}
    filler = np.random.default_rng(7919)
    pools = {}
    for name in config.category_names:
        pool = []
        for word in KEYWORDS.get(name, "").split():
            s = stem(normalize_text(word))
            if s in used or word in DEFAULT_STOPWORDS:
                continue
            used.add(s)
            pool.append(word)
            if len(pool) == config.keywords_per_category:
                break
        while len(pool) < config.keywords_per_category:
            word = _pseudoword(filler)
            s = stem(word)
            if s not in used and word not in DEFAULT_STOPWORDS:
                used.add(s)
                pool.append(word)
        pools[name] = pool
    return pools


def keyword_pools(config: SynthConfig, rng: np.random.Generator | None = None) -> dict[str, list[str]]:
    """Native pools with each slot swapped, at the overlap rate, for another category's word."""
    native = native_pools(config)
    names = config.category_names
    if config.keyword_overlap_rate == 0 or len(names) < 2:
        return native
    rng = rng or np.random.default_rng(config.rng_seed)
    pools = {}
    for ci, name in enumerate(names):
        pool = []
        for word in native[name]:
            if rng.random() < config.keyword_overlap_rate:
                other = names[(ci + 1 + int(rng.integers(len(names) - 1))) % len(names)]
                candidates = [w for w in native[other] if w not in pool]
                word = candidates[int(rng.integers(len(candidates)))]
            pool.append(word)
        pools[name] = pool
    return pools


def _zipf_weights(n: int, exponent: float) -> np.ndarray:
    w = 1.0 / np.arange(1, n + 1) ** exponent
    return w / w.sum()


def relist_count_pmf(rate: float, max_extra: int) -> np.ndarray:
    """P(extra listings = j) for j = 1..max_extra, given the product is re-listed."""
    if max_extra < 1:
        return np.zeros(0)
    j = np.arange(1, max_extra + 1)
    if rate >= 1.0:
        pmf = np.zeros(max_extra)
        pmf[-1] = 1.0
        return pmf
    pmf = rate ** (j - 1) * (1 - rate)
    return pmf / pmf.sum()


def _max_extra(config: SynthConfig, category: str) -> int:
    if category in config.single_market_categories:
        return config.n_vendors - 1
    return config.n_markets - 1


def expected_listings_per_product(config: SynthConfig, category: str | None = None) -> float:
    """E[listings] of one product: 1 + rate * E[extra | re-listed]."""
    name = category or config.category_names[0]
    pmf = relist_count_pmf(config.cross_list_rate, _max_extra(config, name))
    if not len(pmf):
        return 1.0
    return 1.0 + config.cross_list_rate * float(np.dot(np.arange(1, len(pmf) + 1), pmf))


def expected_distinct_fraction(config: SynthConfig) -> float:
    """Expected distinct-products / listings ratio (ratio of expectations)."""
    names = config.category_names
    total = sum(expected_listings_per_product(config, c) for c in names)
    return len(names) / total


def expected_single_vendor_fraction(config: SynthConfig) -> float:
    """Expected share of distinct products sold by exactly one vendor."""
    names = config.category_names
    r = config.cross_list_rate
    shares = []
    for c in names:
        if c in config.single_vendor_categories:
            shares.append(1.0)
        elif _max_extra(config, c) < 1:
            shares.append(1.0)
        else:
            shares.append(1.0 - r)
    return float(np.mean(shares))


def _draw_extra(rng: np.random.Generator, rate: float, max_extra: int) -> int:
    if max_extra < 1 or rng.random() >= rate:
        return 0
    pmf = relist_count_pmf(rate, max_extra)
    return int(np.searchsorted(np.cumsum(pmf), rng.random() * pmf.sum(), side="right")) + 1


def _weighted_distinct(rng, weights, exclude, count):
    """``count`` distinct indices drawn by weight, avoiding ``exclude``."""
    w = weights.copy()
    w[list(exclude)] = 0.0
    if count > np.count_nonzero(w):
        raise ValueError("not enough distinct values to draw from")
    return [int(i) for i in rng.choice(len(w), size=count, replace=False, p=w / w.sum())]


def _decorate(rng: np.random.Generator, words: list[str]) -> str:
    style = rng.integers(4)
    if style == 1:
        words = [w.capitalize() for w in words]
    elif style == 2:
        words = [w.upper() for w in words]
    sep = " - " if rng.random() < 0.1 else " "
    text = sep.join(words)
    if rng.random() < 0.15:
        text += " !!"
    return text


def _compose(rng, pool: list[str], config: SynthConfig) -> list[str]:
    lo, hi = config.title_words
    picks = rng.permutation(len(pool))[: int(rng.integers(lo, hi + 1))]
    words = []
    for j in picks:
        words.append(pool[j])
        if rng.random() < config.noise_token_rate:
            words.append(NOISE[rng.integers(len(NOISE))])
    return words


def generate_corpus(config: SynthConfig) -> SynthCorpus:
    rng = np.random.default_rng(config.rng_seed)
    names = config.category_names
    pools = keyword_pools(config, rng)
    vendors = [f"vendor{i:04d}" for i in range(config.n_vendors)]
    markets = [f"Market{i:02d}" for i in range(config.n_markets)]
    vendor_w = _zipf_weights(config.n_vendors, config.vendor_skew)
    market_w = _zipf_weights(config.n_markets, config.market_skew)
    # Dedicated sellers/markets for the designated categories.
    solo_vendor = {c: int(rng.choice(config.n_vendors, p=vendor_w)) for c in config.single_vendor_categories}
    solo_market = {c: int(rng.choice(config.n_markets, p=market_w)) for c in config.single_market_categories}

    plan = [c for c in names for _ in range(config.titles_per_category)]
    plan = [plan[i] for i in rng.permutation(len(plan))]

    seen_titles: set[str] = set()
    records: list[ProductRecord] = []
    truth, titles = [], []
    listing_labels: dict[str, str] = {}
    base_date = dt.date(2015, 7, 1)
    for category in plan:
        for attempt in range(50):
            words = _compose(rng, pools[category], config)
            if attempt == 49:
                words.append(f"v{len(truth)}")
            key = normalize_text(" ".join(words))
            if key not in seen_titles:
                break
        seen_titles.add(key)
        title = _decorate(rng, words)
        truth.append(category)
        titles.append(title)

        extra = _draw_extra(rng, config.cross_list_rate, _max_extra(config, category))
        n_list = 1 + extra
        if category in solo_market:
            mk = [solo_market[category]] * n_list
        else:
            mk = _weighted_distinct(rng, market_w, (), n_list)
        if category in solo_vendor:
            vd = [solo_vendor[category]] * n_list
        else:
            vd = _weighted_distinct(rng, vendor_w, (), min(n_list, config.n_vendors))
            vd += [vd[-1]] * (n_list - len(vd))
        price = Decimal(int(rng.integers(100, 50000))) / 100
        rating = round(float(rng.uniform(0, 5)), 1)
        posted = base_date + dt.timedelta(days=int(rng.integers(0, 180)))
        for m, v in zip(mk, vd):
            lid = f"synth:{len(records) + 1}"
            records.append(ProductRecord(
                listing_id=lid, market_name=markets[m], vendor_name=vendors[v], title=title,
                price=price, currency="USD", rating=rating, posted_date=posted,
            ))
            listing_labels[lid] = category
    return SynthCorpus(config, records, truth, titles, listing_labels, pools)


def labeled_sample(corpus: SynthCorpus, n_labeled: int = 500, rng_seed: int = 0) -> list[tuple[str, str]]:
    """Stratified (title, label) sample of distinct products, as an analyst would label them."""
    rng = np.random.default_rng(rng_seed)
    by_cat: dict[str, list[int]] = {}
    for i, c in enumerate(corpus.truth):
        by_cat.setdefault(c, []).append(i)
    cats = sorted(by_cat)
    n_labeled = min(n_labeled, len(corpus.truth))
    quota = {c: 0 for c in cats}
    # Round-robin over shuffled categories keeps quotas within one of each other.
    order = [cats[i] for i in rng.permutation(len(cats))]
    left = n_labeled
    while left:
        progressed = False
        for c in order:
            if left and quota[c] < len(by_cat[c]):
                quota[c] += 1
                left -= 1
                progressed = True
        if not progressed:
            break
    picks = []
    for c in cats:
        idx = [by_cat[c][i] for i in rng.permutation(len(by_cat[c]))[: quota[c]]]
        picks.extend(idx)
    picks.sort()
    return [(corpus.titles[i], corpus.truth[i]) for i in picks]


def write_corpus(corpus: SynthCorpus, out_dir: str | Path, labeled: Sequence[tuple[str, str]] = ()) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_jsonl(corpus.records, out / "corpus.jsonl")
    with open(out / "truth.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["listing_id", "category"])
        for rec in corpus.records:
            writer.writerow([rec.listing_id, corpus.listing_labels[rec.listing_id]])
    if labeled:
        write_seed_file(labeled, out / "labeled.csv")


def write_seed_file(pairs: Sequence[tuple[str, str]], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["title", "label"])
        writer.writerows(pairs)


def junk_title(rng: np.random.Generator, length: int = 12) -> str:
    """Random consonant string, for outlier tests; callers check it shares no grams."""
    letters = "qxzjwvk"
    return "".join(letters[rng.integers(len(letters))] for _ in range(length))
