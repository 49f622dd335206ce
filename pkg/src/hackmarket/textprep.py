"""Title normalization, tokenization, stopword removal, stemming and n-grams."""

from __future__ import annotations

import re
import unicodedata
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

from nltk.stem.porter import PorterStemmer

from ._stopwords import ENGLISH_STOPWORDS

DEFAULT_STOPWORDS = ENGLISH_STOPWORDS

_WS = re.compile(r"\s+")
# The original Porter algorithm; nltk's default mode carries later extensions
# whose output has drifted between releases.
_STEMMER = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)


@dataclass(frozen=True)
class NgramSpec:
    analyzer: str
    n_min: int
    n_max: int

    def __post_init__(self):
        if self.analyzer not in ("word", "char"):
            raise ValueError(f"unknown analyzer {self.analyzer!r}")
        if not 1 <= self.n_min <= self.n_max:
            raise ValueError(f"invalid n-gram range ({self.n_min},{self.n_max})")

    @classmethod
    def parse(cls, text: str) -> "NgramSpec":
        """Parse ``char:3-6``, ``word:1-2``, ``word:1`` or ``char(3,6)``."""
        m = re.fullmatch(r"\s*(word|char)\s*[:(]\s*(\d+)\s*(?:[-,]\s*(\d+))?\s*\)?\s*", text)
        if not m:
            raise ValueError(f"cannot parse n-gram spec {text!r}")
        lo = int(m.group(2))
        hi = int(m.group(3)) if m.group(3) else lo
        return cls(m.group(1), lo, hi)

    def __str__(self) -> str:
        return f"{self.analyzer}({self.n_min},{self.n_max})"


# The ten feature configurations of the experiment grid, in table column order.
STANDARD_SPECS: tuple[NgramSpec, ...] = (
    NgramSpec("word", 1, 1),
    NgramSpec("word", 1, 2),
    NgramSpec("char", 3, 4),
    NgramSpec("char", 3, 5),
    NgramSpec("char", 3, 6),
    NgramSpec("char", 3, 7),
    NgramSpec("char", 4, 4),
    NgramSpec("char", 4, 5),
    NgramSpec("char", 4, 6),
    NgramSpec("char", 4, 7),
)


def normalize_text(raw: str) -> str:
    """NFKC-fold, lowercase, map non-alphanumerics to spaces, collapse whitespace."""
    folded = unicodedata.normalize("NFKC", raw).lower()
    chars = [c if c.isalnum() else " " for c in folded]
    return _WS.sub(" ", "".join(chars)).strip()


def tokenize(text: str) -> list[str]:
    return text.split(" ") if text else []


@lru_cache(maxsize=200_000)
def stem(token: str) -> str:
    return _STEMMER.stem(token, to_lowercase=False)


def filter_and_stem(tokens: Iterable[str], stopwords: Iterable[str] = DEFAULT_STOPWORDS) -> list[str]:
    stop = stopwords if isinstance(stopwords, (set, frozenset)) else frozenset(stopwords)
    return [stem(t) for t in tokens if t not in stop]


def load_stopwords(path: str | Path) -> frozenset[str]:
    """Read a one-word-per-line stopword file; blank lines and ``#`` comments are skipped."""
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(normalize_text(line))
    words.discard("")
    return frozenset(words)


def extract_ngrams(source: str | Sequence[str], spec: NgramSpec) -> Counter:
    """All contiguous n-grams for n in ``[spec.n_min, spec.n_max]``, with multiplicity.

    Character grams run over the whole string, spaces included; word grams run
    over the token list and are joined with a single space.
    """
    grams: Counter = Counter()
    if spec.analyzer == "char":
        text = source if isinstance(source, str) else " ".join(source)
        for n in range(spec.n_min, spec.n_max + 1):
            grams.update(text[i:i + n] for i in range(len(text) - n + 1))
    else:
        tokens = tokenize(source) if isinstance(source, str) else list(source)
        for n in range(spec.n_min, spec.n_max + 1):
            grams.update(" ".join(tokens[i:i + n]) for i in range(len(tokens) - n + 1))
    return grams


def analyze(title: str, spec: NgramSpec, stopwords: Iterable[str] = DEFAULT_STOPWORDS) -> Counter:
    """Raw title to n-gram counts.

    Both analyzers see the same lexical material: the stopword-filtered,
    stemmed tokens. The char path re-joins them with single spaces first.
    """
    tokens = filter_and_stem(tokenize(normalize_text(title)), stopwords)
    if spec.analyzer == "char":
        return extract_ngrams(" ".join(tokens), spec)
    return extract_ngrams(tokens, spec)
