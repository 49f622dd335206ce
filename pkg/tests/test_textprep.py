from collections import Counter

import pytest
from hypothesis import given, strategies as st

from hackmarket.textprep import (
    STANDARD_SPECS, NgramSpec, analyze, extract_ngrams, filter_and_stem, load_stopwords, normalize_text, tokenize,
)


@pytest.mark.parametrize("raw, expected", [
    ("  FreSh CVV,  Dumps!! ", "fresh cvv dumps"),
    ("PayPal→$$$", "paypal"),
    ("", ""),
    ("!!!", ""),
    ("Ｆｕｌｌｚ　ＣＶＶ", "fullz cvv"),   # fullwidth forms fold under NFKC
    ("Взлом ПОЧТЫ", "взлом почты"),
    ("snake_case-title", "snake case title"),
])
def test_normalize_text(raw, expected):
    assert normalize_text(raw) == expected


@given(st.text())
def test_normalize_is_idempotent(raw):
    once = normalize_text(raw)
    assert normalize_text(once) == once
    assert once == once.strip()
    assert "  " not in once


@pytest.mark.parametrize("text, tokens", [
    ("fresh cvv dumps", ["fresh", "cvv", "dumps"]),
    ("paypal", ["paypal"]),
    ("", []),
])
def test_tokenize(text, tokens):
    assert tokenize(text) == tokens


def test_filter_and_stem():
    # Frozen from the Porter stemmer (original algorithm).
    assert filter_and_stem(["the", "hacking", "tools"], {"the"}) == ["hack", "tool"]
    assert filter_and_stem(["carding", "keyloggers", "phishing", "cracked"], set()) == ["card", "keylogg", "phish", "crack"]
    assert filter_and_stem([], {"the"}) == []
    assert filter_and_stem(["the", "a"], {"the", "a"}) == []


def test_default_stopwords_dropped():
    assert filter_and_stem(["the", "best", "of", "tools"]) == ["best", "tool"]


def test_char_ngrams_by_enumeration():
    grams = extract_ngrams("paypal", NgramSpec("char", 3, 4))
    assert grams == Counter(["pay", "ayp", "ypa", "pal", "payp", "aypa", "ypal"])


def test_word_ngrams():
    grams = extract_ngrams(["fresh", "cvv", "dump"], NgramSpec("word", 1, 2))
    assert grams == Counter(["fresh", "cvv", "dump", "fresh cvv", "cvv dump"])


def test_short_string_yields_nothing():
    assert extract_ngrams("ab", NgramSpec("char", 3, 6)) == Counter()


def test_char_grams_span_spaces():
    grams = extract_ngrams("ab cd", NgramSpec("char", 3, 3))
    assert grams == Counter(["ab ", "b c", " cd"])


def test_ngram_multiplicity():
    assert extract_ngrams("aaaa", NgramSpec("char", 3, 3)) == Counter({"aaa": 2})


@given(st.text(alphabet="abc ", max_size=30), st.integers(1, 4), st.integers(0, 3))
def test_char_gram_counts(text, lo, extra):
    spec = NgramSpec("char", lo, lo + extra)
    grams = extract_ngrams(text, spec)
    for n in range(spec.n_min, spec.n_max + 1):
        assert sum(c for g, c in grams.items() if len(g) == n) == max(0, len(text) - n + 1)


@given(st.lists(st.sampled_from(["a", "b", "c", "d"]), max_size=8))
def test_word_ngrams_order_independent_of_traversal(tokens):
    spec = NgramSpec("word", 1, 3)
    forward = extract_ngrams(tokens, spec)
    manual = Counter()
    for n in (3, 2, 1):
        for i in reversed(range(len(tokens) - n + 1)):
            manual[" ".join(tokens[i:i + n])] += 1
    assert forward == manual


def test_analyze_char_path_uses_stemmed_tokens():
    grams = analyze("The Hacking Tools", NgramSpec("char", 4, 4))
    assert grams == extract_ngrams("hack tool", NgramSpec("char", 4, 4))


def test_spec_parsing_and_standard_grid():
    assert NgramSpec.parse("char:3-6") == NgramSpec("char", 3, 6)
    assert NgramSpec.parse("word:1") == NgramSpec("word", 1, 1)
    assert NgramSpec.parse("char(4,7)") == NgramSpec("char", 4, 7)
    assert [str(s) for s in STANDARD_SPECS] == [
        "word(1,1)", "word(1,2)", "char(3,4)", "char(3,5)", "char(3,6)",
        "char(3,7)", "char(4,4)", "char(4,5)", "char(4,6)", "char(4,7)",
    ]
    with pytest.raises(ValueError):
        NgramSpec("char", 4, 3)
    with pytest.raises(ValueError):
        NgramSpec("byte", 1, 1)
    with pytest.raises(ValueError):
        NgramSpec.parse("char")


def test_load_stopwords(tmp_path):
    path = tmp_path / "stop.txt"
    path.write_text("# custom\nShop\n\nfresh\n")
    assert load_stopwords(path) == {"shop", "fresh"}
