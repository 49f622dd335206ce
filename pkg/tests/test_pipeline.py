import csv

import pytest

from hackmarket.clustering import KMeansConfig
from hackmarket.corpus import deduplicate
from hackmarket.errors import PipelineError
from hackmarket.evaluation import FACET_COLUMNS, write_facet_csv
from hackmarket.pipeline import (
    LabeledData, cluster_products, read_assignments, read_seed_file, run_grid, run_report, split_holdout,
    write_assignments,
)
from hackmarket.synthgen import SynthConfig, generate_corpus, labeled_sample
from hackmarket.textprep import NgramSpec
from hackmarket.vectorizer import fit_vocabulary


@pytest.fixture(scope="module")
def small():
    corpus = generate_corpus(SynthConfig(n_categories=6, titles_per_category=25, keyword_overlap_rate=0.1,
                                         rng_seed=21))
    products = deduplicate(corpus.records)
    labeled = labeled_sample(corpus, 60, 0)
    return corpus, products, labeled


def test_split_holdout_sizes():
    pairs = [(f"t{i}", f"L{i % 34}") for i in range(500)]
    seeds, holdout = split_holdout(pairs, 0.2, 0)
    assert len(seeds) == 400 and len(holdout) == 100
    assert {lab for _, lab in seeds} == {f"L{i}" for i in range(34)}
    assert split_holdout(pairs, 0.2, 0) == (seeds, holdout)
    assert sorted(seeds + holdout) == sorted(pairs)


def test_split_keeps_a_seed_per_label():
    pairs = [("a", "solo"), ("b", "x"), ("c", "x")]
    seeds, holdout = split_holdout(pairs, 0.5, 0)
    assert ("a", "solo") in seeds
    with pytest.raises(PipelineError):
        split_holdout(pairs, 1.0)


def test_read_seed_file(tmp_path):
    good = tmp_path / "s.csv"
    good.write_text("title,label\nFresh CVV,Carding\n")
    assert read_seed_file(good) == [("Fresh CVV", "Carding")]
    bad = tmp_path / "b.csv"
    bad.write_text("title,label\nFresh CVV,\n")
    with pytest.raises(PipelineError, match="line 2"):
        read_seed_file(bad)
    wrong = tmp_path / "w.csv"
    wrong.write_text("name,label\nx,y\n")
    with pytest.raises(PipelineError, match="title and label"):
        read_seed_file(wrong)


def test_grid_layout_and_determinism(small):
    _, products, labeled = small
    data = LabeledData.build([p.title for p in products], labeled, 0.2, 0)
    specs = [NgramSpec("word", 1, 1), NgramSpec("char", 3, 4)]
    g1 = run_grid(data, specs, n_random_seeds=3)
    g2 = run_grid(data, specs, n_random_seeds=3)
    assert g1.to_json() == g2.to_json()
    assert g1.columns == ["word(1,1)", "char(3,4)", "Random"]
    for metric in ("Rand-index", "Entropy"):
        panel = g1.panel(metric)
        assert [row[0] for row in panel] == ["Cosine", "Euclidean"]
        assert all(len(row) == 4 for row in panel)
    # Random column falls back to char(3,6), evaluated on top of the listed specs.
    assert g1.cell("char(3,6)", "cosine", "random").n_runs == 3
    with pytest.raises(KeyError):
        g1.cell("char(3,6)", "cosine", "seeded")


def test_full_grid_shape(small):
    _, products, labeled = small
    data = LabeledData.build([p.title for p in products], labeled, 0.2, 0)
    g = run_grid(data, n_random_seeds=1)
    assert len(g.columns) == 11
    assert len(g.cells) == 10 * 2 * 2
    assert all(len(r) == 12 for m in ("Rand-index", "Entropy") for r in g.panel(m))


def test_grid_missing_labels(small):
    data = LabeledData(["a"], [("a", "x")], [("b", "y")])
    with pytest.raises(PipelineError, match="lack labels: y"):
        run_grid(data)


def test_cluster_and_report(small, tmp_path):
    corpus, products, labeled = small
    model = fit_vocabulary([p.title for p in products], NgramSpec("char", 3, 6))
    out = cluster_products(products, model, KMeansConfig(k=6), labeled, 0.1)
    assert len(out.kept) + len(out.outliers) == len(products)
    write_assignments(out, tmp_path / "a.csv")
    assignments = read_assignments(tmp_path / "a.csv")
    assert len(assignments) == sum(len(products[i].listing_ids) for i in out.kept)
    rows = run_report(corpus.records, products, assignments)
    assert sum(r.n_products for r in rows) == len(out.kept)
    assert [r.rank for r in rows] == list(range(1, len(rows) + 1))
    counts = [r.n_products for r in rows]
    assert counts == sorted(counts, reverse=True)
    write_facet_csv(rows, tmp_path / "t.csv")
    with open(tmp_path / "t.csv") as fh:
        assert tuple(next(csv.reader(fh))) == FACET_COLUMNS


def test_random_cluster_filters_after(small):
    _, products, _ = small
    model = fit_vocabulary([p.title for p in products], NgramSpec("char", 3, 6))
    out = cluster_products(products, model, KMeansConfig(k=6, init="random", rng_seed=1), (), 0.1)
    assert len(out.result.assignment) == len(out.kept)
    with pytest.raises(PipelineError, match="seeds"):
        cluster_products(products, model, KMeansConfig(k=6), (), 0.1)


def test_empty_report(small):
    corpus, products, _ = small
    assert run_report(corpus.records, products, {}) == []
