"""Command-line front end: ``hackmarket <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .clustering import DEFAULT_OUTLIER_THRESHOLD, KMeansConfig
from .corpus import (corpus_summary, deduplicate, ingest_products, product_vendor_distribution,
                     unique_fraction, vendor_market_distribution, write_histogram_csv, write_jsonl)
from .errors import PipelineError
from .evaluation import write_facet_csv, write_facet_json
from .pipeline import (DEFAULT_HOLDOUT_FRAC, DEFAULT_RANDOM_SPEC, LabeledData, cluster_products, featurize,
                       read_assignments, read_seed_file, run_grid, run_report, write_assignments,
                       write_outliers)
from .evaluation import holdout_evaluate
from .synthgen import SynthConfig, generate_corpus, labeled_sample, write_corpus
from .textprep import DEFAULT_STOPWORDS, STANDARD_SPECS, NgramSpec, load_stopwords
from .vectorizer import TfIdfModel, fit_vocabulary

log = logging.getLogger("hackmarket")


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _stopwords(args):
    return load_stopwords(args.stopwords_file) if getattr(args, "stopwords_file", None) else DEFAULT_STOPWORDS


def _load(args):
    rep = ingest_products(args.input, args.format, strict=args.strict)
    for err in rep.skipped:
        print(f"skipped: {err}", file=sys.stderr)
    products = deduplicate(rep.records, raw_titles=getattr(args, "raw_titles", False))
    return rep, products


def _write_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")


def cmd_ingest(args) -> None:
    rep = ingest_products(args.input, args.format, strict=args.strict)
    out = _out_dir(args)
    write_jsonl(rep.records, out / "listings.jsonl")
    with open(out / "skipped.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["line", "error"])
        for err in rep.skipped:
            writer.writerow([err.line, str(err)])
    print(f"{len(rep.records)} records, {len(rep.skipped)} skipped")


def cmd_dedup(args) -> None:
    rep, products = _load(args)
    out = _out_dir(args)
    with open(out / "products.jsonl", "w", encoding="utf-8") as fh:
        for p in products:
            fh.write(json.dumps(p.to_json(), ensure_ascii=False) + "\n")
    print(f"{len(rep.records)} listings -> {len(products)} distinct products")


def cmd_stats(args) -> None:
    rep, products = _load(args)
    out = _out_dir(args)
    summary = corpus_summary(rep.records, products)
    vm = vendor_market_distribution(rep.records)
    pv = product_vendor_distribution(products)
    if args.output_format == "json":
        _write_json({
            "summary": asdict(summary),
            "distinct_fraction": summary.distinct_fraction,
            "single_vendor_fraction": unique_fraction(pv),
            "vendor_markets": {str(k): v for k, v in vm.items()},
            "product_vendors": {str(k): v for k, v in pv.items()},
        }, out / "stats.json")
    else:
        with open(out / "summary.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["Marketplaces", "Products (Total)", "Products (Distinct)", "Vendors"])
            writer.writerow([summary.n_markets, summary.n_listings_total, summary.n_products_distinct, summary.n_vendors])
        write_histogram_csv(vm, out / "vendor_markets.csv")
        write_histogram_csv(pv, out / "product_vendors.csv")
    print(f"markets={summary.n_markets} listings={summary.n_listings_total} "
          f"distinct={summary.n_products_distinct} vendors={summary.n_vendors}")


def cmd_vectorize(args) -> None:
    _, products = _load(args)
    model = fit_vocabulary([p.title for p in products], NgramSpec.parse(args.spec), _stopwords(args), args.min_df)
    out = _out_dir(args)
    model.save(out / "model.json")
    print(f"{model.dim} features over {model.n_docs} products")


def _kmeans_config(args, k: int) -> KMeansConfig:
    return KMeansConfig(k=k, distance=args.distance, init=args.init, max_iter=args.max_iter, tol=args.tol,
                        rng_seed=args.rng_seed, frozen_centroids=args.frozen_centroids)


def cmd_cluster(args) -> None:
    _, products = _load(args)
    if args.model:
        model = TfIdfModel.load(args.model)
    else:
        model = fit_vocabulary([p.title for p in products], NgramSpec.parse(args.spec), _stopwords(args))
    seeds = read_seed_file(args.seeds_file) if args.seeds_file else []
    if args.init == "seeded":
        if not seeds:
            raise PipelineError("--init seeded requires --seeds-file")
        k = len({lab for _, lab in seeds})
        if args.k is not None and args.k != k:
            raise PipelineError(f"--k {args.k} disagrees with the {k} labels in the seeds file")
    else:
        k = args.k if args.k is not None else 34
    threshold = None if args.outlier_threshold < 0 else args.outlier_threshold
    result = cluster_products(products, model, _kmeans_config(args, k), seeds, threshold)
    out = _out_dir(args)
    if not args.model:
        model.save(out / "model.json")
    result.centroids.save(out / "centroids.json")
    write_assignments(result, out / "assignments.csv")
    write_outliers(result, out / "outliers.csv")
    n = len(products)
    print(f"{len(result.kept)} products clustered, {len(result.outliers)} outliers "
          f"({100.0 * len(result.outliers) / n:.2f}%), iterations={result.result.n_iterations} "
          f"converged={result.result.converged}")


def cmd_evaluate(args) -> None:
    _, products = _load(args)
    data = LabeledData.build([p.title for p in products], read_seed_file(args.seeds_file),
                             args.holdout_frac, args.rng_seed)
    feats = featurize(data, NgramSpec.parse(args.spec), _stopwords(args))
    rep = holdout_evaluate(feats.train, feats.holdout, feats.holdout_truth,
                           _kmeans_config(args, len(data.labels)), feats.seeds)
    out = _out_dir(args)
    if args.output_format == "json":
        _write_json(rep.to_json(), out / "evaluation.json")
    else:
        with open(out / "evaluation.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["rand_index", "total_entropy_bits", "n_points"])
            writer.writerow([repr(rep.rand_index), repr(rep.total_entropy_bits), rep.n_points])
    print(f"rand_index={rep.rand_index:.6f} entropy={rep.total_entropy_bits:.6f} n={rep.n_points}")


def cmd_grid(args) -> None:
    _, products = _load(args)
    data = LabeledData.build([p.title for p in products], read_seed_file(args.seeds_file),
                             args.holdout_frac, args.rng_seed)
    specs = [NgramSpec.parse(s) for s in args.spec] if args.spec else list(STANDARD_SPECS)
    grid = run_grid(data, specs, args.distance or ("cosine", "euclidean"), n_random_seeds=args.random_runs,
                    rng_seed=args.rng_seed, random_spec=NgramSpec.parse(args.random_spec),
                    frozen_centroids=args.frozen_centroids, max_iter=args.max_iter, tol=args.tol,
                    stopwords=_stopwords(args))
    out = _out_dir(args)
    if args.output_format == "json":
        _write_json(grid.to_json(), out / "grid.json")
    else:
        grid.write_table_csv(out / "grid_table.csv")
        grid.write_cells_csv(out / "grid_cells.csv")
    for metric in ("Rand-index", "Entropy"):
        print(metric)
        for row in grid.panel(metric):
            print("  " + row[0].ljust(10) + " ".join(f"{v:.3f}" for v in row[1:]))


def cmd_report(args) -> None:
    rep, products = _load(args)
    rows = run_report(rep.records, products, read_assignments(args.assignments))
    out = _out_dir(args)
    if args.output_format == "json":
        write_facet_json(rows, out / "cluster_entropy.json")
    else:
        write_facet_csv(rows, out / "cluster_entropy.csv", normalized=args.entropy == "normalized")
    write_histogram_csv(vendor_market_distribution(rep.records), out / "vendor_markets.csv")
    write_histogram_csv(product_vendor_distribution(products), out / "product_vendors.csv")
    print(f"{len(rows)} clusters reported")


def cmd_synth(args) -> None:
    cfg = SynthConfig(
        n_categories=args.n_categories, keywords_per_category=args.keywords_per_category,
        titles_per_category=args.titles_per_category, n_vendors=args.n_vendors, n_markets=args.n_markets,
        cross_list_rate=args.cross_list_rate, keyword_overlap_rate=args.keyword_overlap_rate,
        noise_token_rate=args.noise_token_rate, rng_seed=args.rng_seed,
        single_market_categories=tuple(args.single_market or ()),
        single_vendor_categories=tuple(args.single_vendor or ()),
        title_words=tuple(args.title_words),
    )
    corpus = generate_corpus(cfg)
    labeled = labeled_sample(corpus, args.n_labeled, args.rng_seed) if args.n_labeled else ()
    write_corpus(corpus, args.out_dir, labeled)
    print(f"{len(corpus.records)} listings, {len(corpus.truth)} distinct products, {len(labeled)} labeled")


def _add_input(p) -> None:
    p.add_argument("--input", required=True, help="listing file (JSONL or CSV)")
    p.add_argument("--format", choices=("jsonl", "csv"), help="input format (default: from extension)")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--strict", dest="strict", action="store_true", default=True,
                      help="abort on the first bad record (default)")
    mode.add_argument("--lenient", dest="strict", action="store_false", help="skip bad records and report them")
    p.add_argument("--raw-titles", action="store_true", help="dedup on raw titles instead of normalized ones")


def _add_output(p, formats: bool = True) -> None:
    p.add_argument("--out-dir", required=True)
    if formats:
        p.add_argument("--output-format", choices=("csv", "json"), default="csv")


def _add_kmeans(p, seeded_default: bool = True) -> None:
    p.add_argument("--distance", choices=("cosine", "euclidean"), default="cosine")
    p.add_argument("--init", choices=("seeded", "random"), default="seeded")
    p.add_argument("--k", type=int, default=None, help="cluster count (seeded: must match the label count)")
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--frozen-centroids", action="store_true", help="assign to seed centroids without iterating")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hackmarket", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and normalize a listing file")
    _add_input(p)
    _add_output(p, formats=False)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("dedup", help="collapse cross-posted listings into distinct products")
    _add_input(p)
    _add_output(p, formats=False)
    p.set_defaults(func=cmd_dedup)

    p = sub.add_parser("stats", help="corpus counts and vendor/market histograms")
    _add_input(p)
    _add_output(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("vectorize", help="fit a TF-IDF model on distinct product titles")
    _add_input(p)
    _add_output(p, formats=False)
    p.add_argument("--spec", default="char:3-6", help="n-gram spec, e.g. char:3-6 or word:1-2")
    p.add_argument("--min-df", type=int, default=1)
    p.add_argument("--stopwords-file")
    p.set_defaults(func=cmd_vectorize)

    p = sub.add_parser("cluster", help="cluster distinct products and drop outliers")
    _add_input(p)
    _add_output(p, formats=False)
    _add_kmeans(p)
    p.add_argument("--model", help="model.json from vectorize (default: fit with --spec)")
    p.add_argument("--spec", default="char:3-6")
    p.add_argument("--seeds-file", help="CSV with title,label columns")
    p.add_argument("--outlier-threshold", type=float, default=DEFAULT_OUTLIER_THRESHOLD,
                   help="drop products whose best cosine similarity is below this (negative disables)")
    p.add_argument("--stopwords-file")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("evaluate", help="holdout Rand index and entropy for one configuration")
    _add_input(p)
    _add_output(p)
    _add_kmeans(p)
    p.add_argument("--spec", default="char:3-6")
    p.add_argument("--seeds-file", required=True)
    p.add_argument("--holdout-frac", type=float, default=DEFAULT_HOLDOUT_FRAC)
    p.add_argument("--stopwords-file")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("grid", help="feature spec x distance x init evaluation table")
    _add_input(p)
    _add_output(p)
    p.add_argument("--seeds-file", required=True)
    p.add_argument("--spec", action="append", help="restrict to these specs (repeatable)")
    p.add_argument("--distance", action="append", choices=("cosine", "euclidean"))
    p.add_argument("--random-spec", default=str(DEFAULT_RANDOM_SPEC), help="features for the Random column")
    p.add_argument("--random-runs", type=int, default=10)
    p.add_argument("--holdout-frac", type=float, default=DEFAULT_HOLDOUT_FRAC)
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--frozen-centroids", action="store_true")
    p.add_argument("--stopwords-file")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("report", help="per-cluster market/vendor entropy table and histograms")
    _add_input(p)
    _add_output(p)
    p.add_argument("--assignments", required=True, help="assignments.csv from cluster")
    p.add_argument("--entropy", choices=("normalized", "raw"), default="normalized")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("synth", help="write a labeled synthetic corpus")
    _add_output(p, formats=False)
    d = SynthConfig()
    p.add_argument("--n-categories", type=int, default=d.n_categories)
    p.add_argument("--keywords-per-category", type=int, default=d.keywords_per_category)
    p.add_argument("--titles-per-category", type=int, default=d.titles_per_category)
    p.add_argument("--n-vendors", type=int, default=d.n_vendors)
    p.add_argument("--n-markets", type=int, default=d.n_markets)
    p.add_argument("--cross-list-rate", type=float, default=d.cross_list_rate)
    p.add_argument("--keyword-overlap-rate", type=float, default=d.keyword_overlap_rate)
    p.add_argument("--noise-token-rate", type=float, default=d.noise_token_rate)
    p.add_argument("--title-words", type=int, nargs=2, default=d.title_words, metavar=("MIN", "MAX"),
                   help="keywords per title, inclusive range")
    p.add_argument("--n-labeled", type=int, default=500, help="size of the labeled seed sample (0 for none)")
    p.add_argument("--single-market", action="append", metavar="CATEGORY")
    p.add_argument("--single-vendor", action="append", metavar="CATEGORY")
    p.add_argument("--rng-seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (PipelineError, OSError, ValueError, KeyError) as exc:
        print(json.dumps({"error": type(exc).__name__, "command": args.command, "message": str(exc)}),
              file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
