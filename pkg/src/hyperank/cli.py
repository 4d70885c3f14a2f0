"""Pipeline driver: every stage is a subcommand writing inspectable
file artifacts, with all randomness behind --seed.

Exit codes: 0 success, 1 usage error, 2 data/validation error.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import analysis, baselines, corpus, embeddings, evaluation, negsampler, ranker, trainer
from .errors import DataValidationError
from .taxonomy import default_hierarchy_path, load_taxonomy


class _Parser(argparse.ArgumentParser):
    # argparse defaults to exit code 2 on usage errors; the contract
    # reserves 2 for data errors, so remap to 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _tax(args):
    return load_taxonomy(args.hierarchy if args.hierarchy else default_hierarchy_path())


def _figure_path(delimited_path) -> Path:
    return Path(delimited_path).with_suffix(".png")


def _original_terms(records) -> list[str]:
    return list(dict.fromkeys(r.term for r in records if r.source == "original"))


def _distinct_origins(records) -> list:
    by_origin = {}
    for record in records:
        by_origin.setdefault(record.origin_id, record)
    return list(by_origin.values())


def cmd_augment(args) -> None:
    records = corpus.load_term_file(args.terms)
    n_original = len(records)

    entries: list[corpus.AcronymEntry] = []
    seen_acronyms: set[str] = set()
    for doc_path in args.acronym_docs or []:
        text = Path(doc_path).read_text(encoding="utf-8")
        for entry in corpus.detect_acronyms(text):
            if entry.acronym not in seen_acronyms:
                seen_acronyms.add(entry.acronym)
                entries.append(entry)
    if entries:
        words = corpus.load_word_list(args.word_list) if args.word_list else set()
        entries = corpus.filter_acronyms(entries, words)
        records = corpus.expand_acronyms(records, entries)

    if args.dbpedia_cache:
        docs, errors = corpus.fetch_dbpedia(
            _original_terms(records), args.dbpedia_endpoint, args.dbpedia_cache
        )
        records = corpus.match_dbpedia(records, docs)
        if errors:
            print(f"dbpedia lookups without usable response: {len(errors)}", file=sys.stderr)

    if args.investopedia:
        records = corpus.merge_glossaries(
            records, corpus.load_glossary_csv(args.investopedia), "investopedia"
        )
    if args.fibo:
        records = corpus.merge_glossaries(records, corpus.load_glossary_csv(args.fibo), "fibo")
    if args.external:
        records = corpus.add_external_terms(records, corpus.load_external_csv(args.external))

    corpus.write_records(records, args.out)
    report = corpus.augmentation_report(records)
    report_path = Path(args.report) if args.report else Path(str(args.out) + ".report.csv")
    with report_path.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write("source,count\n")
        for source in corpus.SOURCES:
            handle.write(f"{source},{report[source]}\n")
    if not args.no_figure:
        from . import plots

        plots.save_augment_figure(report, _figure_path(report_path))
    print(
        f"wrote {len(records)} records ({n_original} original terms) to {args.out}; "
        f"report at {report_path}"
    )


def cmd_fetch_dbpedia(args) -> None:
    records = corpus.load_term_file(args.terms)
    terms = _original_terms(records)
    docs, errors = corpus.fetch_dbpedia(terms, args.endpoint, args.cache)
    total_docs = sum(len(v) for v in docs.values())
    print(f"{len(terms)} terms: {total_docs} docs cached at {args.cache}, {len(errors)} errors")
    for term in sorted(errors):
        print(f"  {term}: {errors[term]}", file=sys.stderr)


def cmd_split(args) -> None:
    records = corpus.read_records(args.records)
    dev, val = corpus.split_dataset(records, args.fraction, args.seed)
    corpus.write_records(dev, args.dev)
    corpus.write_records(val, args.val)
    n_dev = len({r.origin_id for r in dev})
    n_val = len({r.origin_id for r in val})
    print(f"split {n_dev + n_val} terms into {n_dev} dev / {n_val} val")


def cmd_negsample(args) -> None:
    records = corpus.read_records(args.records)
    tax = _tax(args)
    pairs = negsampler.generate_pairs(
        records, tax, k=args.k, n_neg=args.neg_per_term, seed=args.seed
    )
    n_zero = sum(1 for p in pairs if p.score == 0.0)
    if args.zero_keep_ratio is not None:
        keep = int(math.floor(args.zero_keep_ratio * n_zero + 0.5))
    else:
        keep = args.zero_keep
    pairs = negsampler.subsample_zeros(pairs, keep, seed=args.seed)
    negsampler.write_pairs(pairs, args.out)
    kept_zero = sum(1 for p in pairs if p.score == 0.0)
    print(
        f"wrote {len(pairs)} pairs to {args.out} "
        f"({kept_zero} of {n_zero} zero-score pairs kept)"
    )


def cmd_embed(args) -> None:
    if args.from_table:
        table = embeddings.load_embeddings(args.from_table)
        embeddings.save_embeddings(table, args.out)
        print(f"rewrote {len(table)} vectors (dim {table.dim}) to {args.out}")
        return
    texts: list[str] = []
    for records_path in args.records or []:
        for record in corpus.read_records(records_path):
            texts.append(record.text)
            texts.append(record.term)
    for pairs_path in args.pairs or []:
        for pair in negsampler.read_pairs(pairs_path):
            texts.append(pair.text_a)
            texts.append(pair.text_b)
    if args.with_hierarchy:
        tax = _tax(args)
        for label in tax.labels():
            texts.append(label)
            texts.append(tax.definition_of(label))
    for texts_path in args.texts or []:
        for line in Path(texts_path).read_text(encoding="utf-8").splitlines():
            if line.strip():
                texts.append(line)
    if not texts:
        raise DataValidationError("no input texts: pass --records/--pairs/--texts/--with-hierarchy")
    table = embeddings.hash_table(texts, args.dim, args.seed)
    embeddings.save_embeddings(table, args.out)
    print(f"hash-embedded {len(table)} texts (dim {args.dim}) to {args.out}")


def cmd_train(args) -> None:
    pairs = negsampler.read_pairs(args.pairs)
    table = embeddings.load_embeddings(args.embeddings)
    cfg = trainer.TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        margin=args.margin,
        mnr_scale=args.mnr_scale,
        positive_threshold=args.positive_threshold,
        seed=args.seed,
        dim_out=args.dim_out,
        objective=args.objective,
    )
    model, report = trainer.train(pairs, table, cfg)
    trainer.save_model(model, args.out)
    report_path = Path(args.loss_report) if args.loss_report else Path(args.out).with_suffix(".losses.csv")
    trainer.write_loss_report(report, report_path)
    if not args.no_figure:
        from . import plots

        plots.save_loss_figure(report, _figure_path(report_path))
    final = report[-1][2] if report else float("nan")
    print(
        f"trained {cfg.epochs} epochs on {len(pairs)} pairs; "
        f"final combined loss {final:.6f}; model at {args.out}"
    )


def cmd_rank(args) -> None:
    records = corpus.read_records(args.records)
    table = embeddings.load_embeddings(args.embeddings)
    tax = _tax(args)
    if args.model:
        model = trainer.load_model(args.model)
    else:
        model = trainer.init_model(table.dim)  # identity: raw cosine ranking
    scored = ranker.score(model, table, records, tax)
    matrix = ranker.rollup_mean(scored)
    if args.sims:
        ranker.write_similarity(matrix, args.sims)
    ranked = ranker.rank(matrix)
    ranker.write_ranked(ranked, args.out)
    print(f"ranked {len(ranked)} terms over {len(tax.labels())} labels to {args.out}")


def cmd_ensemble(args) -> None:
    matrices = [ranker.read_similarity(path) for path in args.sims]
    matrix = ranker.ensemble_mean(matrices)
    ranker.write_similarity(matrix, args.out)
    if args.ranked:
        ranker.write_ranked(ranker.rank(matrix), args.ranked)
    print(f"ensembled {len(matrices)} matrices over {len(matrix)} terms to {args.out}")


def cmd_evaluate(args) -> None:
    ranked = ranker.read_ranked(args.ranked)
    gold_records = corpus.read_records(args.gold)
    gold: dict[str, str] = {}
    for record in gold_records:
        if record.label is not None:
            gold[record.origin_id] = record.label
    tax = _tax(args)
    report = evaluation.evaluate(ranked, gold, cutoff=args.cutoff, tax=tax)
    evaluation.write_report(report, args.out)
    per_label_path = (
        Path(args.per_label) if args.per_label else Path(str(args.out) + ".per_label.csv")
    )
    evaluation.write_per_label_csv(report.per_label, per_label_path)
    if not args.no_figure:
        from . import plots

        plots.save_eval_figure(report, _figure_path(per_label_path))
    print(f"accuracy {report.accuracy:.4f} mean_rank {report.mean_rank:.4f} n {report.n}")


def cmd_baseline(args) -> None:
    records = corpus.read_records(args.records)
    table = embeddings.load_embeddings(args.embeddings)
    tax = _tax(args)
    origins = _distinct_origins(records)
    label_vectors = {label: embeddings.text_vector(table, label) for label in tax.labels()}

    if args.baseline == "distance":
        term_vectors = {r.origin_id: embeddings.text_vector(table, r.term) for r in origins}
        term_texts = {r.origin_id: r.term for r in origins}
        ranked = baselines.distance_rank(term_vectors, term_texts, label_vectors)
    else:
        train_records = corpus.read_records(args.train)
        train_origins = [r for r in _distinct_origins(train_records) if r.label is not None]
        if not train_origins:
            raise DataValidationError(f"{args.train}: no labeled records to train on")
        X = [embeddings.text_vector(table, r.term) for r in train_origins]
        y = [r.label for r in train_origins]
        model = baselines.train_logreg(
            X, y, lr=args.lr, epochs=args.epochs, l2=args.l2, seed=args.seed,
            labels=tax.labels(),
        )
        if args.model_out:
            baselines.save_logreg(model, args.model_out)
        ranked = [
            baselines.logreg_rank(
                model, embeddings.text_vector(table, r.term), r.origin_id, r.term
            )
            for r in sorted(origins, key=lambda r: r.origin_id)
        ]
    ranker.write_ranked(ranked, args.out)
    print(f"baseline {args.baseline}: ranked {len(ranked)} terms to {args.out}")


def cmd_pca(args) -> None:
    table = embeddings.load_embeddings(args.embeddings)
    tax = _tax(args)
    labels = tax.labels()
    texts = [label if args.use_names else tax.definition_of(label) for label in labels]
    vectors = [embeddings.text_vector(table, text) for text in texts]
    coordinates, ratios = analysis.pca_project(
        vectors, n_components=args.components, method=args.method
    )
    analysis.write_pca_csv(labels, coordinates, ratios, args.out)
    if not args.no_figure:
        from . import plots

        plots.save_pca_figure(labels, coordinates, ratios, _figure_path(args.out))
    shown = ", ".join(f"{r:.4f}" for r in ratios)
    print(f"explained variance ratios: {shown}; coordinates at {args.out}")


def build_parser() -> _Parser:
    parser = _Parser(prog="hyperank", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_hierarchy(p):
        p.add_argument("--hierarchy", help="label hierarchy JSON (default: packaged FIBO-17)")

    p = sub.add_parser("augment", help="ingest a term file and run all augmentation steps")
    p.add_argument("--terms", required=True, help="CSV with header term,label")
    p.add_argument("--out", required=True, help="output records JSONL")
    p.add_argument("--report", help="source-count report CSV (default <out>.report.csv)")
    p.add_argument("--acronym-docs", nargs="*", help="plain-text documents to mine for acronyms")
    p.add_argument("--word-list", help="English word list (one per line) for acronym filtering")
    p.add_argument("--dbpedia-cache", help="lookup cache JSONL (enables the DBpedia step)")
    p.add_argument("--dbpedia-endpoint", help="lookup endpoint URL (default: cache-only)")
    p.add_argument("--investopedia", help="glossary CSV term,definition")
    p.add_argument("--fibo", help="glossary CSV term,definition")
    p.add_argument("--external", help="external terms CSV term,label")
    p.add_argument("--no-figure", action="store_true")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("fetch-dbpedia", help="prefetch knowledge-base lookups into a cache")
    p.add_argument("--terms", required=True, help="CSV with header term,label")
    p.add_argument("--cache", required=True, help="cache JSONL path")
    p.add_argument("--endpoint", help="lookup endpoint URL (omit to verify cache coverage)")
    p.set_defaults(func=cmd_fetch_dbpedia)

    p = sub.add_parser("split", help="split records into dev/val by origin term")
    p.add_argument("--records", required=True)
    p.add_argument("--dev", required=True)
    p.add_argument("--val", required=True)
    p.add_argument("--fraction", type=float, default=0.8, help="dev fraction (default 0.8)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("negsample", help="generate graded training pairs")
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True, help="output pairs TSV")
    add_hierarchy(p)
    p.add_argument("--k", type=float, default=0.4, help="graded score unit (default 0.4)")
    p.add_argument("--neg-per-term", type=int, default=10)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--zero-keep", type=int, default=550,
                       help="zero-score pairs to keep (default 550)")
    group.add_argument("--zero-keep-ratio", type=float,
                       help="keep this fraction of zero-score pairs instead")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_negsample)

    p = sub.add_parser("embed", help="build a base-embedding table")
    p.add_argument("--out", required=True)
    p.add_argument("--from-table", help="validate and rewrite an existing table instead of hashing")
    p.add_argument("--records", nargs="*", help="records JSONL files to cover")
    p.add_argument("--pairs", nargs="*", help="pairs TSV files to cover")
    p.add_argument("--texts", nargs="*", help="plain files, one text per line")
    p.add_argument("--with-hierarchy", action="store_true",
                   help="also embed label names and definitions")
    add_hierarchy(p)
    p.add_argument("--dim", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("train", help="train the projection head")
    p.add_argument("--pairs", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--out", required=True, help="output model JSON")
    p.add_argument("--loss-report", help="loss CSV (default <out>.losses.csv)")
    p.add_argument("--epochs", type=int, default=25)
    p.add_argument("--batch-size", type=int, default=20)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--margin", type=float, default=0.5)
    p.add_argument("--mnr-scale", type=float, default=20.0)
    p.add_argument("--positive-threshold", type=float, default=0.5)
    p.add_argument("--objective", choices=trainer.OBJECTIVES, default="multi")
    p.add_argument("--dim-out", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-figure", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("rank", help="rank labels per term")
    p.add_argument("--records", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--model", help="projection model JSON (default: identity model)")
    add_hierarchy(p)
    p.add_argument("--sims", help="also write the similarity matrix JSON here")
    p.add_argument("--out", required=True, help="output ranked CSV")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("ensemble", help="average similarity matrices")
    p.add_argument("--sims", nargs="+", required=True)
    p.add_argument("--out", required=True, help="output matrix JSON")
    p.add_argument("--ranked", help="also write the ensembled ranking CSV here")
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("evaluate", help="score a ranking against gold labels")
    p.add_argument("--ranked", required=True)
    p.add_argument("--gold", required=True, help="records JSONL carrying gold labels")
    add_hierarchy(p)
    p.add_argument("--cutoff", type=int, default=3)
    p.add_argument("--out", required=True, help="output report JSON")
    p.add_argument("--per-label", help="per-label CSV (default <out>.per_label.csv)")
    p.add_argument("--no-figure", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("baseline", help="run an organizer baseline")
    p.add_argument("baseline", choices=["distance", "logreg"])
    p.add_argument("--records", required=True, help="records to rank")
    p.add_argument("--embeddings", required=True)
    add_hierarchy(p)
    p.add_argument("--out", required=True, help="output ranked CSV")
    p.add_argument("--train", help="training records JSONL (logreg only)")
    p.add_argument("--model-out", help="save the logreg model JSON here")
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("pca", help="project label embeddings to 2-D")
    p.add_argument("--embeddings", required=True)
    add_hierarchy(p)
    p.add_argument("--out", required=True, help="output coordinates CSV")
    p.add_argument("--components", type=int, default=2)
    p.add_argument("--method", choices=["auto", "eigh", "power"], default="auto")
    p.add_argument("--use-names", action="store_true",
                   help="embed label names instead of definitions")
    p.add_argument("--no-figure", action="store_true")
    p.set_defaults(func=cmd_pca)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "baseline" and args.baseline == "logreg" and not args.train:
        parser.error("baseline logreg requires --train")
    try:
        args.func(args)
    except DataValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
