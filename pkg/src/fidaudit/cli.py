"""Umbrella command-line entry point.

Subcommands: ingest, validate, sample, fidelity, agreement, wmd,
correlate, generate, serve. Exit codes: 0 on success, 1 with a single
"error: <code>: <message>" line on stderr for domain failures, 2 for
usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import baseline, genclient
from .agreement import RELAXED, STRICT, match, micro_average
from .annotation import AnnotationStore, annotation_warnings, check_annotation
from .corpus import (
    Corpus,
    load_corpus,
    load_descriptions,
    load_representations,
    load_schema,
    sample_for_annotation,
    save_corpus,
    descriptions_to_text,
)
from .errors import EmptyInput, FidauditError, ValidationError
from .fidelity import (
    COMPONENT_FIELDS,
    aggregate,
    count_components,
    report_from_payload,
    report_to_payload,
)
from .stats import COMPONENT_ORDER, correlation_table


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0
    try:
        return args.func(args)
    except FidauditError as e:
        print(f"error: {e.code}: {e.message}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: io_error: {e}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fidaudit",
        description="Audit the representation fidelity of algorithmic decision systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="normalize raw inputs into a corpus directory")
    p.add_argument("--schema", required=True, help="schema JSON file")
    p.add_argument("--representations", required=True, help="raw rows or JSONL records")
    p.add_argument("--descriptions", help="self-descriptions JSONL (optional)")
    p.add_argument("--out", required=True, help="corpus directory to write")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("validate", help="check a corpus directory's invariants")
    p.add_argument("corpus", help="corpus directory")
    p.add_argument("--annotations", help="also check annotation files in this directory")
    p.add_argument(
        "--coverage-threshold",
        type=float,
        default=0.9,
        help="warn when annotation coverage falls below this ratio (default 0.9)",
    )
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sample", help="pick documents for annotation")
    p.add_argument("--corpus", required=True)
    p.add_argument("--n", type=int, required=True, help="number of documents")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write doc ids here instead of stdout")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("fidelity", help="count mismatch components and aggregate")
    p.add_argument("--corpus", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--out", required=True, help="report directory to write")
    p.set_defaults(func=cmd_fidelity)

    p = sub.add_parser("agreement", help="inter-annotator span F1")
    p.add_argument("--corpus", required=True, help="corpus directory (for the schema)")
    p.add_argument("--annotations", required=True)
    p.add_argument("--annotators", required=True, help="two annotator ids, comma-separated")
    p.add_argument("--mode", choices=[STRICT, RELAXED, "both"], default="both")
    p.add_argument("--out", help="directory for per-document CSV tables")
    p.set_defaults(func=cmd_agreement)

    p = sub.add_parser("wmd", help="word mover's distance per (x, d) pair")
    p.add_argument("--corpus", required=True)
    p.add_argument(
        "--docs",
        default="all",
        help="'all', a comma-separated id list, or @file with one id per line",
    )
    p.add_argument("--embeddings", required=True, help="GloVe-format text file")
    p.add_argument("--variant", choices=list(baseline.VARIANTS), default=baseline.PLAIN)
    p.add_argument("--dim", type=int, help="expected embedding dimension")
    p.add_argument("--out", required=True, help="distances CSV to write")
    p.set_defaults(func=cmd_wmd)

    p = sub.add_parser("correlate", help="correlate distances with fidelity counts")
    p.add_argument(
        "--distances", required=True, help="comma-separated distance CSV paths"
    )
    p.add_argument("--fidelity", required=True, help="report.json from the fidelity command")
    p.add_argument("--out", required=True, help="correlation table CSV to write")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("generate", help="generate synthetic self-descriptions")
    p.add_argument("--schema", required=True)
    p.add_argument("--representations", help="profiles file (required unless --free)")
    p.add_argument("--profiles", help="comma-separated profile id subset")
    p.add_argument("--models", required=True, help="comma-separated generator ids")
    p.add_argument("--variants", type=int, default=5)
    p.add_argument("--free", action="store_true", help="prompt with feature names only")
    p.add_argument(
        "--no-sampling-params",
        default="",
        help="models that reject temperature/top-p, comma-separated",
    )
    p.add_argument("--max-requests", type=int, help="request budget")
    p.add_argument("--concurrency", type=int, default=4)
    p.add_argument("--mock", action="store_true", help="use the offline mock client")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("serve", help="run the local annotation service")
    p.add_argument("--corpus", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8787)
    p.set_defaults(func=cmd_serve)

    return parser


def cmd_ingest(args) -> int:
    schema = load_schema(args.schema)
    representations = load_representations(args.representations, schema)
    descriptions = load_descriptions(args.descriptions) if args.descriptions else []
    corpus = Corpus(schema, representations, descriptions)
    problems = corpus.problems()
    if problems:
        for problem in problems:
            print(f"problem: {problem}", file=sys.stderr)
        print(f"error: validation_error: {len(problems)} problems found", file=sys.stderr)
        return 1
    save_corpus(corpus, args.out)
    print(
        f"ingested {len(representations)} representations and "
        f"{len(descriptions)} descriptions into {args.out}"
    )
    return 0


def cmd_validate(args) -> int:
    corpus = load_corpus(args.corpus)
    problems = corpus.problems()
    warnings = []
    if args.annotations:
        store = AnnotationStore(args.annotations, corpus.schema)
        registry = store.load_registry()
        for doc_id in store.doc_ids():
            desc = corpus.by_doc.get(doc_id)
            if desc is None:
                problems.append(f"annotations for unknown document {doc_id!r}")
                continue
            for annotator_id in store.annotator_ids(doc_id):
                try:
                    doc = store.load(doc_id, annotator_id)
                    check_annotation(doc, desc.char_count, corpus.schema, registry)
                except FidauditError as e:
                    problems.append(f"{doc_id}/{annotator_id}: {e.message}")
                    continue
                warnings.extend(
                    annotation_warnings(doc, desc.char_count, args.coverage_threshold)
                )
    for problem in problems:
        print(f"problem: {problem}")
    for warning in warnings:
        print(f"warning: {warning}")
    if problems:
        print(f"error: validation_error: {len(problems)} problems found", file=sys.stderr)
        return 1
    print(
        f"ok: {len(corpus.representations)} representations, "
        f"{len(corpus.descriptions)} descriptions, {len(warnings)} warnings"
    )
    return 0


def cmd_sample(args) -> int:
    corpus = load_corpus(args.corpus)
    doc_ids = sample_for_annotation(corpus, args.n, args.seed)
    text = "".join(doc_id + "\n" for doc_id in doc_ids)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {len(doc_ids)} doc ids to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _collect_counts(corpus: Corpus, annotations_dir: str) -> dict:
    store = AnnotationStore(annotations_dir, corpus.schema)
    counts = {}
    for doc_id in store.doc_ids():
        for annotator_id in store.annotator_ids(doc_id):
            doc = store.load(doc_id, annotator_id)
            counts[(doc_id, annotator_id)] = count_components(doc, corpus.schema)
    if not counts:
        raise EmptyInput(f"no annotation files under {annotations_dir}")
    return counts


def cmd_fidelity(args) -> int:
    corpus = load_corpus(args.corpus)
    counts = _collect_counts(corpus, args.annotations)
    report = aggregate(counts, label=Path(args.annotations).name)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    with open(out / "per_document.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["doc_id", *COMPONENT_FIELDS])
        for doc_id in sorted(report.per_document):
            means = report.per_document[doc_id]
            writer.writerow([doc_id, *[repr(v) for v in means.as_tuple()]])

    with open(out / "corpus_summary.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["component", "mean", "std"])
        for name, mean, std in zip(
            COMPONENT_FIELDS, report.corpus_mean.as_tuple(), report.corpus_std.as_tuple()
        ):
            writer.writerow([name, repr(mean), repr(std)])

    with open(out / "report.json", "w", encoding="utf-8") as fh:
        json.dump(report_to_payload(report), fh, ensure_ascii=False, indent=2)
        fh.write("\n")

    print(
        f"fidelity over {len(report.per_document)} documents: "
        f"mean {report.corpus_mean.fidelity:.4f}, std {report.corpus_std.fidelity:.4f}; "
        f"report in {out}"
    )
    return 0


def cmd_agreement(args) -> int:
    corpus = load_corpus(args.corpus)
    annotators = [a.strip() for a in args.annotators.split(",") if a.strip()]
    if len(annotators) != 2:
        raise ValidationError("--annotators needs exactly two comma-separated ids")
    a_id, b_id = annotators
    store = AnnotationStore(args.annotations, corpus.schema)
    doc_ids = [
        doc_id
        for doc_id in store.doc_ids()
        if a_id in store.annotator_ids(doc_id) and b_id in store.annotator_ids(doc_id)
    ]
    if not doc_ids:
        raise EmptyInput(f"no documents annotated by both {a_id!r} and {b_id!r}")
    modes = [STRICT, RELAXED] if args.mode == "both" else [args.mode]
    out_dir = Path(args.out) if args.out else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    for mode in modes:
        results = []
        for doc_id in doc_ids:
            a_doc = store.load(doc_id, a_id)
            b_doc = store.load(doc_id, b_id)
            results.append((doc_id, match(a_doc, b_doc, mode)))
        micro = micro_average([r for _, r in results])
        if out_dir:
            path = out_dir / f"agreement_{mode}.csv"
            with open(path, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(
                    ["doc_id", "tp", "a_total", "b_total", "precision", "recall", "f1"]
                )
                for doc_id, r in results:
                    writer.writerow(
                        [doc_id, r.tp, r.a_total, r.b_total,
                         repr(r.precision), repr(r.recall), repr(r.f1)]
                    )
                writer.writerow(
                    ["MICRO", micro.tp, micro.a_total, micro.b_total,
                     repr(micro.precision), repr(micro.recall), repr(micro.f1)]
                )
        print(
            f"{mode}: micro F1 {micro.f1:.4f} "
            f"(tp {micro.tp}, precision {micro.precision:.4f}, "
            f"recall {micro.recall:.4f}, {len(doc_ids)} documents)"
        )
    return 0


def _resolve_doc_ids(corpus: Corpus, spec: str) -> list[str]:
    if spec == "all":
        return [d.doc_id for d in corpus.descriptions if d.profile_id is not None]
    if spec.startswith("@"):
        lines = Path(spec[1:]).read_text(encoding="utf-8").splitlines()
        return [line.strip() for line in lines if line.strip()]
    return [part.strip() for part in spec.split(",") if part.strip()]


def cmd_wmd(args) -> int:
    corpus = load_corpus(args.corpus)
    table = baseline.load_embeddings(args.embeddings, expected_dim=args.dim)
    doc_ids = _resolve_doc_ids(corpus, args.docs)
    distances = baseline.distance_matrix(corpus, doc_ids, table, variant=args.variant)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["doc_id", "distance", "error"])
        for pd in distances:
            writer.writerow(
                [pd.doc_id, "" if pd.distance is None else repr(pd.distance), pd.error or ""]
            )
    ok = sum(1 for pd in distances if pd.distance is not None)
    print(f"computed {ok}/{len(distances)} distances ({args.variant}) into {out}")
    return 0


def _load_distances(path: Path) -> list[baseline.PairDistance]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        out = []
        for row in reader:
            raw = (row.get("distance") or "").strip()
            out.append(
                baseline.PairDistance(
                    doc_id=row["doc_id"],
                    distance=float(raw) if raw else None,
                    error=(row.get("error") or "").strip() or None,
                )
            )
    return out


def cmd_correlate(args) -> int:
    with open(args.fidelity, encoding="utf-8") as fh:
        report = report_from_payload(json.load(fh))
    distances = {}
    for part in args.distances.split(","):
        path = Path(part.strip())
        distances[path.stem] = _load_distances(path)
    rows = correlation_table(distances, report)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "n", *COMPONENT_ORDER])
        for row in rows:
            cells = [
                "NA" if row.cells[k] is None else repr(row.cells[k])
                for k in COMPONENT_ORDER
            ]
            writer.writerow([row.method, row.n, *cells])
    for row in rows:
        rendered = "  ".join(
            f"({k})="
            + ("NA" if row.cells[k] is None else f"{row.cells[k]:.4f}")
            for k in COMPONENT_ORDER
        )
        print(f"{row.method} (n={row.n}): {rendered}")
    return 0


def _mock_letter(prompt: str, generator_id: str, params) -> str:
    profile_lines = [
        line for line in prompt.splitlines() if ": " in line or line.startswith("- ")
    ]
    body = " ".join(line.strip("- ") for line in profile_lines[:6])
    return (
        "Dear Sir or Madam,\n\n"
        f"I am writing to apply for a loan. {body}\n\n"
        f"Yours faithfully,\nan applicant ({generator_id})"
    )


def cmd_generate(args) -> int:
    schema = load_schema(args.schema)
    representations = []
    if not args.free:
        if not args.representations:
            raise ValidationError("--representations is required unless --free is set")
        representations = load_representations(args.representations, schema)
        if args.profiles:
            wanted = {p.strip() for p in args.profiles.split(",") if p.strip()}
            representations = [x for x in representations if x.profile_id in wanted]
            missing = wanted - {x.profile_id for x in representations}
            if missing:
                raise ValidationError(f"unknown profile ids: {sorted(missing)}")
    models = [m.strip() for m in args.models.split(",") if m.strip()]
    if not models:
        raise ValidationError("--models needs at least one generator id")
    bare = {m.strip() for m in args.no_sampling_params.split(",") if m.strip()}
    mode = genclient.FREE if args.free else genclient.VALUE_BASED
    jobs = []
    for model in models:
        jobs.extend(
            genclient.make_jobs(
                schema,
                representations,
                [model],
                n_variants=args.variants,
                mode=mode,
                params=None if model in bare else genclient.default_params(),
            )
        )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    client = (
        genclient.MockChatClient(fallback=_mock_letter)
        if args.mock
        else genclient.HttpChatClient()
    )
    descriptions = genclient.run_jobs(
        jobs,
        client,
        out / "generation_ledger.jsonl",
        max_requests=args.max_requests,
        concurrency=args.concurrency,
    )
    (out / "descriptions.jsonl").write_text(
        descriptions_to_text(descriptions), encoding="utf-8"
    )
    print(
        f"generated {len(descriptions)} descriptions "
        f"({len(models)} models x {args.variants} variants) into {out}"
    )
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    serve(args.corpus, args.annotations, host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    sys.exit(main())
