"""Command-line interface.

Subcommands: parse, transform, induce, evaluate, stats, plot-data,
compare-rankings, record-fixtures. All randomness flows from --seed;
nothing is written outside --out / --cache-dir.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench, pipeline
from .backends import ModelBackends, TransportError, build_transport
from .config import ConfigError, RunConfig, load_config
from .graph import GraphError
from .penman import PenmanError, iter_corpus, serialize_penman, to_triples
from .pipeline import InduceOptions, induce_dataset, read_pairs, read_records
from .transforms import ManipulationType
from .wordnet import WordnetError, load_database

PROG = "semfoil"


class _HelpFormatter(argparse.ArgumentDefaultsHelpFormatter):
    """Fixed-width help so output is stable across terminals."""

    def __init__(self, prog):
        super().__init__(prog, max_help_position=26, width=96)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        formatter_class=_HelpFormatter,
        description=(
            "Parse sentences to AMR graphs, apply rule-based semantic "
            "manipulations, induce NLI-filtered foil datasets, and benchmark "
            "text embedding models on them."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    backend = argparse.ArgumentParser(add_help=False)
    group = backend.add_argument_group("backend")
    group.add_argument("--config", help="JSON (or TOML) config file")
    group.add_argument("--base-url", help="model server base URL")
    group.add_argument(
        "--fixtures", help="replay recorded responses from this JSONL file (offline)"
    )
    group.add_argument("--cache-dir", help="disk cache for backend responses")
    group.add_argument("--timeout", type=float, help="request timeout in seconds")

    p = sub.add_parser(
        "parse",
        help="validate and canonicalize PENMAN graphs",
        description=(
            "Read blank-line-separated PENMAN graphs and print them in "
            "canonical form or as flat triples. Malformed input exits with a "
            "positioned error."
        ),
        formatter_class=_HelpFormatter,
    )
    p.add_argument("--input", default="-", help="graph file, or - for stdin")
    p.add_argument(
        "--format", choices=("penman", "triples"), default="penman", help="output form"
    )
    p.add_argument("--strip-wiki", action="store_true", help="drop :wiki attributes")

    p = sub.add_parser(
        "transform",
        parents=[backend],
        help="apply one manipulation to a sentence",
        description=(
            "Parse a sentence, apply one seeded manipulation, generate the "
            "foil, and print the full audit record as JSON."
        ),
        formatter_class=_HelpFormatter,
    )
    p.add_argument("--sentence", required=True, help="input sentence")
    p.add_argument(
        "--manip",
        action="append",
        choices=[m.value for m in ManipulationType],
        help="allowed manipulation (repeatable; default: all five)",
    )
    p.add_argument("--seed", type=int, default=None, help="random seed")
    p.add_argument("--wordnet", help="WNDB dictionary directory (for AR/HS)")

    p = sub.add_parser(
        "induce",
        parents=[backend],
        help="induce a foil dataset from paraphrase pairs",
        description=(
            "Attempt one manipulation per pair, validate with NLI, and write "
            "JSON-lines foil records with the retained flag set by the filter."
        ),
        formatter_class=_HelpFormatter,
    )
    p.add_argument("--pairs", required=True, help="pairs file (.jsonl, .tsv, .csv)")
    p.add_argument(
        "--filter",
        default=None,
        help="filter name: main (contradiction > 0.9) or neutral-ablation (0.5-0.8)",
    )
    p.add_argument("--seed", type=int, default=None, help="global random seed")
    p.add_argument("--out", required=True, help="output records JSONL")
    p.add_argument("--wordnet", help="WNDB dictionary directory (for AR/HS)")
    p.add_argument("--dataset", help="dataset tag override for the pairs")
    p.add_argument(
        "--manip",
        action="append",
        choices=[m.value for m in ManipulationType],
        help="allowed manipulation (repeatable; default: all five)",
    )

    p = sub.add_parser(
        "evaluate",
        parents=[backend],
        help="score embedding models on induced records",
        description=(
            "Embed each (source, paraphrase, foil) triple and report TACC, "
            "AUC, their harmonic mean, and per-manipulation TACC per model."
        ),
        formatter_class=_HelpFormatter,
    )
    p.add_argument("--records", required=True, help="records JSONL from induce")
    p.add_argument(
        "--models", required=True, help="comma-separated embedding model ids"
    )
    p.add_argument("--out", required=True, help="output directory for reports")

    p = sub.add_parser(
        "stats",
        help="dataset statistics for induced records",
        description="Retained totals and per-manipulation percentages.",
        formatter_class=_HelpFormatter,
    )
    p.add_argument("--records", required=True, help="records JSONL from induce")
    p.add_argument("--json", action="store_true", help="emit JSON instead of a table")

    p = sub.add_parser(
        "plot-data",
        help="emit grouped-bar data from evaluation reports",
        description=(
            "Collect per-model evaluation reports and write the per-type TACC "
            "matrix (models x manipulations) as CSV for external plotting."
        ),
        formatter_class=_HelpFormatter,
    )
    p.add_argument("--reports", required=True, help="directory of report JSON files")
    p.add_argument("--out", required=True, help="output CSV path")

    p = sub.add_parser(
        "compare-rankings",
        help="Spearman correlation between two model rankings",
        description=(
            "Read two (model, score) CSV files and print the Spearman rank "
            "correlation over the shared models."
        ),
        formatter_class=_HelpFormatter,
    )
    p.add_argument("--a", required=True, help="first ranking CSV")
    p.add_argument("--b", required=True, help="second ranking CSV")

    p = sub.add_parser(
        "record-fixtures",
        parents=[backend],
        help="record live backend responses as replayable fixtures",
        description=(
            "Run the induction flow against a live model server and append "
            "every request/response to a fixtures JSONL usable with "
            "--fixtures. Optionally records embeddings for given models."
        ),
        formatter_class=_HelpFormatter,
    )
    p.add_argument("--pairs", required=True, help="pairs file (.jsonl, .tsv, .csv)")
    p.add_argument("--out", required=True, help="fixtures JSONL to append to")
    p.add_argument("--seed", type=int, default=None, help="global random seed")
    p.add_argument("--wordnet", help="WNDB dictionary directory (for AR/HS)")
    p.add_argument("--models", help="also record embeddings for these model ids")
    p.add_argument(
        "--manip",
        action="append",
        choices=[m.value for m in ManipulationType],
        help="allowed manipulation (repeatable; default: all five)",
    )

    return parser


def _load_config(args) -> RunConfig:
    overrides = {}
    for attr, key in [
        ("base_url", "base_url"),
        ("cache_dir", "cache_dir"),
        ("timeout", "timeout"),
        ("wordnet", "wordnet_dir"),
        ("seed", "seed"),
        ("filter", "filter"),
    ]:
        if hasattr(args, attr):
            overrides[key] = getattr(args, attr)
    if getattr(args, "manip", None):
        overrides["allowed_manipulations"] = args.manip
    return load_config(getattr(args, "config", None), **overrides)


def _backends(args, config: RunConfig, record: str | None = None) -> ModelBackends:
    transport = build_transport(
        base_url=config.base_url,
        fixtures=getattr(args, "fixtures", None),
        record=record,
        cache_dir=config.cache_dir,
        timeout=config.timeout,
        batch_size=config.batch_size,
        max_in_flight=config.max_in_flight,
    )
    return ModelBackends(transport, nli_symmetric=config.nli_symmetric)


def _wordnet(config: RunConfig):
    if not config.wordnet_dir:
        return None
    return load_database(config.wordnet_dir)


def _cmd_parse(args) -> int:
    if args.input == "-":
        graphs = list(iter_corpus(sys.stdin, strip_wiki=args.strip_wiki))
    else:
        with open(args.input, encoding="utf-8") as stream:
            graphs = list(iter_corpus(stream, strip_wiki=args.strip_wiki))
    for i, graph in enumerate(graphs):
        if args.format == "penman":
            if i:
                print()
            print(serialize_penman(graph))
        else:
            print(
                json.dumps(
                    {"root": graph.root, "triples": to_triples(graph)},
                    ensure_ascii=False,
                )
            )
    return 0


def _cmd_transform(args) -> int:
    config = _load_config(args)
    backends = _backends(args, config)
    db = _wordnet(config)
    foil, record, source_graph, foil_graph = pipeline.transform_sentence(
        args.sentence,
        backends,
        db,
        config.seed,
        allowed=config.allowed(),
        policy=config.policy(),
    )
    print(
        json.dumps(
            {
                "sentence": args.sentence,
                "foil": foil,
                "manipulation": record.to_json(),
                "source_graph": source_graph,
                "foil_graph": foil_graph,
            },
            indent=2,
            ensure_ascii=False,
        )
    )
    return 0


def _induce_common(args, record_path: str | None = None):
    config = _load_config(args)
    backends = _backends(args, config, record=record_path)
    db = _wordnet(config)
    pairs = read_pairs(args.pairs, dataset=getattr(args, "dataset", None))
    options = InduceOptions(
        seed=config.seed,
        allowed=config.allowed(),
        policy=config.policy(),
        filter_spec=config.filter_spec(),
        nli_reference=config.nli_reference,
        workers=config.workers,
    )
    result = induce_dataset(pairs, backends, db, options)
    return config, backends, result


def _print_induce_summary(result) -> None:
    reasons: dict[str, int] = {}
    for failure in result.failures:
        reasons[failure.reason] = reasons.get(failure.reason, 0) + 1
    summary = {
        "attempted": len(result.records) + len(result.failures),
        "records": len(result.records),
        "retained": len(result.retained),
        "failures": reasons,
    }
    print(json.dumps(summary, sort_keys=True))


def _cmd_induce(args) -> int:
    _, _, result = _induce_common(args)
    pipeline.write_records(result.records, args.out)
    _print_induce_summary(result)
    return 0


def _cmd_evaluate(args) -> int:
    config = _load_config(args)
    backends = _backends(args, config)
    records = read_records(args.records)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    reports = []
    for model_id in [m.strip() for m in args.models.split(",") if m.strip()]:
        report = bench.evaluate_model(records, backends, model_id)
        reports.append(report)
        bench.write_report_json(report, out_dir / f"{model_id.replace('/', '__')}.json")
        print(
            f"{report.model_id}\ttacc={report.tacc:.4f}\tauc={report.auc:.4f}"
            f"\thmean={report.hmean:.4f}\tn={report.n_triples}"
        )
    bench.write_metric_matrix(reports, out_dir / "metrics.csv")
    bench.write_per_type_matrix(reports, out_dir / "per_type_tacc.csv")
    return 0


def _cmd_stats(args) -> int:
    stats = pipeline.dataset_stats(read_records(args.records))
    if args.json:
        print(json.dumps(stats.to_json(), indent=2, sort_keys=True))
    else:
        print(stats.format_table())
    return 0


def _cmd_plot_data(args) -> int:
    reports_dir = Path(args.reports)
    paths = sorted(reports_dir.glob("*.json"))
    if not paths:
        raise FileNotFoundError(f"no report JSON files in {reports_dir}")
    reports = [bench.read_report_json(p) for p in paths]
    bench.write_per_type_matrix(reports, args.out)
    print(f"wrote per-type TACC for {len(reports)} models to {args.out}")
    return 0


def _cmd_compare_rankings(args) -> int:
    rho, n = bench.compare_rankings(
        bench.read_ranking_csv(args.a), bench.read_ranking_csv(args.b)
    )
    print(json.dumps({"spearman": rho, "models": n}))
    return 0


def _cmd_record_fixtures(args) -> int:
    config, backends, result = _induce_common(args, record_path=args.out)
    if getattr(args, "models", None):
        texts = sorted(
            {t for r in result.records for t in (r.source, r.paraphrase, r.foil)}
        )
        for model_id in [m.strip() for m in args.models.split(",") if m.strip()]:
            backends.embed(texts, model_id=model_id)
    _print_induce_summary(result)
    return 0


_COMMANDS = {
    "parse": _cmd_parse,
    "transform": _cmd_transform,
    "induce": _cmd_induce,
    "evaluate": _cmd_evaluate,
    "stats": _cmd_stats,
    "plot-data": _cmd_plot_data,
    "compare-rankings": _cmd_compare_rankings,
    "record-fixtures": _cmd_record_fixtures,
}


def run(argv: list[str] | None = None) -> int:
    """Entry point; returns the process exit code (usage errors exit 2)."""
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (
        PenmanError,
        GraphError,
        WordnetError,
        TransportError,
        ConfigError,
        pipeline.NoManipulationApplicable,
        ValueError,
        OSError,
    ) as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
