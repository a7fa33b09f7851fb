"""Command-line surface: split, diagnose, compare, eval, convert.

Every emitted JSON report embeds the run configuration that produced it,
and all file writes are atomic (temp file + rename), so re-running a
command with the same inputs reproduces each file byte for byte.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Any

from ._version import __version__
from .corpus import EmosplitError, parse_canonical, serialize_canonical
from .diagnostics import (
    ProvenanceError,
    annotator_f1,
    build_shift_report,
    compare_partitions,
    evaluate_predictions,
    parse_predictions,
)
from .emowoz import parse_emowoz
from .reports import (
    comparison_to_jsonable,
    dump_json,
    evaluation_to_jsonable,
    f1_report_to_jsonable,
    render_comparison_md,
    render_evaluation_md,
    render_shift_report_md,
    shift_report_to_jsonable,
)
from .splitter import (
    DEFAULT_SEED,
    SplitRatios,
    partition_from_json,
    partition_list_files,
    partition_to_json,
    run_split,
)
from .strata import (
    DEFAULT_FREQUENCY_THRESHOLD,
    build_frequency_table,
    frequency_table_to_csv,
)


def atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    handle = tempfile.NamedTemporaryFile(
        "w", encoding="utf-8", dir=path.parent, prefix=path.name + ".", delete=False
    )
    try:
        with handle:
            handle.write(text)
        os.replace(handle.name, path)
    except BaseException:
        os.unlink(handle.name)
        raise


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _parse_ratios(text: str) -> SplitRatios:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("ratios must be three comma-separated numbers")
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad ratios {text!r}") from None
    try:
        return SplitRatios(*values)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _config_block(args: argparse.Namespace, fields: tuple[str, ...]) -> dict[str, Any]:
    config: dict[str, Any] = {"command": args.command, "tool_version": __version__}
    for field in fields:
        value = getattr(args, field)
        if isinstance(value, SplitRatios):
            value = list(value.as_tuple())
        config[field.replace("_", "-")] = value
    return config


def _md_with_config(markdown: str, config: dict[str, Any]) -> str:
    return markdown + "\n---\nconfig: " + json.dumps(config, sort_keys=True) + "\n"


def _load_corpus(path: str):
    return parse_canonical(_read_text(path))


def cmd_split(args: argparse.Namespace) -> int:
    corpus = _load_corpus(args.input)
    result = run_split(corpus, args.ratios, args.threshold, args.seed)
    out_dir = Path(args.out_dir)

    atomic_write_text(out_dir / "partition.json", partition_to_json(result.partition))
    for name, content in partition_list_files(result.partition).items():
        atomic_write_text(out_dir / name, content)

    sizes = result.partition.sizes()
    n_frequent_strata = len(result.plan.per_stratum)
    n_frequent = len(result.strata.frequent)
    n_pooled = len(result.strata.non_frequent)
    print(f"corpus: {len(corpus)} dialogues, {corpus.user_turn_count} user utterances")
    print(
        f"strata: {n_frequent_strata} frequent sequences covering {n_frequent} dialogues; "
        f"{n_pooled} pooled"
    )
    print(
        "sizes: "
        + ", ".join(f"{split.value} {count}" for split, count in sizes.items())
    )
    print(f"wrote: {out_dir / 'partition.json'} and 3 list files")
    return 0


def cmd_diagnose(args: argparse.Namespace) -> int:
    corpus = _load_corpus(args.input)
    partition = partition_from_json(_read_text(args.partition))
    report = build_shift_report(corpus, partition)

    f1_reports = None
    notices = list(report.notices)
    try:
        f1_reports = annotator_f1(corpus, partition, pooling=args.annotator_pooling)
    except ProvenanceError as exc:
        notices.append(f"annotator-F1 section unavailable: {exc}")

    payload = {
        "config": _config_block(args, ("input", "partition", "annotator_pooling", "format")),
        **shift_report_to_jsonable(report),
        "annotator_f1": (
            None
            if f1_reports is None
            else {
                "pooling": args.annotator_pooling,
                "per_split": {
                    split.value: f1_report_to_jsonable(rep) for split, rep in f1_reports.items()
                },
            }
        ),
        "notices": notices,
    }
    markdown = render_shift_report_md(report, f1_reports, args.annotator_pooling)
    if f1_reports is None:
        markdown += "note: annotator-F1 section unavailable (no per-annotator labels)\n"
    markdown = _md_with_config(markdown, payload["config"])
    csv_text = frequency_table_to_csv(build_frequency_table(corpus))

    out_dir = Path(args.out_dir)
    atomic_write_text(out_dir / "diagnostics.json", dump_json(payload))
    atomic_write_text(out_dir / "diagnostics.md", markdown)
    atomic_write_text(out_dir / "sequence-frequencies.csv", csv_text)

    if args.format == "json":
        print(dump_json(payload), end="")
    elif args.format == "csv":
        print(csv_text, end="")
    else:
        print(markdown, end="")
    print(f"wrote: {out_dir}/diagnostics.json, diagnostics.md, sequence-frequencies.csv")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    corpus = _load_corpus(args.input)
    original = partition_from_json(_read_text(args.partition))
    proposed = partition_from_json(_read_text(args.partition_b))
    report = compare_partitions(corpus, original, proposed)

    payload = {
        "config": _config_block(args, ("input", "partition", "partition_b", "assert_improved")),
        **comparison_to_jsonable(report),
    }
    markdown = _md_with_config(render_comparison_md(report), payload["config"])

    out_dir = Path(args.out_dir)
    atomic_write_text(out_dir / "comparison.json", dump_json(payload))
    atomic_write_text(out_dir / "comparison.md", markdown)

    if args.format == "json":
        print(dump_json(payload), end="")
    else:
        print(markdown, end="")
    print(f"wrote: {out_dir}/comparison.json, comparison.md")

    if args.assert_improved and not report.improved:
        print("assertion failed: proposed partition does not improve on the original", file=sys.stderr)
        return 1
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    corpus = _load_corpus(args.input)
    partition = partition_from_json(_read_text(args.partition))
    predictions = parse_predictions(_read_text(args.predictions))
    evaluation = evaluate_predictions(predictions, corpus, partition)

    payload = {
        "config": _config_block(args, ("input", "partition", "predictions")),
        **evaluation_to_jsonable(evaluation),
    }
    markdown = _md_with_config(render_evaluation_md(evaluation), payload["config"])

    out_dir = Path(args.out_dir)
    atomic_write_text(out_dir / "evaluation.json", dump_json(payload))
    atomic_write_text(out_dir / "evaluation.md", markdown)

    if args.format == "json":
        print(dump_json(payload), end="")
    else:
        print(markdown, end="")
    print(f"wrote: {out_dir}/evaluation.json, evaluation.md")
    return 0


def cmd_convert(args: argparse.Namespace) -> int:
    split_lists = None
    if args.dev_list or args.test_list:
        split_lists = {}
        if args.dev_list:
            split_lists["dev"] = _read_text(args.dev_list).splitlines()
        if args.test_list:
            split_lists["test"] = _read_text(args.test_list).splitlines()

    corpus, original = parse_emowoz(_read_text(args.input), split_lists)
    out_dir = Path(args.out_dir)
    atomic_write_text(out_dir / "canonical.json", serialize_canonical(corpus))
    wrote = [str(out_dir / "canonical.json")]
    if original is not None:
        atomic_write_text(out_dir / "original-partition.json", partition_to_json(original))
        wrote.append(str(out_dir / "original-partition.json"))

    print(f"converted: {len(corpus)} dialogues, {corpus.user_turn_count} user utterances")
    if original is not None:
        sizes = original.sizes()
        print(
            "original split sizes: "
            + ", ".join(f"{split.value} {count}" for split, count in sizes.items())
        )
    print("wrote: " + ", ".join(wrote))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emosplit",
        description=(
            "Emotion-sequence stratified partitioning and dataset-shift "
            "diagnostics for dialogue corpora."
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    def add_common(sub: argparse.ArgumentParser, *, partition: bool = False) -> None:
        sub.add_argument("--input", required=True, help="corpus file")
        sub.add_argument("--out-dir", required=True, help="directory for emitted files")
        if partition:
            sub.add_argument("--partition", required=True, help="partition JSON file")

    split = commands.add_parser("split", help="partition a corpus deterministically")
    add_common(split)
    split.add_argument("--seed", type=int, default=DEFAULT_SEED)
    split.add_argument(
        "--ratios", type=_parse_ratios, default=SplitRatios(), metavar="a,b,c",
        help="train,dev,test fractions (default 0.8,0.1,0.1)",
    )
    split.add_argument(
        "--threshold", type=int, default=DEFAULT_FREQUENCY_THRESHOLD,
        help="sequences occurring in more conversations than this are stratified",
    )
    split.set_defaults(func=cmd_split)

    diagnose = commands.add_parser("diagnose", help="frequency/agreement/F1 diagnostics")
    add_common(diagnose, partition=True)
    diagnose.add_argument("--annotator-pooling", choices=("pooled", "averaged"), default="pooled")
    diagnose.add_argument("--format", choices=("json", "csv", "md"), default="md")
    diagnose.set_defaults(func=cmd_diagnose)

    compare = commands.add_parser("compare", help="compare two partitions of one corpus")
    add_common(compare, partition=True)
    compare.add_argument("--partition-b", required=True, help="proposed partition JSON file")
    compare.add_argument("--assert-improved", action="store_true")
    compare.add_argument("--format", choices=("json", "md"), default="md")
    compare.set_defaults(func=cmd_compare)

    evaluate = commands.add_parser("eval", help="score an external prediction file")
    add_common(evaluate, partition=True)
    evaluate.add_argument("--predictions", required=True, help="JSON-Lines prediction file")
    evaluate.add_argument("--format", choices=("json", "md"), default="md")
    evaluate.set_defaults(func=cmd_eval)

    convert = commands.add_parser("convert", help="EmoWOZ release file to canonical format")
    add_common(convert)
    convert.add_argument("--dev-list", help="upstream dev dialogue-id list file")
    convert.add_argument("--test-list", help="upstream test dialogue-id list file")
    convert.set_defaults(func=cmd_convert)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (EmosplitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
