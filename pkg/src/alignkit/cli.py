"""Batch command-line surface: align, project, eval-aer, eval-f1, sweep.

Sentence pairing across files is strictly positional: line k of every input
refers to the same sentence pair.  Work can be sharded across processes
with --jobs; results are collected in input order, so outputs are
byte-identical regardless of the worker count.

Exit codes: 0 success, 2 input or contract error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .aligner import DEFAULT_THRESHOLD, AlignConfig, align_pair
from .embed_io import (
    FormatError,
    format_alignment,
    parse_alignment,
    parse_bio,
    parse_pharaoh,
    read_embeddings,
    write_bio,
)
from .evaluation import (
    FILTER_FULL,
    FILTER_SOURCE_ONLY,
    compute_corpus_aer,
    compute_f1,
    filter_aer_pair,
    load_stopwords,
)
from .projection import project_sentence

PARAM_LAYER = "layer"
PARAM_THRESHOLD = "threshold"
METRIC_AER = "aer"
METRIC_F1 = "f1"


@dataclass
class SweepSpec:
    """One sweep request: which knob to vary, over which values, scored how."""

    parameter: str
    values: list
    metric: str

    def __post_init__(self) -> None:
        if self.parameter not in (PARAM_LAYER, PARAM_THRESHOLD):
            raise ValueError(f"unknown sweep parameter {self.parameter!r}")
        if self.metric not in (METRIC_AER, METRIC_F1):
            raise ValueError(f"unknown sweep metric {self.metric!r}")
        if not self.values:
            raise ValueError("sweep needs at least one value")
        if self.parameter == PARAM_THRESHOLD:
            for value in self.values:
                if not 0.0 <= value < 1.0:
                    raise ValueError(f"threshold {value} outside [0, 1)")
        else:
            for value in self.values:
                if value < 0:
                    raise ValueError(f"negative layer {value}")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alignkit",
        description="Word alignment, BIO label projection, and evaluation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    align = sub.add_parser(
        "align", help="extract word alignments from two embedding dump files"
    )
    align.add_argument("source", help="source-side TAEM embeddings")
    align.add_argument("target", help="target-side TAEM embeddings")
    align.add_argument("--output", "-o", required=True, help="alignment output path")
    align.add_argument(
        "--threshold",
        type=float,
        default=DEFAULT_THRESHOLD,
        help="alignment probability threshold (default: %(default)s)",
    )
    align.add_argument(
        "--jobs", type=_positive_int, default=1, help="worker processes (default: 1)"
    )
    align.set_defaults(handler=_cmd_align)

    project = sub.add_parser(
        "project", help="project BIO labels onto target sentences via alignments"
    )
    project.add_argument("source_bio", help="source-side BIO predictions")
    project.add_argument("alignments", help="alignment file, one line per sentence")
    project.add_argument("target_tokens", help="target sentences, one per line")
    project.add_argument("--output", "-o", required=True, help="target BIO output path")
    project.add_argument(
        "--jobs", type=_positive_int, default=1, help="worker processes (default: 1)"
    )
    project.set_defaults(handler=_cmd_project)

    eval_aer = sub.add_parser(
        "eval-aer", help="score predicted alignments against gold alignments"
    )
    eval_aer.add_argument("predicted", help="predicted alignment file")
    eval_aer.add_argument("gold", help="gold alignment file (sure '-' / possible '?')")
    eval_aer.add_argument(
        "--one-based-gold",
        action="store_true",
        help="gold file uses one-based word indices",
    )
    eval_aer.add_argument(
        "--source-tokens", help="source sentences, required for stopword filtering"
    )
    eval_aer.add_argument(
        "--stopwords", help="stopword list (one word per line); enables filtering"
    )
    eval_aer.add_argument(
        "--filter-mode",
        choices=[FILTER_FULL, FILTER_SOURCE_ONLY],
        default=FILTER_FULL,
        help="stopword filtering scope (default: %(default)s)",
    )
    eval_aer.add_argument("--json", help="also write the report as JSON to this path")
    eval_aer.set_defaults(handler=_cmd_eval_aer)

    eval_f1 = sub.add_parser(
        "eval-f1", help="entity-level span F1 between BIO files"
    )
    eval_f1.add_argument(
        "files",
        nargs="+",
        metavar="PREDICTED GOLD",
        help="one or more predicted/gold BIO file pairs; several pairs "
        "(e.g. per language) additionally report their unweighted mean F1",
    )
    eval_f1.add_argument("--json", help="also write the report as JSON to this path")
    eval_f1.set_defaults(handler=_cmd_eval_f1)

    sweep = sub.add_parser(
        "sweep", help="score a grid of thresholds or encoder layers"
    )
    sweep.add_argument(
        "--parameter",
        choices=[PARAM_THRESHOLD, PARAM_LAYER],
        required=True,
        help="which knob to vary",
    )
    sweep.add_argument(
        "--values", required=True, help="comma-separated list of candidate values"
    )
    sweep.add_argument(
        "--metric", choices=[METRIC_AER, METRIC_F1], required=True, help="score to report"
    )
    sweep.add_argument("--source", help="source TAEM file (threshold sweeps)")
    sweep.add_argument("--target", help="target TAEM file (threshold sweeps)")
    sweep.add_argument(
        "--embeddings-root",
        help="directory with source.layer<k>.taem / target.layer<k>.taem (layer sweeps)",
    )
    sweep.add_argument(
        "--threshold",
        type=float,
        default=DEFAULT_THRESHOLD,
        help="fixed threshold for layer sweeps (default: %(default)s)",
    )
    sweep.add_argument("--gold", help="gold alignment file (metric aer)")
    sweep.add_argument(
        "--one-based-gold",
        action="store_true",
        help="gold alignment file uses one-based word indices",
    )
    sweep.add_argument("--source-bio", help="source BIO predictions (metric f1)")
    sweep.add_argument("--target-tokens", help="target sentences file (metric f1)")
    sweep.add_argument("--gold-bio", help="gold target BIO file (metric f1)")
    sweep.add_argument(
        "--jobs", type=_positive_int, default=1, help="worker processes (default: 1)"
    )
    sweep.add_argument("--json", help="also write the sweep table as JSON to this path")
    sweep.set_defaults(handler=_cmd_sweep)

    return parser


def _read_lines(path: str | Path) -> list[str]:
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read().splitlines()


def _write_lines(path: str | Path, lines: Iterable[str]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for line in lines:
            handle.write(line)
            handle.write("\n")


def _run_ordered(task: Callable, items: Sequence, jobs: int) -> list:
    """Apply task to items, in order, optionally across worker processes."""
    if jobs <= 1 or len(items) < 2:
        return [task(item) for item in items]
    chunk = max(1, len(items) // (jobs * 4))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(task, items, chunksize=chunk))


def _format_number(value: object) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def _print_report(report: dict, prefix: str = "") -> None:
    for key, value in report.items():
        print(f"{prefix}{key}={_format_number(value)}")


def _write_json(path: str | Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")


def _align_task(item: tuple) -> set[tuple[int, int]]:
    record_x, record_y, threshold = item
    return align_pair(record_x, record_y, AlignConfig(threshold=threshold))


def _compute_alignments(
    records_x: list, records_y: list, threshold: float, jobs: int
) -> list[set[tuple[int, int]]]:
    tasks = [(x, y, threshold) for x, y in zip(records_x, records_y)]
    return _run_ordered(_align_task, tasks, jobs)


def _load_taem_pair(source: str, target: str) -> tuple[list, list]:
    records_x = list(read_embeddings(source))
    records_y = list(read_embeddings(target))
    if len(records_x) != len(records_y):
        raise FormatError(
            f"record count mismatch: source has {len(records_x)} records, "
            f"target has {len(records_y)}"
        )
    return records_x, records_y


def _cmd_align(args: argparse.Namespace) -> int:
    records_x, records_y = _load_taem_pair(args.source, args.target)
    config = AlignConfig(threshold=args.threshold)
    alignments = _compute_alignments(
        records_x, records_y, config.threshold, args.jobs
    )
    _write_lines(args.output, (format_alignment(pairs) for pairs in alignments))
    return 0


def _project_task(item: tuple) -> list[str]:
    tags, alignment, source_length, target_length, line_no = item
    for i, _ in alignment:
        if i >= source_length:
            raise FormatError(
                f"line {line_no}: alignment source index {i} out of range "
                f"for {source_length} source tokens"
            )
    try:
        return project_sentence(tags, alignment, target_length)
    except IndexError as exc:
        raise FormatError(f"line {line_no}: {exc}") from exc


def _cmd_project(args: argparse.Namespace) -> int:
    source_sentences = parse_bio(args.source_bio)
    alignment_lines = _read_lines(args.alignments)
    target_lines = _read_lines(args.target_tokens)
    counts = (len(source_sentences), len(alignment_lines), len(target_lines))
    if len(set(counts)) != 1:
        raise FormatError(
            f"sentence count mismatch: {counts[0]} BIO sentences, "
            f"{counts[1]} alignment lines, {counts[2]} target lines"
        )
    target_tokens = [line.split() for line in target_lines]
    tasks = []
    for line_no, ((words, tags), raw_alignment, targets) in enumerate(
        zip(source_sentences, alignment_lines, target_tokens), start=1
    ):
        alignment = parse_alignment(raw_alignment, line_no=line_no)
        tasks.append((tags, alignment, len(words), len(targets), line_no))
    projected = _run_ordered(_project_task, tasks, args.jobs)
    write_bio(zip(target_tokens, projected), args.output)
    return 0


def _parse_aer_inputs(args: argparse.Namespace) -> list[tuple[set, object]]:
    predicted_lines = _read_lines(args.predicted)
    gold_lines = _read_lines(args.gold)
    if len(predicted_lines) != len(gold_lines):
        raise FormatError(
            f"line count mismatch: {len(predicted_lines)} predicted, "
            f"{len(gold_lines)} gold"
        )
    pairs = []
    for line_no, (pred_line, gold_line) in enumerate(
        zip(predicted_lines, gold_lines), start=1
    ):
        predicted = parse_alignment(pred_line, line_no=line_no)
        gold = parse_pharaoh(
            gold_line, one_based=args.one_based_gold, line_no=line_no
        )
        pairs.append((predicted, gold))
    return pairs


def _cmd_eval_aer(args: argparse.Namespace) -> int:
    filtering = args.stopwords is not None or args.source_tokens is not None
    if filtering and (args.stopwords is None or args.source_tokens is None):
        raise FormatError(
            "stopword filtering needs both --stopwords and --source-tokens"
        )
    pairs = _parse_aer_inputs(args)
    report = compute_corpus_aer(pairs)
    if not filtering:
        _print_report(report.to_dict())
        if args.json:
            _write_json(args.json, report.to_dict())
        return 0
    token_lines = _read_lines(args.source_tokens)
    if len(token_lines) != len(pairs):
        raise FormatError(
            f"line count mismatch: {len(pairs)} alignment pairs, "
            f"{len(token_lines)} source token lines"
        )
    stopwords = load_stopwords(args.stopwords)
    filtered = [
        filter_aer_pair(pred, gold, tokens.split(), stopwords, mode=args.filter_mode)
        for (pred, gold), tokens in zip(pairs, token_lines)
    ]
    filtered_report = compute_corpus_aer(filtered)
    if filtered_report.predicted_count + filtered_report.sure_count == 0:
        print(
            "warning: stopword filtering removed every predicted and sure edge; "
            "filtered aer is 0 by convention",
            file=sys.stderr,
        )
    _print_report(report.to_dict(), prefix="all_words.")
    _print_report(filtered_report.to_dict(), prefix="without_stopwords.")
    if args.json:
        _write_json(
            args.json,
            {
                "all_words": report.to_dict(),
                "without_stopwords": filtered_report.to_dict(),
            },
        )
    return 0


def _cmd_eval_f1(args: argparse.Namespace) -> int:
    if len(args.files) % 2 != 0:
        raise FormatError(
            f"eval-f1 takes predicted/gold file pairs, got {len(args.files)} files"
        )
    reports = []
    for predicted_path, gold_path in zip(args.files[::2], args.files[1::2]):
        predicted = [tags for _, tags in parse_bio(predicted_path)]
        gold = [tags for _, tags in parse_bio(gold_path)]
        reports.append(compute_f1(predicted, gold))
    if len(reports) == 1:
        _print_report(reports[0].to_dict())
        if args.json:
            _write_json(args.json, reports[0].to_dict())
        return 0
    mean_f1 = sum(report.f1 for report in reports) / len(reports)
    for index, report in enumerate(reports, start=1):
        _print_report(report.to_dict(), prefix=f"pair{index}.")
    print(f"mean_f1={_format_number(mean_f1)}")
    if args.json:
        _write_json(
            args.json,
            {"pairs": [report.to_dict() for report in reports], "mean_f1": mean_f1},
        )
    return 0


def _parse_sweep_values(args: argparse.Namespace) -> list:
    raw = [item for item in args.values.split(",") if item.strip()]
    try:
        if args.parameter == PARAM_THRESHOLD:
            return [float(item) for item in raw]
        return [int(item) for item in raw]
    except ValueError as exc:
        raise FormatError(f"bad sweep value list {args.values!r}: {exc}") from exc


def _sweep_alignments(
    args: argparse.Namespace, spec: SweepSpec
) -> list[tuple[object, list[set[tuple[int, int]]]]]:
    """Alignment sets per swept value, reading per-layer files when needed."""
    results = []
    if spec.parameter == PARAM_THRESHOLD:
        if not args.source or not args.target:
            raise FormatError("threshold sweeps need --source and --target")
        records_x, records_y = _load_taem_pair(args.source, args.target)
        for value in spec.values:
            results.append(
                (value, _compute_alignments(records_x, records_y, value, args.jobs))
            )
        return results
    if not args.embeddings_root:
        raise FormatError("layer sweeps need --embeddings-root")
    root = Path(args.embeddings_root)
    for value in spec.values:
        source = root / f"source.layer{value}.taem"
        target = root / f"target.layer{value}.taem"
        for path in (source, target):
            if not path.exists():
                raise FormatError(f"missing layer file: {path}")
        records_x, records_y = _load_taem_pair(str(source), str(target))
        results.append(
            (value, _compute_alignments(records_x, records_y, args.threshold, args.jobs))
        )
    return results


def _sweep_score_aer(args: argparse.Namespace, alignments: list) -> float:
    gold_lines = _read_lines(args.gold)
    if len(gold_lines) != len(alignments):
        raise FormatError(
            f"line count mismatch: {len(alignments)} pairs, "
            f"{len(gold_lines)} gold lines"
        )
    golds = [
        parse_pharaoh(line, one_based=args.one_based_gold, line_no=line_no)
        for line_no, line in enumerate(gold_lines, start=1)
    ]
    return compute_corpus_aer(zip(alignments, golds)).aer


def _sweep_score_f1(args: argparse.Namespace, alignments: list) -> float:
    source_sentences = parse_bio(args.source_bio)
    target_lines = _read_lines(args.target_tokens)
    gold_tags = [tags for _, tags in parse_bio(args.gold_bio)]
    if not len(source_sentences) == len(target_lines) == len(alignments):
        raise FormatError(
            f"sentence count mismatch: {len(source_sentences)} BIO sentences, "
            f"{len(target_lines)} target lines, {len(alignments)} pairs"
        )
    projected = []
    for (words, tags), line, alignment in zip(
        source_sentences, target_lines, alignments
    ):
        projected.append(project_sentence(tags, alignment, len(line.split())))
    return compute_f1(projected, gold_tags).f1


def _cmd_sweep(args: argparse.Namespace) -> int:
    spec = SweepSpec(
        parameter=args.parameter,
        values=_parse_sweep_values(args),
        metric=args.metric,
    )
    if spec.metric == METRIC_AER and not args.gold:
        raise FormatError("metric aer needs --gold")
    if spec.metric == METRIC_F1 and not (
        args.source_bio and args.target_tokens and args.gold_bio
    ):
        raise FormatError("metric f1 needs --source-bio, --target-tokens, --gold-bio")
    rows: list[tuple[object, float]] = []
    for value, alignments in _sweep_alignments(args, spec):
        if spec.metric == METRIC_AER:
            score = _sweep_score_aer(args, alignments)
        else:
            score = _sweep_score_f1(args, alignments)
        rows.append((value, score))
    print(f"value,{spec.metric}")
    for value, score in rows:
        print(f"{_format_number(value)},{_format_number(score)}")
    pick = min if spec.metric == METRIC_AER else max
    best_value, best_score = pick(rows, key=lambda row: row[1])
    print()
    print(f"best_value={_format_number(best_value)}")
    print(f"best_{spec.metric}={_format_number(best_score)}")
    if args.json:
        _write_json(
            args.json,
            {
                "parameter": spec.parameter,
                "metric": spec.metric,
                "rows": [
                    {"value": value, spec.metric: score} for value, score in rows
                ],
                "best_value": best_value,
                f"best_{spec.metric}": best_score,
            },
        )
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
