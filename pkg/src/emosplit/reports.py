"""Rendering of diagnostics as machine JSON and aligned markdown tables.

Human tables put splits on rows and emotion classes on columns. Displayed
percentages are rounded to two decimals, half up.
"""

from __future__ import annotations

import json
from decimal import ROUND_HALF_UP, Decimal
from typing import Any, Mapping, Sequence

from .corpus import CLASS_LABELS, EmotionLabel
from .diagnostics import (
    ComparisonReport,
    F1Report,
    PredictionEvaluation,
    ShiftReport,
)
from .splitter import SPLITS, Split

SPLIT_TITLES = {Split.TRAIN: "Train", Split.DEV: "Dev", Split.TEST: "Test"}
CLASS_TITLES = [label.display_name for label in CLASS_LABELS]


def round_half_up(value: float, digits: int = 2) -> float:
    quantum = Decimal(1).scaleb(-digits)
    return float(Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP))


def fmt(value: float | None, digits: int = 2) -> str:
    if value is None:
        return "n/a"
    return f"{round_half_up(value, digits):.{digits}f}"


def markdown_table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    def line(cells: Sequence[str]) -> str:
        return "| " + " | ".join(cell.ljust(widths[i]) for i, cell in enumerate(cells)) + " |"
    separator = "|" + "|".join("-" * (width + 2) for width in widths) + "|"
    return "\n".join([line(headers), separator] + [line(row) for row in rows])


def _per_class_row(
    title: str, values: Mapping[EmotionLabel, float | None] | None
) -> list[str]:
    if values is None:
        return [title] + ["n/a"] * len(CLASS_LABELS)
    return [title] + [fmt(values.get(label)) for label in CLASS_LABELS]


def _split_class_table(
    per_split: Mapping[Split, Mapping[EmotionLabel, float | None] | None],
) -> str:
    rows = [_per_class_row(SPLIT_TITLES[split], per_split.get(split)) for split in SPLITS]
    return markdown_table(["Split"] + CLASS_TITLES, rows)


def _js_key(pair: tuple[Split, Split]) -> str:
    return f"{pair[0].value}-{pair[1].value}"


def _freq_to_jsonable(
    per_split: Mapping[Split, Mapping[EmotionLabel, float | None] | None],
) -> dict[str, Any]:
    return {
        split.value: (
            None
            if per_split.get(split) is None
            else {label.display_name: per_split[split].get(label) for label in CLASS_LABELS}
        )
        for split in SPLITS
    }


def f1_report_to_jsonable(report: F1Report) -> dict[str, Any]:
    return {
        "per_class_f1": {
            label.display_name: report.per_class[label] for label in CLASS_LABELS
        },
        "macro_f1_without_neutral": report.macro_f1_without_neutral,
        "macro_f1_with_neutral": report.macro_f1_with_neutral,
        "zero_support_classes": [
            label.display_name for label in report.zero_support_classes
        ],
        "confusion_matrix": [list(row) for row in report.matrix.counts],
    }


def shift_report_to_jsonable(report: ShiftReport) -> dict[str, Any]:
    return {
        "relative_frequency": _freq_to_jsonable(report.relative_frequency),
        "manual_resolution": (
            None if report.manual_resolution is None else _freq_to_jsonable(report.manual_resolution)
        ),
        "max_gap_per_class": {
            label.display_name: report.max_gap_per_class[label] for label in CLASS_LABELS
        },
        "js_divergence": {_js_key(pair): value for pair, value in report.js_divergence.items()},
        "agreement": (
            None
            if report.agreement is None
            else {
                "complete": report.agreement.complete,
                "partial": report.agreement.partial,
                "none": report.agreement.none,
            }
        ),
        "notices": list(report.notices),
    }


def render_shift_report_md(
    report: ShiftReport,
    annotator_reports: Mapping[Split, F1Report] | None = None,
    pooling: str | None = None,
) -> str:
    sections = ["## Relative frequency (%)", "", _split_class_table(report.relative_frequency), ""]

    sections.append("## Manual resolution (%)")
    sections.append("")
    if report.manual_resolution is None:
        sections.append("unavailable: corpus carries no manual-resolution flags")
    else:
        sections.append(_split_class_table(report.manual_resolution))
    sections.append("")

    sections.append("## Max cross-split frequency gap (pp)")
    sections.append("")
    sections.append(
        markdown_table(CLASS_TITLES, [[fmt(report.max_gap_per_class[l]) for l in CLASS_LABELS]])
    )
    sections.append("")

    sections.append("## Jensen-Shannon divergence (base 2)")
    sections.append("")
    sections.append(
        markdown_table(
            ["Pair", "JSD"],
            [[_js_key(pair), fmt(value, 6)] for pair, value in report.js_divergence.items()],
        )
    )
    sections.append("")

    sections.append("## Annotator agreement (%)")
    sections.append("")
    if report.agreement is None:
        sections.append("unavailable: corpus carries no per-annotator labels")
    else:
        sections.append(
            markdown_table(
                ["Complete", "Partial", "None"],
                [
                    [
                        fmt(report.agreement.complete, 1),
                        fmt(report.agreement.partial, 1),
                        fmt(report.agreement.none, 1),
                    ]
                ],
            )
        )
    sections.append("")

    sections.append(f"## Annotator F1 (%){f' [{pooling}]' if pooling else ''}")
    sections.append("")
    if annotator_reports is None:
        sections.append("unavailable: corpus carries no per-annotator labels")
    else:
        sections.append(render_f1_table_md(annotator_reports))
    sections.append("")

    for notice in report.notices:
        sections.append(f"note: {notice}")
    return "\n".join(sections).rstrip() + "\n"


def render_f1_table_md(per_split: Mapping[Split, F1Report]) -> str:
    headers = ["Split"] + CLASS_TITLES + ["Macro w/o Neutral", "Macro w/ Neutral"]
    rows = []
    flagged_lines = []
    for split in SPLITS:
        report = per_split.get(split)
        if report is None:
            rows.append([SPLIT_TITLES[split]] + ["n/a"] * (len(headers) - 1))
            continue
        rows.append(
            [SPLIT_TITLES[split]]
            + [fmt(report.per_class[label]) for label in CLASS_LABELS]
            + [fmt(report.macro_f1_without_neutral), fmt(report.macro_f1_with_neutral)]
        )
        if report.zero_support_classes:
            names = ", ".join(label.display_name for label in report.zero_support_classes)
            flagged_lines.append(
                f"note: {SPLIT_TITLES[split]} scores 0 by convention for classes "
                f"never gold nor predicted: {names}"
            )
    table = markdown_table(headers, rows)
    if flagged_lines:
        table += "\n\n" + "\n".join(flagged_lines)
    return table


def evaluation_to_jsonable(evaluation: PredictionEvaluation) -> dict[str, Any]:
    return {
        "per_split": {
            split.value: f1_report_to_jsonable(report)
            for split, report in evaluation.per_split.items()
        },
        "dev_minus_test": {
            "macro_f1_without_neutral": evaluation.dev_minus_test_without_neutral,
            "macro_f1_with_neutral": evaluation.dev_minus_test_with_neutral,
        },
    }


def render_evaluation_md(evaluation: PredictionEvaluation) -> str:
    lines = ["## Prediction F1 (%)", "", render_f1_table_md(evaluation.per_split), ""]
    lines.append(
        "dev minus test macro F1: "
        f"w/o Neutral {fmt(evaluation.dev_minus_test_without_neutral)}, "
        f"w/ Neutral {fmt(evaluation.dev_minus_test_with_neutral)}"
    )
    return "\n".join(lines) + "\n"


def comparison_to_jsonable(report: ComparisonReport) -> dict[str, Any]:
    payload: dict[str, Any] = {
        "class_gaps": [
            {
                "class": gap.label.display_name,
                "original": gap.original_gap,
                "proposed": gap.proposed_gap,
                "verdict": gap.verdict,
            }
            for gap in report.class_gaps
        ],
        "js_divergence": {
            "original": {_js_key(pair): value for pair, value in report.original_js.items()},
            "proposed": {_js_key(pair): value for pair, value in report.proposed_js.items()},
            "original_mean": report.original_mean_js,
            "proposed_mean": report.proposed_mean_js,
        },
        "improved": report.improved,
        "notices": list(report.notices),
    }
    if report.annotator_spread is not None:
        spread = report.annotator_spread
        payload["annotator_macro_f1_without_neutral"] = {
            "original": {s.value: spread.original_macro[s] for s in SPLITS},
            "proposed": {s.value: spread.proposed_macro[s] for s in SPLITS},
            "original_train_test_gap": spread.original_train_test_gap,
            "proposed_train_test_gap": spread.proposed_train_test_gap,
        }
    else:
        payload["annotator_macro_f1_without_neutral"] = None
    return payload


def render_comparison_md(report: ComparisonReport) -> str:
    lines = ["## Max cross-split frequency gap per class (pp)", ""]
    lines.append(
        markdown_table(
            ["Class", "Original", "Proposed", "Verdict"],
            [
                [gap.label.display_name, fmt(gap.original_gap), fmt(gap.proposed_gap), gap.verdict]
                for gap in report.class_gaps
            ],
        )
    )
    lines.append("")
    lines.append("## Jensen-Shannon divergence (base 2)")
    lines.append("")
    lines.append(
        markdown_table(
            ["Pair", "Original", "Proposed"],
            [
                [_js_key(pair), fmt(report.original_js[pair], 6), fmt(report.proposed_js[pair], 6)]
                for pair in report.original_js
            ]
            + [["mean", fmt(report.original_mean_js, 6), fmt(report.proposed_mean_js, 6)]],
        )
    )
    lines.append("")
    if report.annotator_spread is not None:
        spread = report.annotator_spread
        lines.append("## Annotator macro F1 without Neutral (%)")
        lines.append("")
        lines.append(
            markdown_table(
                ["Partition"] + [SPLIT_TITLES[s] for s in SPLITS] + ["|Train - Test|"],
                [
                    ["original"]
                    + [fmt(spread.original_macro[s]) for s in SPLITS]
                    + [fmt(spread.original_train_test_gap)],
                    ["proposed"]
                    + [fmt(spread.proposed_macro[s]) for s in SPLITS]
                    + [fmt(spread.proposed_train_test_gap)],
                ],
            )
        )
        lines.append("")
    lines.append(f"improvement: {'yes' if report.improved else 'no'}")
    for notice in report.notices:
        lines.append(f"note: {notice}")
    return "\n".join(lines) + "\n"


def dump_json(payload: Any) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
