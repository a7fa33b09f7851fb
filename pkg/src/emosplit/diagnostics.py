"""Dataset-shift and annotation-quality diagnostics over a partitioned corpus.

Everything here is read-only over immutable inputs: per-split relative label
frequencies, manual-resolution rates, three-way annotator agreement, pooled
or averaged annotator F1, scoring of external prediction files, and
Jensen-Shannon divergence between the splits' label distributions.

Percentages are kept at full precision in the data structures; rendering
rounds to two decimals (half up).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .corpus import (
    CLASS_LABELS,
    Corpus,
    EmosplitError,
    EmotionLabel,
    N_CLASSES,
    UtteranceRecord,
)
from .splitter import SPLITS, Partition, Split


class PartitionCoverageError(EmosplitError):
    """The partition does not assign every corpus dialogue."""


class ProvenanceError(EmosplitError):
    """Annotation provenance (annotator labels or resolution flags) is missing."""


class PredictionError(EmosplitError):
    """A prediction file does not line up with the corpus."""


SPLIT_PAIRS: tuple[tuple[Split, Split], ...] = (
    (Split.TRAIN, Split.DEV),
    (Split.TRAIN, Split.TEST),
    (Split.DEV, Split.TEST),
)


def check_partition_covers(corpus: Corpus, partition: Partition) -> None:
    missing = [d.id for d in corpus.dialogues if d.id not in partition.assignments]
    if missing:
        raise PartitionCoverageError(
            f"partition missing {len(missing)} corpus dialogue(s), e.g. {missing[0]!r}"
        )


def _utterances_by_split(
    corpus: Corpus, partition: Partition
) -> dict[Split, list[UtteranceRecord]]:
    check_partition_covers(corpus, partition)
    grouped: dict[Split, list[UtteranceRecord]] = {split: [] for split in SPLITS}
    for dialogue in corpus.dialogues:
        bucket = grouped[partition.assignments[dialogue.id]]
        bucket.extend(dialogue.user_turns())
    return grouped


def _class_counts(utterances: Iterable[UtteranceRecord]) -> list[int]:
    counts = [0] * N_CLASSES
    for utterance in utterances:
        counts[utterance.emotion.final_label] += 1
    return counts


def relative_frequency(
    corpus: Corpus, partition: Partition
) -> dict[Split, dict[EmotionLabel, float] | None]:
    """Per split, the percentage of user utterances carrying each label.

    A split with no user utterances maps to None (nothing to normalize).
    """
    result: dict[Split, dict[EmotionLabel, float] | None] = {}
    for split, utterances in _utterances_by_split(corpus, partition).items():
        if not utterances:
            result[split] = None
            continue
        counts = _class_counts(utterances)
        total = len(utterances)
        result[split] = {label: 100.0 * counts[label] / total for label in CLASS_LABELS}
    return result


def manual_resolution_rate(
    corpus: Corpus, partition: Partition
) -> dict[Split, dict[EmotionLabel, float | None]]:
    """Per split and class, the percentage of utterances resolved manually.

    Classes absent from a split map to None rather than a fake zero.
    """
    result: dict[Split, dict[EmotionLabel, float | None]] = {}
    for split, utterances in _utterances_by_split(corpus, partition).items():
        totals = [0] * N_CLASSES
        resolved = [0] * N_CLASSES
        for utterance in utterances:
            emotion = utterance.emotion
            if emotion.manually_resolved is None:
                raise ProvenanceError(
                    "annotation provenance unavailable: "
                    f"{utterance.dialogue_id}[{utterance.turn_index}] lacks manually_resolved"
                )
            totals[emotion.final_label] += 1
            if emotion.manually_resolved:
                resolved[emotion.final_label] += 1
        result[split] = {
            label: (100.0 * resolved[label] / totals[label] if totals[label] else None)
            for label in CLASS_LABELS
        }
    return result


@dataclass(frozen=True)
class AgreementStats:
    """Percentages of utterances by three-way annotator agreement level."""

    complete: float
    partial: float
    none: float


def agreement_stats(corpus: Corpus) -> AgreementStats:
    """Whole-corpus quantity; deliberately independent of any partition."""
    n_complete = n_partial = n_none = 0
    total = 0
    for utterance in corpus.user_utterances():
        labels = utterance.emotion.annotator_labels
        if labels is None:
            raise ProvenanceError(
                "annotation provenance unavailable: "
                f"{utterance.dialogue_id}[{utterance.turn_index}] lacks annotator labels"
            )
        total += 1
        distinct = len(set(labels))
        if distinct == 1:
            n_complete += 1
        elif distinct == 2:
            n_partial += 1
        else:
            n_none += 1
    if total == 0:
        raise ProvenanceError("annotation provenance unavailable: corpus has no user utterances")
    return AgreementStats(
        complete=100.0 * n_complete / total,
        partial=100.0 * n_partial / total,
        none=100.0 * n_none / total,
    )


@dataclass(frozen=True)
class ConfusionMatrix:
    """7x7 counts; rows are gold labels, columns are predicted labels."""

    counts: tuple[tuple[int, ...], ...]

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[EmotionLabel, EmotionLabel]]) -> ConfusionMatrix:
        counts = [[0] * N_CLASSES for _ in range(N_CLASSES)]
        for gold, predicted in pairs:
            counts[gold][predicted] += 1
        return cls(tuple(tuple(row) for row in counts))

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    def f1_percent(self, label: EmotionLabel) -> float:
        tp = self.counts[label][label]
        fp = sum(self.counts[row][label] for row in range(N_CLASSES)) - tp
        fn = sum(self.counts[label]) - tp
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        if precision + recall == 0.0:
            return 0.0
        return 100.0 * 2.0 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class F1Report:
    """Per-class F1 percentages plus both macro aggregates.

    The macros are always the unweighted means of the stored per-class
    values, so they can be re-derived from the report itself.
    """

    per_class: tuple[float, ...]
    macro_f1_without_neutral: float
    macro_f1_with_neutral: float
    matrix: ConfusionMatrix

    @property
    def zero_support_classes(self) -> tuple[EmotionLabel, ...]:
        """Classes never gold nor predicted: their 0 is a convention, not a score."""
        return tuple(
            label
            for label in CLASS_LABELS
            if sum(self.matrix.counts[label]) == 0
            and sum(self.matrix.counts[row][label] for row in range(N_CLASSES)) == 0
        )

    @classmethod
    def from_per_class(cls, per_class: Sequence[float], matrix: ConfusionMatrix) -> F1Report:
        per_class = tuple(per_class)
        non_neutral = [per_class[label] for label in CLASS_LABELS if label != EmotionLabel.NEUTRAL]
        return cls(
            per_class=per_class,
            macro_f1_without_neutral=sum(non_neutral) / len(non_neutral),
            macro_f1_with_neutral=sum(per_class) / len(per_class),
            matrix=matrix,
        )

    @classmethod
    def from_matrix(cls, matrix: ConfusionMatrix) -> F1Report:
        return cls.from_per_class([matrix.f1_percent(label) for label in CLASS_LABELS], matrix)


POOLING_MODES = ("pooled", "averaged")


def annotator_f1(
    corpus: Corpus, partition: Partition, pooling: str = "pooled"
) -> dict[Split, F1Report]:
    """Score the three annotators against the final labels, per split.

    pooled: all three annotators' labels form one prediction multiset, so
    every utterance contributes three scored pairs to a single matrix.
    averaged: per-class F1 is computed per annotator and averaged; the
    attached matrix is still the pooled one (totals stay comparable).
    """
    if pooling not in POOLING_MODES:
        raise ValueError(f"pooling must be one of {POOLING_MODES}, got {pooling!r}")

    reports: dict[Split, F1Report] = {}
    for split, utterances in _utterances_by_split(corpus, partition).items():
        pooled_pairs: list[tuple[EmotionLabel, EmotionLabel]] = []
        per_annotator_pairs: tuple[list, list, list] = ([], [], [])
        for utterance in utterances:
            emotion = utterance.emotion
            if emotion.annotator_labels is None:
                raise ProvenanceError(
                    "annotation provenance unavailable: "
                    f"{utterance.dialogue_id}[{utterance.turn_index}] lacks annotator labels"
                )
            for position, annotator_label in enumerate(emotion.annotator_labels):
                pooled_pairs.append((emotion.final_label, annotator_label))
                per_annotator_pairs[position].append((emotion.final_label, annotator_label))

        pooled_matrix = ConfusionMatrix.from_pairs(pooled_pairs)
        if pooling == "pooled":
            reports[split] = F1Report.from_matrix(pooled_matrix)
        else:
            matrices = [ConfusionMatrix.from_pairs(pairs) for pairs in per_annotator_pairs]
            averaged = [
                sum(m.f1_percent(label) for m in matrices) / len(matrices)
                for label in CLASS_LABELS
            ]
            reports[split] = F1Report.from_per_class(averaged, pooled_matrix)
    return reports


PredictionKey = tuple[str, int]


def parse_predictions(raw_text: str) -> dict[PredictionKey, EmotionLabel]:
    """Parse a JSON-Lines prediction file: one object per user utterance."""
    predictions: dict[PredictionKey, EmotionLabel] = {}
    for line_number, line in enumerate(raw_text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise PredictionError(f"line {line_number}: malformed JSON: {exc}") from None
        if not isinstance(record, dict):
            raise PredictionError(f"line {line_number}: expected an object")
        try:
            dialogue_id = record["dialogue_id"]
            index = record["index"]
            label = record["label"]
        except KeyError as exc:
            raise PredictionError(f"line {line_number}: missing key {exc}") from None
        if not isinstance(dialogue_id, str) or not isinstance(index, int):
            raise PredictionError(f"line {line_number}: bad dialogue_id/index types")
        try:
            parsed = EmotionLabel(label)
        except ValueError:
            raise PredictionError(f"line {line_number}: label out of range: {label}") from None
        key = (dialogue_id, index)
        if key in predictions:
            raise PredictionError(f"line {line_number}: duplicate prediction for {key}")
        predictions[key] = parsed
    return predictions


@dataclass(frozen=True)
class PredictionEvaluation:
    per_split: dict[Split, F1Report]
    dev_minus_test_without_neutral: float | None
    dev_minus_test_with_neutral: float | None


def evaluate_predictions(
    predictions: Mapping[PredictionKey, EmotionLabel | int],
    corpus: Corpus,
    partition: Partition,
) -> PredictionEvaluation:
    """Score an external prediction set against the final labels, per split."""
    expected_keys = {
        (utterance.dialogue_id, utterance.turn_index) for utterance in corpus.user_utterances()
    }
    provided_keys = set(predictions)
    missing = expected_keys - provided_keys
    if missing:
        example = sorted(missing)[0]
        raise PredictionError(f"missing prediction for {len(missing)} utterance(s), e.g. {example}")
    extra = provided_keys - expected_keys
    if extra:
        example = sorted(extra)[0]
        raise PredictionError(f"prediction for unknown utterance(s), e.g. {example}")

    per_split: dict[Split, F1Report] = {}
    scored: dict[Split, int] = {}
    for split, utterances in _utterances_by_split(corpus, partition).items():
        pairs = []
        for utterance in utterances:
            raw = predictions[(utterance.dialogue_id, utterance.turn_index)]
            try:
                predicted = EmotionLabel(raw)
            except ValueError:
                raise PredictionError(
                    f"label out of range for {(utterance.dialogue_id, utterance.turn_index)}: {raw}"
                ) from None
            pairs.append((utterance.emotion.final_label, predicted))
        per_split[split] = F1Report.from_matrix(ConfusionMatrix.from_pairs(pairs))
        scored[split] = len(pairs)

    def gap(selector) -> float | None:
        if scored[Split.DEV] == 0 or scored[Split.TEST] == 0:
            return None
        return selector(per_split[Split.DEV]) - selector(per_split[Split.TEST])

    return PredictionEvaluation(
        per_split=per_split,
        dev_minus_test_without_neutral=gap(lambda r: r.macro_f1_without_neutral),
        dev_minus_test_with_neutral=gap(lambda r: r.macro_f1_with_neutral),
    )


def js_divergence(p: Sequence[float], q: Sequence[float]) -> float:
    """Jensen-Shannon divergence with base-2 logarithm; lies in [0, 1]."""
    if len(p) != len(q):
        raise ValueError("distributions must have equal length")
    kl_p = kl_q = 0.0
    for p_i, q_i in zip(p, q):
        mixture = 0.5 * (p_i + q_i)
        if p_i > 0.0:
            kl_p += p_i * math.log2(p_i / mixture)
        if q_i > 0.0:
            kl_q += q_i * math.log2(q_i / mixture)
    # Mathematically >= 0; clamp float noise for near-identical inputs.
    return max(0.0, 0.5 * kl_p + 0.5 * kl_q)


def _distribution(counts: Sequence[int]) -> list[float] | None:
    total = sum(counts)
    if total == 0:
        return None
    return [count / total for count in counts]


def shift_divergence(
    corpus: Corpus, partition: Partition
) -> dict[tuple[Split, Split], float | None]:
    """JS divergence between the 7-class distributions of each split pair."""
    grouped = _utterances_by_split(corpus, partition)
    distributions = {
        split: _distribution(_class_counts(utterances)) for split, utterances in grouped.items()
    }
    result: dict[tuple[Split, Split], float | None] = {}
    for a, b in SPLIT_PAIRS:
        if distributions[a] is None or distributions[b] is None:
            result[(a, b)] = None
        else:
            result[(a, b)] = js_divergence(distributions[a], distributions[b])
    return result


def max_gap_per_class(
    frequencies: Mapping[Split, Mapping[EmotionLabel, float] | None],
) -> dict[EmotionLabel, float | None]:
    """Largest pairwise relative-frequency difference across non-empty splits."""
    present = [freq for freq in frequencies.values() if freq is not None]
    gaps: dict[EmotionLabel, float | None] = {}
    for label in CLASS_LABELS:
        if len(present) < 2:
            gaps[label] = None
        else:
            values = [freq[label] for freq in present]
            gaps[label] = max(values) - min(values)
    return gaps


@dataclass(frozen=True)
class ShiftReport:
    """Bundle of the distributional diagnostics for one partition."""

    relative_frequency: dict[Split, dict[EmotionLabel, float] | None]
    manual_resolution: dict[Split, dict[EmotionLabel, float | None]] | None
    max_gap_per_class: dict[EmotionLabel, float | None]
    js_divergence: dict[tuple[Split, Split], float | None]
    agreement: AgreementStats | None
    notices: tuple[str, ...]


def build_shift_report(corpus: Corpus, partition: Partition) -> ShiftReport:
    """Assemble every distributional diagnostic, degrading gracefully.

    Sections that need per-annotator labels or resolution flags are replaced
    by an explicit notice when the corpus does not carry them.
    """
    notices: list[str] = []
    frequencies = relative_frequency(corpus, partition)

    manual: dict[Split, dict[EmotionLabel, float | None]] | None
    try:
        manual = manual_resolution_rate(corpus, partition)
    except ProvenanceError as exc:
        manual = None
        notices.append(f"manual-resolution section unavailable: {exc}")

    agreement: AgreementStats | None
    try:
        agreement = agreement_stats(corpus)
    except ProvenanceError as exc:
        agreement = None
        notices.append(f"agreement section unavailable: {exc}")

    return ShiftReport(
        relative_frequency=frequencies,
        manual_resolution=manual,
        max_gap_per_class=max_gap_per_class(frequencies),
        js_divergence=shift_divergence(corpus, partition),
        agreement=agreement,
        notices=tuple(notices),
    )


def _mean_defined(values: Iterable[float | None]) -> float | None:
    defined = [value for value in values if value is not None]
    if not defined:
        return None
    return sum(defined) / len(defined)


@dataclass(frozen=True)
class ClassGapComparison:
    label: EmotionLabel
    original_gap: float | None
    proposed_gap: float | None

    @property
    def verdict(self) -> str:
        if self.original_gap is None or self.proposed_gap is None:
            return "undefined"
        if self.proposed_gap < self.original_gap:
            return "improved"
        if self.proposed_gap > self.original_gap:
            return "regressed"
        return "unchanged"


@dataclass(frozen=True)
class AnnotatorSpread:
    """Macro-F1 (without Neutral) per split, and the train-vs-test gap."""

    original_macro: dict[Split, float]
    proposed_macro: dict[Split, float]

    @property
    def original_train_test_gap(self) -> float:
        return abs(self.original_macro[Split.TRAIN] - self.original_macro[Split.TEST])

    @property
    def proposed_train_test_gap(self) -> float:
        return abs(self.proposed_macro[Split.TRAIN] - self.proposed_macro[Split.TEST])


@dataclass(frozen=True)
class ComparisonReport:
    class_gaps: tuple[ClassGapComparison, ...]
    original_js: dict[tuple[Split, Split], float | None]
    proposed_js: dict[tuple[Split, Split], float | None]
    original_mean_js: float | None
    proposed_mean_js: float | None
    annotator_spread: AnnotatorSpread | None
    notices: tuple[str, ...]

    @property
    def improved(self) -> bool:
        """At most one class may widen its gap, mean JS must not increase,
        and something must get strictly better (ties alone are no improvement)."""
        comparable = [c for c in self.class_gaps if c.verdict != "undefined"]
        if len(comparable) < N_CLASSES:
            return False
        not_worse = sum(1 for c in comparable if c.proposed_gap <= c.original_gap)
        if not_worse < N_CLASSES - 1:
            return False
        if self.original_mean_js is None or self.proposed_mean_js is None:
            return False
        if self.proposed_mean_js > self.original_mean_js:
            return False
        strictly_better = self.proposed_mean_js < self.original_mean_js or any(
            c.verdict == "improved" for c in comparable
        )
        return strictly_better


def compare_partitions(
    corpus: Corpus, original: Partition, proposed: Partition
) -> ComparisonReport:
    """Side-by-side dataset-shift diagnostics for two partitions of one corpus."""
    notices: list[str] = []
    original_freq = relative_frequency(corpus, original)
    proposed_freq = relative_frequency(corpus, proposed)
    original_gaps = max_gap_per_class(original_freq)
    proposed_gaps = max_gap_per_class(proposed_freq)

    class_gaps = tuple(
        ClassGapComparison(label, original_gaps[label], proposed_gaps[label])
        for label in CLASS_LABELS
    )

    original_js = shift_divergence(corpus, original)
    proposed_js = shift_divergence(corpus, proposed)

    spread: AnnotatorSpread | None
    try:
        original_f1 = annotator_f1(corpus, original)
        proposed_f1 = annotator_f1(corpus, proposed)
        spread = AnnotatorSpread(
            original_macro={
                split: report.macro_f1_without_neutral for split, report in original_f1.items()
            },
            proposed_macro={
                split: report.macro_f1_without_neutral for split, report in proposed_f1.items()
            },
        )
    except ProvenanceError as exc:
        spread = None
        notices.append(f"annotator-F1 spread unavailable: {exc}")

    return ComparisonReport(
        class_gaps=class_gaps,
        original_js=original_js,
        proposed_js=proposed_js,
        original_mean_js=_mean_defined(original_js.values()),
        proposed_mean_js=_mean_defined(proposed_js.values()),
        annotator_spread=spread,
        notices=tuple(notices),
    )
