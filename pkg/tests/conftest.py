"""Shared corpus builders for the test suite.

Synthetic corpora are built with the stdlib Random (test-side randomness
only; the package's own PRNG is under test and never used here).
"""

from __future__ import annotations

import random

import pytest

from emosplit import (
    Corpus,
    Dialogue,
    EmotionAnnotation,
    EmotionLabel,
    Partition,
    PartitionMeta,
    Speaker,
    Split,
    UtteranceRecord,
)

# Heavily imbalanced class weights resembling a task-oriented dialogue corpus.
REALISTIC_WEIGHTS = [0.719, 0.006, 0.013, 0.010, 0.0007, 0.010, 0.2413]


def user_turn(
    dialogue_id: str,
    index: int,
    label: int,
    annotators: tuple[int, int, int] | None = None,
    resolved: bool | None = None,
    text: str | None = None,
) -> UtteranceRecord:
    annotation = EmotionAnnotation(
        final_label=EmotionLabel(label),
        annotator_labels=(
            tuple(EmotionLabel(a) for a in annotators) if annotators is not None else None
        ),
        manually_resolved=resolved,
    )
    return UtteranceRecord(dialogue_id, index, Speaker.USER, text, annotation)


def system_turn(dialogue_id: str, index: int, text: str | None = None) -> UtteranceRecord:
    return UtteranceRecord(dialogue_id, index, Speaker.SYSTEM, text, None)


def build_dialogue(
    dialogue_id: str,
    user_labels: list[int],
    annotators: list[tuple[int, int, int]] | None = None,
    resolved: list[bool] | None = None,
) -> Dialogue:
    """User turns at even indices, a system turn after each."""
    turns = []
    for i, label in enumerate(user_labels):
        turns.append(
            user_turn(
                dialogue_id,
                2 * i,
                label,
                annotators[i] if annotators is not None else None,
                resolved[i] if resolved is not None else None,
            )
        )
        turns.append(system_turn(dialogue_id, 2 * i + 1))
    return Dialogue(dialogue_id, tuple(turns))


def build_corpus(user_labels_by_id: dict[str, list[int]], source: str = "test") -> Corpus:
    dialogues = tuple(
        build_dialogue(dialogue_id, labels) for dialogue_id, labels in user_labels_by_id.items()
    )
    return Corpus(dialogues, source_label=source)


def manual_partition(assignments: dict[str, Split]) -> Partition:
    metadata = PartitionMeta(seed=None, ratios=None, threshold=None, method="manual")
    return Partition(dict(assignments), metadata)


def _draw_annotators(
    rng: random.Random, final: int
) -> tuple[tuple[int, int, int], bool]:
    roll = rng.random()
    if roll < 0.72:
        return (final, final, final), False
    others = [l for l in range(7) if l != final]
    if roll < 0.985:
        other = rng.choice(others)
        labels = [final, final, other]
        rng.shuffle(labels)
        return tuple(labels), rng.random() < 0.3
    second = rng.choice(others)
    third = rng.choice([l for l in others if l != second])
    labels = [final, second, third]
    rng.shuffle(labels)
    return tuple(labels), True


def synthetic_corpus(
    n_dialogues: int,
    seed: int = 0,
    with_annotations: bool = False,
    weights: list[float] = REALISTIC_WEIGHTS,
    max_user_turns: int = 8,
) -> Corpus:
    rng = random.Random(seed)
    dialogues = []
    for i in range(n_dialogues):
        n_user = rng.randint(1, max_user_turns)
        labels = [int(l) for l in rng.choices(range(7), weights=weights, k=n_user)]
        if with_annotations:
            annotators, resolved = [], []
            for label in labels:
                three, was_resolved = _draw_annotators(rng, label)
                annotators.append(three)
                resolved.append(was_resolved)
            dialogues.append(build_dialogue(f"dlg{i:05d}", labels, annotators, resolved))
        else:
            dialogues.append(build_dialogue(f"dlg{i:05d}", labels))
    return Corpus(tuple(dialogues), source_label=f"synthetic-{seed}")


def skewed_partition(corpus: Corpus, ratios=(0.8, 0.1, 0.1)) -> Partition:
    """Deliberately shift-inducing split: minority-label dialogues go to train first."""

    def minority_score(dialogue: Dialogue) -> int:
        return sum(
            1
            for turn in dialogue.user_turns()
            if turn.emotion.final_label
            not in (EmotionLabel.NEUTRAL, EmotionLabel.SATISFIED)
        )

    ordered = sorted(corpus.dialogues, key=lambda d: (-minority_score(d), d.id))
    n = len(ordered)
    n_train = int(n * ratios[0])
    n_dev = int(n * ratios[1])
    assignments = {}
    for position, dialogue in enumerate(ordered):
        if position < n_train:
            assignments[dialogue.id] = Split.TRAIN
        elif position < n_train + n_dev:
            assignments[dialogue.id] = Split.DEV
        else:
            assignments[dialogue.id] = Split.TEST
    return manual_partition(assignments)


@pytest.fixture
def tally_corpus() -> Corpus:
    """Five dialogues with hand-tallied class counts.

    Labels per dialogue: d1 [0,6], d2 [0], d3 [2,2,0], d4 [1,4,5], d5 [6,6,3,0].
    Hand tally: 13 user turns; class counts 0:4, 1:1, 2:2, 3:1, 4:1, 5:1, 6:3.
    """
    return build_corpus(
        {
            "d1": [0, 6],
            "d2": [0],
            "d3": [2, 2, 0],
            "d4": [1, 4, 5],
            "d5": [6, 6, 3, 0],
        }
    )
