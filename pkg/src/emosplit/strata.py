"""Emotion-sequence strata: per-dialogue label sequences and their frequencies.

The stratum key of a dialogue is the ordered tuple of final emotion labels
over its user turns. Dialogues whose sequence occurs in more than
``threshold`` conversations corpus-wide form the frequent stratum pool; the
remainder are pooled for plain random splitting.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Corpus, Dialogue, EmosplitError, EmotionLabel

EmotionSequence = tuple[EmotionLabel, ...]

DEFAULT_FREQUENCY_THRESHOLD = 6


class StrataError(EmosplitError):
    """Frequency table and corpus disagree."""


def emotion_sequence(dialogue: Dialogue) -> EmotionSequence:
    """Final labels of the dialogue's user turns, in increasing turn order."""
    user_turns = sorted(dialogue.user_turns(), key=lambda t: t.turn_index)
    return tuple(t.emotion.final_label for t in user_turns)


def sequence_to_str(sequence: EmotionSequence) -> str:
    """Dash-joined label codes, e.g. ``(0, 0, 6)`` -> ``"0-0-6"``."""
    return "-".join(str(int(label)) for label in sequence)


def sequence_from_str(text: str) -> EmotionSequence:
    try:
        return tuple(EmotionLabel(int(part)) for part in text.split("-"))
    except ValueError as exc:
        raise StrataError(f"bad sequence string {text!r}: {exc}") from None


@dataclass(frozen=True)
class FrequencyTable:
    """Counts of each emotion sequence over a whole corpus."""

    entries: dict[EmotionSequence, int]
    total: int


def build_frequency_table(corpus: Corpus) -> FrequencyTable:
    entries: dict[EmotionSequence, int] = {}
    for dialogue in corpus.dialogues:
        key = emotion_sequence(dialogue)
        entries[key] = entries.get(key, 0) + 1
    return FrequencyTable(entries, total=len(corpus.dialogues))


@dataclass(frozen=True)
class StrataSplit:
    """Dialogue ids separated into frequent and pooled (non-frequent) sets."""

    frequent: frozenset[str]
    non_frequent: frozenset[str]
    threshold: int


def split_by_frequency(
    corpus: Corpus, table: FrequencyTable, threshold: int = DEFAULT_FREQUENCY_THRESHOLD
) -> StrataSplit:
    """Frequent means the dialogue's sequence count is strictly above ``threshold``."""
    if threshold < 0:
        raise ValueError(f"threshold must be >= 0, got {threshold}")
    frequent: set[str] = set()
    non_frequent: set[str] = set()
    for dialogue in corpus.dialogues:
        key = emotion_sequence(dialogue)
        count = table.entries.get(key)
        if count is None:
            raise StrataError(
                f"sequence {sequence_to_str(key)} of dialogue {dialogue.id!r} is unknown "
                "to the frequency table (table built from a different corpus?)"
            )
        if count > threshold:
            frequent.add(dialogue.id)
        else:
            non_frequent.add(dialogue.id)
    return StrataSplit(frozenset(frequent), frozenset(non_frequent), threshold)


def frequency_table_to_csv(table: FrequencyTable) -> str:
    """CSV export with columns ``sequence,count``, rows in lexicographic key order."""
    lines = ["sequence,count"]
    for key in sorted(table.entries):
        lines.append(f"{sequence_to_str(key)},{table.entries[key]}")
    return "\n".join(lines) + "\n"
