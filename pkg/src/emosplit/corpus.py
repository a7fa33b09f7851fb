"""Domain model and canonical-format I/O for emotion-annotated dialogue corpora.

A corpus is an ordered collection of dialogues; each dialogue is an ordered
list of turns alternating between a user and a system speaker. Only user
turns carry an emotion annotation: a final 7-class label, optionally the
three per-annotator labels, and optionally a flag marking manual resolution
of the final label.

The canonical on-disk format is JSON:

    {
      "source": "<provenance string>",
      "dialogues": [
        {
          "dialogue_id": "<id>",
          "turns": [
            {"index": 0, "speaker": "user", "text": "...",
             "emotion": {"final": 0,
                         "annotations": [0, 0, 1],        # optional
                         "manually_resolved": false}},    # optional
            {"index": 1, "speaker": "system", "text": "..."}
          ]
        }
      ]
    }

Utterance text is opaque payload; nothing in this package inspects it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum, IntEnum
from functools import cached_property
from typing import Any, Iterator


class EmosplitError(Exception):
    """Base class for all errors raised by this package."""


class CorpusFormatError(EmosplitError):
    """A document does not conform to the canonical corpus schema."""


class EmotionLabel(IntEnum):
    """The 7-class emotion scheme used for user turns."""

    NEUTRAL = 0
    FEARFUL = 1
    DISSATISFIED = 2
    APOLOGETIC = 3
    ABUSIVE = 4
    EXCITED = 5
    SATISFIED = 6

    @property
    def display_name(self) -> str:
        return self.name.capitalize()


CLASS_LABELS: tuple[EmotionLabel, ...] = tuple(EmotionLabel)
N_CLASSES = len(CLASS_LABELS)


class Speaker(Enum):
    USER = "user"
    SYSTEM = "system"


@dataclass(frozen=True)
class EmotionAnnotation:
    """Final emotion label plus optional annotation provenance."""

    final_label: EmotionLabel
    annotator_labels: tuple[EmotionLabel, EmotionLabel, EmotionLabel] | None = None
    manually_resolved: bool | None = None

    def __post_init__(self) -> None:
        if self.annotator_labels is not None and len(self.annotator_labels) != 3:
            raise ValueError(
                f"annotator_labels must have exactly 3 entries, got {len(self.annotator_labels)}"
            )


@dataclass(frozen=True)
class UtteranceRecord:
    dialogue_id: str
    turn_index: int
    speaker: Speaker
    text: str | None = None
    emotion: EmotionAnnotation | None = None


@dataclass(frozen=True)
class Dialogue:
    id: str
    turns: tuple[UtteranceRecord, ...]

    def user_turns(self) -> tuple[UtteranceRecord, ...]:
        return tuple(t for t in self.turns if t.speaker is Speaker.USER)


@dataclass(frozen=True)
class Corpus:
    """Immutable after construction; safe for concurrent readers."""

    dialogues: tuple[Dialogue, ...]
    source_label: str = ""

    def __len__(self) -> int:
        return len(self.dialogues)

    @cached_property
    def by_id(self) -> dict[str, Dialogue]:
        return {d.id: d for d in self.dialogues}

    @cached_property
    def user_turn_count(self) -> int:
        return sum(len(d.user_turns()) for d in self.dialogues)

    def user_utterances(self) -> Iterator[UtteranceRecord]:
        for dialogue in self.dialogues:
            for turn in dialogue.turns:
                if turn.speaker is Speaker.USER:
                    yield turn


@dataclass(frozen=True)
class Violation:
    """One structural rule violation found by :func:`validate`."""

    rule: str
    dialogue_id: str | None = None
    turn_index: int | None = None
    message: str = ""

    def describe(self) -> str:
        where = self.dialogue_id if self.dialogue_id is not None else "<corpus>"
        if self.turn_index is not None:
            where = f"{where}[{self.turn_index}]"
        return f"{where}: {self.rule}: {self.message}"


def validate(corpus: Corpus) -> list[Violation]:
    """Check every structural invariant; violations are data, not failures."""
    violations: list[Violation] = []
    seen_ids: set[str] = set()

    for dialogue in corpus.dialogues:
        if dialogue.id in seen_ids:
            violations.append(
                Violation("duplicate-dialogue-id", dialogue.id, message="id occurs more than once")
            )
        seen_ids.add(dialogue.id)

        previous_index: int | None = None
        has_user_turn = False
        for turn in dialogue.turns:
            if turn.dialogue_id != dialogue.id:
                violations.append(
                    Violation(
                        "turn-dialogue-id-mismatch",
                        dialogue.id,
                        turn.turn_index,
                        f"turn carries dialogue_id {turn.dialogue_id!r}",
                    )
                )
            if previous_index is not None and turn.turn_index <= previous_index:
                violations.append(
                    Violation(
                        "turn-index-not-increasing",
                        dialogue.id,
                        turn.turn_index,
                        f"index {turn.turn_index} follows {previous_index}",
                    )
                )
            previous_index = turn.turn_index

            if turn.speaker is Speaker.USER:
                has_user_turn = True
                if turn.emotion is None:
                    violations.append(
                        Violation(
                            "user-turn-without-emotion",
                            dialogue.id,
                            turn.turn_index,
                            "user turns must carry an emotion annotation",
                        )
                    )
            elif turn.emotion is not None:
                violations.append(
                    Violation(
                        "system-turn-with-emotion",
                        dialogue.id,
                        turn.turn_index,
                        "system turns must not carry an emotion annotation",
                    )
                )

        if not has_user_turn:
            violations.append(
                Violation("no-user-turn", dialogue.id, message="dialogue has no user turn")
            )

    # Recount through a different path than the cached aggregate.
    recount = sum(1 for _ in corpus.user_utterances())
    if recount != corpus.user_turn_count:
        violations.append(
            Violation(
                "user-turn-count-mismatch",
                message=f"aggregated {corpus.user_turn_count}, recounted {recount}",
            )
        )

    return violations


def _expect(condition: bool, message: str) -> None:
    if not condition:
        raise CorpusFormatError(message)


_LABEL_BY_CODE = {int(label): label for label in EmotionLabel}


def _label_from_code(code: Any, dialogue_id: str, position: int) -> EmotionLabel:
    # bool is an int subclass; JSON true/false must not alias labels 1/0.
    if type(code) is int:
        label = _LABEL_BY_CODE.get(code)
        if label is not None:
            return label
        raise CorpusFormatError(
            f"dialogue {dialogue_id!r} turn #{position}: label out of range: {code} (expected 0..6)"
        )
    raise CorpusFormatError(
        f"dialogue {dialogue_id!r} turn #{position}: labels must be integers, got {code!r}"
    )


def _parse_emotion(obj: Any, dialogue_id: str, position: int) -> EmotionAnnotation:
    if not isinstance(obj, dict) or "final" not in obj:
        raise CorpusFormatError(
            f"dialogue {dialogue_id!r} turn #{position}: emotion must be an object with 'final'"
        )
    final_label = _label_from_code(obj["final"], dialogue_id, position)

    annotators = None
    raw = obj.get("annotations")
    if raw is not None:
        if not isinstance(raw, list) or len(raw) != 3:
            raise CorpusFormatError(
                f"dialogue {dialogue_id!r} turn #{position}: "
                "'annotations' must be a list of exactly 3 labels"
            )
        annotators = tuple(_label_from_code(value, dialogue_id, position) for value in raw)

    resolved = obj.get("manually_resolved")
    if resolved is not None and not isinstance(resolved, bool):
        raise CorpusFormatError(
            f"dialogue {dialogue_id!r} turn #{position}: 'manually_resolved' must be a boolean"
        )

    return EmotionAnnotation(final_label, annotators, resolved)


def _parse_turn(obj: Any, dialogue_id: str, position: int) -> UtteranceRecord:
    if not isinstance(obj, dict):
        raise CorpusFormatError(f"dialogue {dialogue_id!r} turn #{position}: turn must be an object")
    index = obj.get("index")
    if type(index) is not int or index < 0:
        raise CorpusFormatError(
            f"dialogue {dialogue_id!r} turn #{position}: 'index' must be a non-negative integer"
        )
    text = obj.get("text")
    if text is not None and not isinstance(text, str):
        raise CorpusFormatError(f"dialogue {dialogue_id!r} turn #{position}: 'text' must be a string")

    speaker_raw = obj.get("speaker")
    raw_emotion = obj.get("emotion")
    if speaker_raw == "user":
        if raw_emotion is None:
            raise CorpusFormatError(
                f"dialogue {dialogue_id!r} turn #{position}: user turn without emotion"
            )
        emotion = _parse_emotion(raw_emotion, dialogue_id, position)
        return UtteranceRecord(dialogue_id, index, Speaker.USER, text, emotion)
    if speaker_raw == "system":
        if raw_emotion is not None:
            raise CorpusFormatError(
                f"dialogue {dialogue_id!r} turn #{position}: system turn with emotion"
            )
        return UtteranceRecord(dialogue_id, index, Speaker.SYSTEM, text, None)
    raise CorpusFormatError(
        f"dialogue {dialogue_id!r} turn #{position}: 'speaker' must be 'user' or 'system'"
    )


def parse_canonical(raw_text: str) -> Corpus:
    """Parse a canonical corpus document, raising on any schema violation."""
    try:
        document = json.loads(raw_text)
    except json.JSONDecodeError as exc:
        raise CorpusFormatError(f"malformed document: {exc}") from None

    _expect(isinstance(document, dict), "malformed document: top level must be an object")
    source = document.get("source")
    _expect(isinstance(source, str), "'source' must be a string")
    raw_dialogues = document.get("dialogues")
    _expect(isinstance(raw_dialogues, list), "'dialogues' must be a list")

    dialogues: list[Dialogue] = []
    seen: set[str] = set()
    for entry in raw_dialogues:
        _expect(isinstance(entry, dict), "dialogue entries must be objects")
        dialogue_id = entry.get("dialogue_id")
        _expect(isinstance(dialogue_id, str) and dialogue_id, "'dialogue_id' must be a non-empty string")
        if dialogue_id in seen:
            raise CorpusFormatError(f"duplicate dialogue id: {dialogue_id!r}")
        seen.add(dialogue_id)

        raw_turns = entry.get("turns")
        _expect(isinstance(raw_turns, list), f"dialogue {dialogue_id!r}: 'turns' must be a list")
        turns = tuple(_parse_turn(t, dialogue_id, i) for i, t in enumerate(raw_turns))
        dialogues.append(Dialogue(dialogue_id, turns))

    corpus = Corpus(tuple(dialogues), source_label=source)
    violations = validate(corpus)
    if violations:
        details = "; ".join(v.describe() for v in violations[:5])
        raise CorpusFormatError(f"document violates corpus invariants: {details}")
    return corpus


def _emotion_to_dict(emotion: EmotionAnnotation) -> dict[str, Any]:
    payload: dict[str, Any] = {"final": int(emotion.final_label)}
    if emotion.annotator_labels is not None:
        payload["annotations"] = [int(label) for label in emotion.annotator_labels]
    if emotion.manually_resolved is not None:
        payload["manually_resolved"] = emotion.manually_resolved
    return payload


def serialize_canonical(corpus: Corpus) -> str:
    """Render a corpus back to the canonical JSON document (stable layout)."""
    document = {
        "source": corpus.source_label,
        "dialogues": [
            {
                "dialogue_id": dialogue.id,
                "turns": [
                    {
                        "index": turn.turn_index,
                        "speaker": turn.speaker.value,
                        **({"text": turn.text} if turn.text is not None else {}),
                        **(
                            {"emotion": _emotion_to_dict(turn.emotion)}
                            if turn.emotion is not None
                            else {}
                        ),
                    }
                    for turn in dialogue.turns
                ],
            }
            for dialogue in corpus.dialogues
        ],
    }
    return json.dumps(document, indent=2, ensure_ascii=False) + "\n"
