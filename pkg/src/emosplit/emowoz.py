"""Adapter for EmoWOZ-release dialogue files.

Two published layouts are accepted:

* mapping layout: ``{"<dialogue_id>": {"log": [<turn>, ...]}, ...}``
* record layout: ``[{"dialogue_id": "<id>", "log": [<turn>, ...]}, ...]``

Each log entry is ``{"text": <str>, "emotion": <value>}`` where the emotion
value is either a bare integer or an object carrying an ``"emotion"`` key.
Turns alternate user/system starting with the user (MultiWOZ convention):
even positions must carry a label in 0..6, odd positions must carry the
no-emotion sentinel -1 (or no emotion at all). Anything else is treated as
a schema mismatch and rejected rather than coerced.

Split lists are the upstream one-id-per-line files naming the dev and test
dialogues; ids in neither list belong to the training set. A trailing
``.json`` suffix difference between list entries and corpus ids is
tolerated, since the upstream MultiWOZ list files carry the suffix while
EmoWOZ dialogue keys do not.
"""

from __future__ import annotations

import json
from typing import Any, Iterable, Mapping

from ._version import __version__
from .corpus import (
    Corpus,
    CorpusFormatError,
    Dialogue,
    EmosplitError,
    EmotionAnnotation,
    EmotionLabel,
    Speaker,
    UtteranceRecord,
    validate,
)
from .splitter import UPSTREAM_METHOD_NAME, Partition, PartitionMeta, Split

NO_EMOTION_SENTINEL = -1


class EmowozFormatError(EmosplitError):
    """Input does not look like a published EmoWOZ layout."""


def _emotion_code(value: Any, where: str) -> int | None:
    if value is None:
        return None
    if isinstance(value, bool):
        raise EmowozFormatError(f"{where}: emotion value must be an integer, got a boolean")
    if isinstance(value, int):
        return value
    if isinstance(value, dict):
        if "emotion" not in value:
            raise EmowozFormatError(f"{where}: emotion object lacks an 'emotion' key")
        return _emotion_code(value["emotion"], where)
    raise EmowozFormatError(f"{where}: unrecognized emotion value {value!r}")


def _adapt_dialogue(dialogue_id: str, payload: Any) -> Dialogue:
    where = f"dialogue {dialogue_id!r}"
    if not isinstance(payload, dict) or "log" not in payload:
        raise EmowozFormatError(f"{where}: expected an object with a 'log' list")
    log = payload["log"]
    if not isinstance(log, list) or not log:
        raise EmowozFormatError(f"{where}: 'log' must be a non-empty list")

    turns = []
    for position, entry in enumerate(log):
        turn_where = f"{where} log[{position}]"
        if not isinstance(entry, dict):
            raise EmowozFormatError(f"{turn_where}: turn must be an object")
        text = entry.get("text")
        if text is not None and not isinstance(text, str):
            raise EmowozFormatError(f"{turn_where}: 'text' must be a string")
        code = _emotion_code(entry.get("emotion"), turn_where)

        is_user_turn = position % 2 == 0
        if is_user_turn:
            if code is None or code == NO_EMOTION_SENTINEL:
                raise EmowozFormatError(
                    f"{turn_where}: user turn carries no emotion label (got {code!r})"
                )
            try:
                label = EmotionLabel(code)
            except ValueError:
                raise EmowozFormatError(
                    f"{turn_where}: emotion label out of range: {code}"
                ) from None
            emotion = EmotionAnnotation(final_label=label)
            speaker = Speaker.USER
        else:
            if code is not None and code != NO_EMOTION_SENTINEL:
                raise EmowozFormatError(
                    f"{turn_where}: system turn carries emotion label {code}"
                )
            emotion = None
            speaker = Speaker.SYSTEM

        turns.append(UtteranceRecord(dialogue_id, position, speaker, text, emotion))
    return Dialogue(dialogue_id, tuple(turns))


def _iter_dialogues(document: Any) -> Iterable[tuple[str, Any]]:
    if isinstance(document, dict):
        for dialogue_id, payload in document.items():
            yield dialogue_id, payload
    elif isinstance(document, list):
        for position, entry in enumerate(document):
            if not isinstance(entry, dict) or "dialogue_id" not in entry:
                raise EmowozFormatError(
                    f"record #{position}: expected an object with a 'dialogue_id' key"
                )
            yield entry["dialogue_id"], entry
    else:
        raise EmowozFormatError("top level must be a dialogue mapping or a record list")


def _resolve_listed_id(raw_id: str, known: set[str], list_name: str) -> str:
    if raw_id in known:
        return raw_id
    if raw_id.endswith(".json") and raw_id[:-5] in known:
        return raw_id[:-5]
    if raw_id + ".json" in known:
        return raw_id + ".json"
    raise EmowozFormatError(f"{list_name} list names {raw_id!r}, which is not in the corpus")


def _partition_from_lists(
    corpus: Corpus, split_lists: Mapping[str, Iterable[str]]
) -> Partition:
    unknown = set(split_lists) - {"dev", "test"}
    if unknown:
        raise EmowozFormatError(f"unknown split list names: {sorted(unknown)}")
    known = set(corpus.by_id)

    assignments = {dialogue_id: Split.TRAIN for dialogue_id in known}
    seen_dev: set[str] = set()
    for raw_id in split_lists.get("dev", ()):
        raw_id = raw_id.strip()
        if not raw_id:
            continue
        seen_dev.add(_resolve_listed_id(raw_id, known, "dev"))
    for raw_id in split_lists.get("test", ()):
        raw_id = raw_id.strip()
        if not raw_id:
            continue
        resolved = _resolve_listed_id(raw_id, known, "test")
        if resolved in seen_dev:
            raise EmowozFormatError(f"dialogue id {resolved!r} is in both dev and test lists")
        assignments[resolved] = Split.TEST
    for dialogue_id in seen_dev:
        assignments[dialogue_id] = Split.DEV

    metadata = PartitionMeta(
        seed=None,
        ratios=None,
        threshold=None,
        method=UPSTREAM_METHOD_NAME,
        tool_version=__version__,
    )
    return Partition(assignments, metadata)


def parse_emowoz(
    raw_text: str,
    split_lists: Mapping[str, Iterable[str]] | None = None,
    source_label: str = "emowoz",
) -> tuple[Corpus, Partition | None]:
    """Adapt an EmoWOZ-release document; never returns an invalid corpus."""
    try:
        document = json.loads(raw_text)
    except json.JSONDecodeError as exc:
        raise EmowozFormatError(f"malformed document: {exc}") from None

    dialogues: list[Dialogue] = []
    seen: set[str] = set()
    for dialogue_id, payload in _iter_dialogues(document):
        if not isinstance(dialogue_id, str) or not dialogue_id:
            raise EmowozFormatError(f"bad dialogue id {dialogue_id!r}")
        if dialogue_id in seen:
            raise EmowozFormatError(f"duplicate dialogue id: {dialogue_id!r}")
        seen.add(dialogue_id)
        dialogues.append(_adapt_dialogue(dialogue_id, payload))

    corpus = Corpus(tuple(dialogues), source_label=source_label)
    violations = validate(corpus)
    if violations:
        details = "; ".join(v.describe() for v in violations[:5])
        raise CorpusFormatError(f"adapted corpus violates invariants: {details}")

    partition = _partition_from_lists(corpus, split_lists) if split_lists is not None else None
    return corpus, partition
