"""Canonical-format parsing, serialization round-trips, and validation."""

from __future__ import annotations

import json
from collections import Counter

import pytest

from emosplit import (
    Corpus,
    CorpusFormatError,
    Dialogue,
    EmotionAnnotation,
    EmotionLabel,
    Speaker,
    UtteranceRecord,
    parse_canonical,
    serialize_canonical,
    validate,
)
from conftest import build_dialogue, system_turn, user_turn

MINIMAL_DOC = {
    "source": "unit",
    "dialogues": [
        {
            "dialogue_id": "d1",
            "turns": [
                {"index": 0, "speaker": "user", "text": "hi", "emotion": {"final": 0}},
                {"index": 1, "speaker": "system", "text": "hello"},
            ],
        }
    ],
}


def doc_with_final(final: int) -> str:
    doc = json.loads(json.dumps(MINIMAL_DOC))
    doc["dialogues"][0]["turns"][0]["emotion"]["final"] = final
    return json.dumps(doc)


class TestParseCanonical:
    def test_minimal_document(self):
        corpus = parse_canonical(json.dumps(MINIMAL_DOC))
        assert len(corpus) == 1
        assert corpus.user_turn_count == 1
        assert corpus.source_label == "unit"
        turn = corpus.dialogues[0].turns[0]
        assert turn.speaker is Speaker.USER
        assert turn.emotion.final_label is EmotionLabel.NEUTRAL

    def test_label_out_of_range(self):
        with pytest.raises(CorpusFormatError, match="label out of range"):
            parse_canonical(doc_with_final(7))
        with pytest.raises(CorpusFormatError, match="label out of range"):
            parse_canonical(doc_with_final(-1))

    def test_boundary_labels_parse(self):
        for final in (0, 6):
            corpus = parse_canonical(doc_with_final(final))
            assert corpus.dialogues[0].turns[0].emotion.final_label == final

    def test_duplicate_dialogue_id(self):
        doc = json.loads(json.dumps(MINIMAL_DOC))
        doc["dialogues"].append(doc["dialogues"][0])
        with pytest.raises(CorpusFormatError, match="duplicate dialogue id"):
            parse_canonical(json.dumps(doc))

    def test_system_turn_with_emotion(self):
        doc = json.loads(json.dumps(MINIMAL_DOC))
        doc["dialogues"][0]["turns"][1]["emotion"] = {"final": 0}
        with pytest.raises(CorpusFormatError, match="system turn with emotion"):
            parse_canonical(json.dumps(doc))

    def test_user_turn_without_emotion(self):
        doc = json.loads(json.dumps(MINIMAL_DOC))
        del doc["dialogues"][0]["turns"][0]["emotion"]
        with pytest.raises(CorpusFormatError, match="user turn without emotion"):
            parse_canonical(json.dumps(doc))

    def test_malformed_json(self):
        with pytest.raises(CorpusFormatError, match="malformed document"):
            parse_canonical("{not json")

    def test_annotations_arity_enforced(self):
        doc = json.loads(json.dumps(MINIMAL_DOC))
        doc["dialogues"][0]["turns"][0]["emotion"]["annotations"] = [0, 0]
        with pytest.raises(CorpusFormatError, match="exactly 3"):
            parse_canonical(json.dumps(doc))

    def test_annotations_and_resolution_parse(self):
        doc = json.loads(json.dumps(MINIMAL_DOC))
        doc["dialogues"][0]["turns"][0]["emotion"]["annotations"] = [0, 2, 0]
        doc["dialogues"][0]["turns"][0]["emotion"]["manually_resolved"] = True
        corpus = parse_canonical(json.dumps(doc))
        emotion = corpus.dialogues[0].turns[0].emotion
        assert emotion.annotator_labels == (0, 2, 0)
        assert emotion.manually_resolved is True


class TestHandTally:
    def test_class_counts_match_hand_tally(self, tally_corpus):
        counts = Counter(
            int(turn.emotion.final_label) for turn in tally_corpus.user_utterances()
        )
        assert counts == {0: 4, 1: 1, 2: 2, 3: 1, 4: 1, 5: 1, 6: 3}
        assert tally_corpus.user_turn_count == 13

    def test_counts_match_independent_raw_scan(self, tally_corpus):
        # Walk the raw serialized document without the corpus model.
        raw = json.loads(serialize_canonical(tally_corpus))
        scanned: Counter = Counter()
        for dialogue in raw["dialogues"]:
            for turn in dialogue["turns"]:
                if turn["speaker"] == "user":
                    scanned[turn["emotion"]["final"]] += 1
        model_counts = Counter(
            int(turn.emotion.final_label) for turn in tally_corpus.user_utterances()
        )
        assert scanned == model_counts


class TestRoundTrip:
    def test_parse_serialize_identity(self, tally_corpus):
        assert parse_canonical(serialize_canonical(tally_corpus)) == tally_corpus

    def test_serialized_text_stable(self, tally_corpus):
        first = serialize_canonical(tally_corpus)
        again = serialize_canonical(parse_canonical(first))
        assert first == again

    def test_round_trip_preserves_annotations(self):
        dialogue = build_dialogue("d1", [0, 2], annotators=[(0, 0, 0), (2, 1, 2)], resolved=[False, True])
        corpus = Corpus((dialogue,), source_label="rt")
        assert parse_canonical(serialize_canonical(corpus)) == corpus

    def test_round_trip_preserves_text(self):
        turns = (
            user_turn("d1", 0, 3, text="so sorry"),
            system_turn("d1", 1, text="no problem"),
        )
        corpus = Corpus((Dialogue("d1", turns),), source_label="rt")
        assert parse_canonical(serialize_canonical(corpus)) == corpus


class TestValidate:
    def test_well_formed_corpus_has_no_violations(self, tally_corpus):
        assert validate(tally_corpus) == []

    def test_non_increasing_turn_index(self):
        turns = (user_turn("d1", 2, 0), system_turn("d1", 1))
        corpus = Corpus((Dialogue("d1", turns),))
        violations = validate(corpus)
        assert len(violations) == 1
        assert violations[0].rule == "turn-index-not-increasing"
        assert violations[0].dialogue_id == "d1"

    def test_three_injected_violations(self):
        # 1) system turn with emotion, 2) dialogue with no user turn,
        # 3) turn carrying a foreign dialogue id.
        bad_system = UtteranceRecord("d1", 1, Speaker.SYSTEM, None, EmotionAnnotation(EmotionLabel.NEUTRAL))
        d1 = Dialogue("d1", (user_turn("d1", 0, 0), bad_system))
        d2 = Dialogue("d2", (system_turn("d2", 0),))
        d3 = Dialogue("d3", (user_turn("other", 0, 5),))
        violations = validate(Corpus((d1, d2, d3)))
        assert len(violations) == 3
        assert {v.rule for v in violations} == {
            "system-turn-with-emotion",
            "no-user-turn",
            "turn-dialogue-id-mismatch",
        }

    def test_duplicate_ids_reported(self):
        d = build_dialogue("dup", [0])
        violations = validate(Corpus((d, d)))
        assert any(v.rule == "duplicate-dialogue-id" for v in violations)

    def test_user_turn_without_emotion_reported(self):
        turns = (UtteranceRecord("d1", 0, Speaker.USER, None, None),)
        violations = validate(Corpus((Dialogue("d1", turns),)))
        assert any(v.rule == "user-turn-without-emotion" for v in violations)


def test_annotation_arity_rejected_at_construction():
    with pytest.raises(ValueError, match="exactly 3"):
        EmotionAnnotation(EmotionLabel.NEUTRAL, (EmotionLabel.NEUTRAL,) * 2)


def test_corpus_lookup_and_counts(tally_corpus):
    assert tally_corpus.by_id["d3"].user_turns()[0].emotion.final_label == 2
    assert len(tally_corpus) == 5
