"""End-to-end rehearsal of the released-data path on a fabricated corpus.

The real EmoWOZ MultiWOZ subset cannot be redistributed, so this module
fabricates a release-shaped dataset (dialogue file, val/test id lists with
the upstream .json suffix) whose per-split class counts are engineered to
hit the same reference minority-class frequencies, then drives the exact
code path the data-gated acceptance checks use: file discovery, adapter,
original partition, frequency reproduction, and shift reduction over seeds.
"""

from __future__ import annotations

import json
import random

import pytest

import test_acceptance as acceptance
from emosplit import Split

# Per-split utterance counts per class, chosen so that every relative
# frequency is exact at two decimals. 8 user turns per dialogue.
#   train: 60,000 utterances (7,500 dialogues)
#   dev:   10,000 utterances (1,250 dialogues)
#   test:  10,000 utterances (1,250 dialogues)
# Class order: Neutral, Fearful, Dissatisfied, Apologetic, Abusive,
# Excited, Satisfied.
SPLIT_CLASS_COUNTS = {
    Split.TRAIN: [42_678, 372, 774, 600, 36, 540, 15_000],  # Fear .62, Abu .06, Dis 1.29
    Split.DEV: [7_290, 22, 100, 70, 8, 130, 2_380],         # Fear .22, Abu .08, Dis 1.00
    Split.TEST: [7_010, 20, 147, 130, 7, 70, 2_616],        # Fear .20, Abu .07, Dis 1.47
}
TURNS_PER_DIALOGUE = 8

ID_PREFIX = {Split.TRAIN: "TRN", Split.DEV: "VAL", Split.TEST: "TST"}


def fabricate_release_dir(root):
    rng = random.Random(20_240_501)
    document = {}
    dev_ids, test_ids = [], []
    for split, class_counts in SPLIT_CLASS_COUNTS.items():
        labels = [
            label for label, count in enumerate(class_counts) for _ in range(count)
        ]
        rng.shuffle(labels)
        assert len(labels) % TURNS_PER_DIALOGUE == 0
        for i in range(0, len(labels), TURNS_PER_DIALOGUE):
            dialogue_id = f"{ID_PREFIX[split]}{i // TURNS_PER_DIALOGUE:05d}"
            log = []
            for label in labels[i : i + TURNS_PER_DIALOGUE]:
                log.append({"text": "u", "emotion": label})
                log.append({"text": "s", "emotion": -1})
            document[dialogue_id] = {"log": log}
            if split is Split.DEV:
                dev_ids.append(dialogue_id)
            elif split is Split.TEST:
                test_ids.append(dialogue_id)

    (root / "emowoz-multiwoz.json").write_text(json.dumps(document), encoding="utf-8")
    # Upstream list files carry a .json suffix the dialogue keys do not.
    (root / "valListFile.txt").write_text(
        "".join(f"{i}.json\n" for i in dev_ids), encoding="utf-8"
    )
    (root / "testListFile.txt").write_text(
        "".join(f"{i}.json\n" for i in test_ids), encoding="utf-8"
    )


@pytest.fixture(scope="module")
def release_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("release")
    fabricate_release_dir(root)
    return root


def load_via_acceptance_path(monkeypatch, root):
    monkeypatch.setenv(acceptance.EMOWOZ_ENV, str(root))
    acceptance.load_real_emowoz.cache_clear()
    try:
        return acceptance.load_real_emowoz()
    finally:
        acceptance.load_real_emowoz.cache_clear()


def test_release_layout_loads_and_partitions(release_corpus, monkeypatch):
    corpus, partition, _ = load_via_acceptance_path(monkeypatch, release_corpus)
    assert len(corpus) == 10_000
    assert corpus.user_turn_count == 80_000
    sizes = partition.sizes()
    assert sizes[Split.TRAIN] == 7_500
    assert sizes[Split.DEV] == 1_250
    assert sizes[Split.TEST] == 1_250


def test_engineered_frequencies_reproduce_reference(release_corpus, monkeypatch):
    corpus, partition, _ = load_via_acceptance_path(monkeypatch, release_corpus)
    assert acceptance.minority_frequency_failures(corpus, partition) == []


def test_stratified_resplit_reduces_engineered_shift(release_corpus, monkeypatch):
    corpus, partition, _ = load_via_acceptance_path(monkeypatch, release_corpus)
    assert acceptance.shift_reduction_failures(corpus, partition, seeds=range(1, 11)) == []
