"""Deterministic seeded partitioning of a corpus into train/dev/test.

Pipeline: build the sequence-frequency table, separate frequent from pooled
conversations, apportion per-stratum quotas with the largest-remainder rule,
shuffle each stratum with one splitmix64 stream (strata in lexicographic key
order, ids pre-sorted), randomly split the pooled remainder the same way,
and merge the two partial assignments.

Identical (corpus, ratios, threshold, seed) always yields a bit-identical
partition; split sizes depend on sizes and ratios only, never on the seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

from sklearn.base import BaseEstimator

from ._version import __version__
from .corpus import Corpus, EmosplitError
from .rng import SplitMix64
from .strata import (
    DEFAULT_FREQUENCY_THRESHOLD,
    EmotionSequence,
    FrequencyTable,
    StrataSplit,
    build_frequency_table,
    emotion_sequence,
    sequence_to_str,
    split_by_frequency,
)

METHOD_NAME = "stratified-v1"
UPSTREAM_METHOD_NAME = "upstream-lists"

DEFAULT_SEED = 42


class SplitterError(EmosplitError):
    """Inconsistent inputs to a partitioning operation."""


class MergeError(SplitterError):
    """Partial partitions overlap or carry conflicting metadata."""


class Split(Enum):
    TRAIN = "train"
    DEV = "dev"
    TEST = "test"


SPLITS: tuple[Split, ...] = (Split.TRAIN, Split.DEV, Split.TEST)


@dataclass(frozen=True)
class SplitRatios:
    train: float = 0.8
    dev: float = 0.1
    test: float = 0.1

    def __post_init__(self) -> None:
        for name, value in (("train", self.train), ("dev", self.dev), ("test", self.test)):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} ratio must be in [0, 1], got {value}")
        total = self.train + self.dev + self.test
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"ratios must sum to 1, got {total}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.train, self.dev, self.test)


# Tie-break priority among equal remainders: dev first, then test, then train.
_TIE_PRIORITY = {0: 2, 1: 0, 2: 1}


def apportion(size: int, ratios: SplitRatios) -> tuple[int, int, int]:
    """Largest-remainder apportionment of ``size`` items over the three splits.

    Exact-fraction arithmetic keeps floors and remainder comparisons
    platform-independent; every quota differs from size * ratio by < 1.
    """
    if size < 0:
        raise ValueError(f"size must be non-negative, got {size}")
    shares = [Fraction(size) * Fraction(ratio) for ratio in ratios.as_tuple()]
    quotas = [int(share) for share in shares]  # shares are non-negative
    remainders = [share - quota for share, quota in zip(shares, quotas)]
    for index in sorted(range(3), key=lambda i: (-remainders[i], _TIE_PRIORITY[i]))[
        : size - sum(quotas)
    ]:
        quotas[index] += 1
    return (quotas[0], quotas[1], quotas[2])


@dataclass(frozen=True)
class QuotaPlan:
    """Per-stratum (train, dev, test) quotas, plus the pooled-set triple."""

    per_stratum: dict[EmotionSequence, tuple[int, int, int]]
    ratios: SplitRatios
    pooled: tuple[int, int, int] | None = None


def plan_quotas(sizes: Mapping[EmotionSequence, int], ratios: SplitRatios) -> QuotaPlan:
    for key, count in sizes.items():
        if count <= 0:
            raise ValueError(f"stratum {sequence_to_str(key)} has non-positive size {count}")
    per_stratum = {key: apportion(sizes[key], ratios) for key in sorted(sizes)}
    return QuotaPlan(per_stratum=per_stratum, ratios=ratios)


@dataclass(frozen=True)
class PartitionMeta:
    seed: int | None
    ratios: SplitRatios | None
    threshold: int | None
    method: str = METHOD_NAME
    tool_version: str = __version__


@dataclass(frozen=True)
class Partition:
    """Assignment of dialogue ids to splits; may be partial before merging."""

    assignments: dict[str, Split]
    metadata: PartitionMeta

    def sizes(self) -> dict[Split, int]:
        counts = {split: 0 for split in SPLITS}
        for split in self.assignments.values():
            counts[split] += 1
        return counts

    def ids_for(self, split: Split) -> list[str]:
        return sorted(i for i, s in self.assignments.items() if s is split)


def _assign_blocks(
    ids: Sequence[str], quotas: tuple[int, int, int], out: dict[str, Split]
) -> None:
    n_train, n_dev, n_test = quotas
    assert n_train + n_dev + n_test == len(ids)
    for i, dialogue_id in enumerate(ids):
        if i < n_train:
            out[dialogue_id] = Split.TRAIN
        elif i < n_train + n_dev:
            out[dialogue_id] = Split.DEV
        else:
            out[dialogue_id] = Split.TEST


def stratified_split(
    frequent_ids: Mapping[EmotionSequence, Sequence[str]],
    plan: QuotaPlan,
    seed: int,
) -> Partition:
    """Quota assignment within each frequent stratum, one PRNG stream overall."""
    if set(frequent_ids) != set(plan.per_stratum):
        missing = set(frequent_ids) ^ set(plan.per_stratum)
        raise SplitterError(
            "plan/strata mismatch: " + ", ".join(sequence_to_str(k) for k in sorted(missing))
        )
    rng = SplitMix64(seed)
    assignments: dict[str, Split] = {}
    for key in sorted(frequent_ids):
        ids = sorted(frequent_ids[key])
        quotas = plan.per_stratum[key]
        if sum(quotas) != len(ids):
            raise SplitterError(
                f"plan/strata mismatch: stratum {sequence_to_str(key)} has {len(ids)} ids "
                f"but quotas for {sum(quotas)}"
            )
        rng.shuffle(ids)
        _assign_blocks(ids, quotas, assignments)
    return Partition(
        assignments,
        PartitionMeta(seed=seed, ratios=plan.ratios, threshold=None),
    )


def random_split(
    non_frequent_ids: Iterable[str], ratios: SplitRatios, seed: int
) -> Partition:
    """The pooled set is treated as a single stratum: one shuffle, block assignment."""
    ids = sorted(non_frequent_ids)
    quotas = apportion(len(ids), ratios)
    rng = SplitMix64(seed)
    rng.shuffle(ids)
    assignments: dict[str, Split] = {}
    _assign_blocks(ids, quotas, assignments)
    return Partition(assignments, PartitionMeta(seed=seed, ratios=ratios, threshold=None))


def merge(a: Partition, b: Partition) -> Partition:
    """Union of two disjoint partial partitions with compatible metadata."""
    overlap = set(a.assignments) & set(b.assignments)
    if overlap:
        raise MergeError(f"overlapping dialogue id: {sorted(overlap)[0]!r}")
    if a.metadata.seed != b.metadata.seed:
        raise MergeError(f"conflicting seeds: {a.metadata.seed} vs {b.metadata.seed}")
    if a.metadata.ratios != b.metadata.ratios:
        raise MergeError(f"conflicting ratios: {a.metadata.ratios} vs {b.metadata.ratios}")
    if (
        a.metadata.threshold is not None
        and b.metadata.threshold is not None
        and a.metadata.threshold != b.metadata.threshold
    ):
        raise MergeError(
            f"conflicting thresholds: {a.metadata.threshold} vs {b.metadata.threshold}"
        )
    if a.metadata.method != b.metadata.method:
        raise MergeError(f"conflicting methods: {a.metadata.method} vs {b.metadata.method}")
    threshold = a.metadata.threshold if a.metadata.threshold is not None else b.metadata.threshold
    merged = dict(a.assignments)
    merged.update(b.assignments)
    return Partition(merged, replace(a.metadata, threshold=threshold))


@dataclass(frozen=True)
class SplitResult:
    """Partition plus the intermediate structures, for summaries and reports."""

    partition: Partition
    table: FrequencyTable
    strata: StrataSplit
    plan: QuotaPlan


def run_split(
    corpus: Corpus,
    ratios: SplitRatios = SplitRatios(),
    threshold: int = DEFAULT_FREQUENCY_THRESHOLD,
    seed: int = DEFAULT_SEED,
) -> SplitResult:
    table = build_frequency_table(corpus)
    strata = split_by_frequency(corpus, table, threshold)

    sequences = {d.id: emotion_sequence(d) for d in corpus.dialogues}
    frequent_ids: dict[EmotionSequence, list[str]] = {}
    for dialogue_id in strata.frequent:
        frequent_ids.setdefault(sequences[dialogue_id], []).append(dialogue_id)

    plan = plan_quotas({key: len(ids) for key, ids in frequent_ids.items()}, ratios)
    pooled_quotas = apportion(len(strata.non_frequent), ratios)
    plan = replace(plan, pooled=pooled_quotas)

    frequent_part = stratified_split(frequent_ids, plan, seed)
    pooled_part = random_split(strata.non_frequent, ratios, seed)
    partition = merge(frequent_part, pooled_part)
    metadata = PartitionMeta(seed=seed, ratios=ratios, threshold=threshold)
    return SplitResult(Partition(partition.assignments, metadata), table, strata, plan)


def split_corpus(
    corpus: Corpus,
    ratios: SplitRatios = SplitRatios(),
    threshold: int = DEFAULT_FREQUENCY_THRESHOLD,
    seed: int = DEFAULT_SEED,
) -> Partition:
    """End-to-end stratified partitioning; covers every dialogue exactly once."""
    return run_split(corpus, ratios, threshold, seed).partition


class EmotionSequenceSplitter(BaseEstimator):
    """Estimator-style wrapper so the splitter composes with sklearn tooling.

    Parameters are stored verbatim (``get_params`` / ``set_params`` /
    ``clone`` work as usual); all computation happens in :meth:`split`.
    """

    def __init__(
        self,
        ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
        threshold: int = DEFAULT_FREQUENCY_THRESHOLD,
        seed: int = DEFAULT_SEED,
    ):
        self.ratios = ratios
        self.threshold = threshold
        self.seed = seed

    def split(self, corpus: Corpus) -> Partition:
        ratios = self.ratios if isinstance(self.ratios, SplitRatios) else SplitRatios(*self.ratios)
        return split_corpus(corpus, ratios, self.threshold, self.seed)


def partition_to_dict(partition: Partition) -> dict[str, Any]:
    meta = partition.metadata
    return {
        "metadata": {
            "seed": meta.seed,
            "ratios": list(meta.ratios.as_tuple()) if meta.ratios is not None else None,
            "threshold": meta.threshold,
            "method": meta.method,
            "tool_version": meta.tool_version,
        },
        "assignments": {i: s.value for i, s in partition.assignments.items()},
    }


def partition_to_json(partition: Partition) -> str:
    return json.dumps(partition_to_dict(partition), indent=2, sort_keys=True) + "\n"


def partition_from_json(raw_text: str) -> Partition:
    try:
        document = json.loads(raw_text)
    except json.JSONDecodeError as exc:
        raise SplitterError(f"malformed partition file: {exc}") from None
    if not isinstance(document, dict) or "assignments" not in document:
        raise SplitterError("malformed partition file: missing 'assignments'")
    raw_meta = document.get("metadata", {})
    if not isinstance(raw_meta, dict):
        raise SplitterError("malformed partition file: 'metadata' must be an object")

    raw_ratios = raw_meta.get("ratios")
    if raw_ratios is None:
        ratios = None
    else:
        try:
            ratios = SplitRatios(*raw_ratios)
        except (TypeError, ValueError) as exc:
            raise SplitterError(f"malformed partition file: bad ratios: {exc}") from None
    metadata = PartitionMeta(
        seed=raw_meta.get("seed"),
        ratios=ratios,
        threshold=raw_meta.get("threshold"),
        method=raw_meta.get("method", METHOD_NAME),
        tool_version=raw_meta.get("tool_version", __version__),
    )

    assignments: dict[str, Split] = {}
    for dialogue_id, value in document["assignments"].items():
        try:
            assignments[dialogue_id] = Split(value)
        except ValueError:
            raise SplitterError(
                f"malformed partition file: unknown split {value!r} for {dialogue_id!r}"
            ) from None
    return Partition(assignments, metadata)


# MultiWOZ-convention list files; dev ids go to valListFile.
LIST_FILE_NAMES = {
    Split.TRAIN: "trainListFile.txt",
    Split.DEV: "valListFile.txt",
    Split.TEST: "testListFile.txt",
}


def partition_list_files(partition: Partition) -> dict[str, str]:
    """Sorted one-id-per-line list files, keyed by file name."""
    files = {}
    for split, name in LIST_FILE_NAMES.items():
        ids = partition.ids_for(split)
        files[name] = "\n".join(ids) + ("\n" if ids else "")
    return files
