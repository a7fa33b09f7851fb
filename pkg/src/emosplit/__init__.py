"""Emotion-sequence stratified partitioning and dataset-shift diagnostics."""

from ._version import __version__
from .corpus import (
    CLASS_LABELS,
    Corpus,
    CorpusFormatError,
    Dialogue,
    EmosplitError,
    EmotionAnnotation,
    EmotionLabel,
    N_CLASSES,
    Speaker,
    UtteranceRecord,
    Violation,
    parse_canonical,
    serialize_canonical,
    validate,
)
from .diagnostics import (
    AgreementStats,
    ComparisonReport,
    ConfusionMatrix,
    F1Report,
    PartitionCoverageError,
    PredictionError,
    PredictionEvaluation,
    ProvenanceError,
    ShiftReport,
    agreement_stats,
    annotator_f1,
    build_shift_report,
    compare_partitions,
    evaluate_predictions,
    js_divergence,
    manual_resolution_rate,
    parse_predictions,
    relative_frequency,
    shift_divergence,
)
from .emowoz import EmowozFormatError, parse_emowoz
from .splitter import (
    EmotionSequenceSplitter,
    MergeError,
    Partition,
    PartitionMeta,
    QuotaPlan,
    Split,
    SplitRatios,
    SplitterError,
    apportion,
    merge,
    partition_from_json,
    partition_list_files,
    partition_to_json,
    plan_quotas,
    random_split,
    run_split,
    split_corpus,
    stratified_split,
)
from .strata import (
    EmotionSequence,
    FrequencyTable,
    StrataError,
    StrataSplit,
    build_frequency_table,
    emotion_sequence,
    frequency_table_to_csv,
    split_by_frequency,
)

__all__ = [name for name in dir() if not name.startswith("_")]
