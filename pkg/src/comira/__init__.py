"""Concept co-occurrence statistics, PMI scoring, and evaluation tooling."""

from .concepts import (
    ConceptVocabulary,
    NormalizerConfig,
    build_vocabulary,
    extract_concepts,
    load_vocabulary,
    normalize,
    save_vocabulary,
)
from .cooccur import PairCountTable, count_pairs, count_pairs_file, load_table, merge, save_table
from .corpus import CaptionRecord, CorpusFormat, count_records, open_corpus
from .evaluate import (
    BinnedReport,
    EvalRecord,
    accuracy_gap,
    bin_accuracy,
    build_report,
    emit_report,
    pearson_r,
    topk_correct,
    vqa_accuracy,
    yes_rate_by_pmi,
)
from .pmi import PmiModel, SmoothingConfig
from .scoring import (
    PmiScore,
    VqaExample,
    caption_mean_pmi,
    derive_ground_truth,
    key_pair_pmi,
    question_only_pmi,
    vqa_example_pmi,
)

__version__ = "0.1.0"

__all__ = [
    "BinnedReport",
    "CaptionRecord",
    "ConceptVocabulary",
    "CorpusFormat",
    "EvalRecord",
    "NormalizerConfig",
    "PairCountTable",
    "PmiModel",
    "PmiScore",
    "SmoothingConfig",
    "VqaExample",
    "accuracy_gap",
    "bin_accuracy",
    "build_report",
    "build_vocabulary",
    "caption_mean_pmi",
    "count_pairs",
    "count_pairs_file",
    "count_records",
    "derive_ground_truth",
    "emit_report",
    "extract_concepts",
    "key_pair_pmi",
    "load_table",
    "load_vocabulary",
    "merge",
    "normalize",
    "open_corpus",
    "pearson_r",
    "question_only_pmi",
    "save_table",
    "save_vocabulary",
    "topk_correct",
    "vqa_accuracy",
    "vqa_example_pmi",
    "yes_rate_by_pmi",
]
