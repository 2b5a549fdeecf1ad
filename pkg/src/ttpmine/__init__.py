"""ttpmine: mine temporal attack patterns from CTI report text.

Pipeline: ATT&CK knowledge base -> sentence-level technique
classification -> pair feature extraction -> temporal relation
classification -> recurring-pattern mining.
"""

__version__ = "0.1.0"

from .attack_kb import (
    ActionDataset,
    TechniqueCatalog,
    TechniqueRecord,
    UsageMatrix,
    build_action_dataset,
    build_usage_matrix,
    parse_stix,
)
from .corpus import (
    PairUniverse,
    RelationAnnotation,
    Report,
    Sentence,
    load_annotations,
    load_reports,
    make_report,
    pair_universe,
    segment_sentences,
    tokenize,
)
from .ctfidf import (
    CtfidfModel,
    ReportPrediction,
    SentencePrediction,
    predict_report,
    predict_sentence,
    train_ctfidf,
)
from .embeddings import WordVectors, cosine, load_word_vectors, sentence_vector
from .features import FeatureLayout, PairFeatureVector, build_feature_vector
from .gbdt import GbdtEnsemble, RelationPrediction, TrainConfig, cross_validate
from .labels import ALL_LABELS, BEFORE, CONCURRENT, NULL, SIMULTANEOUS_OVERLAP
from .metrics import MetricReport, cohen_kappa, lrap, macro_prf, ndcg, precision_at_k
from .mining import CategoryMap, TemporalPattern, categorize, load_category_map, mine

__all__ = [
    "__version__",
    "ActionDataset",
    "TechniqueCatalog",
    "TechniqueRecord",
    "UsageMatrix",
    "build_action_dataset",
    "build_usage_matrix",
    "parse_stix",
    "PairUniverse",
    "RelationAnnotation",
    "Report",
    "Sentence",
    "load_annotations",
    "load_reports",
    "make_report",
    "pair_universe",
    "segment_sentences",
    "tokenize",
    "CtfidfModel",
    "ReportPrediction",
    "SentencePrediction",
    "predict_report",
    "predict_sentence",
    "train_ctfidf",
    "WordVectors",
    "cosine",
    "load_word_vectors",
    "sentence_vector",
    "FeatureLayout",
    "PairFeatureVector",
    "build_feature_vector",
    "GbdtEnsemble",
    "RelationPrediction",
    "TrainConfig",
    "cross_validate",
    "ALL_LABELS",
    "BEFORE",
    "CONCURRENT",
    "NULL",
    "SIMULTANEOUS_OVERLAP",
    "MetricReport",
    "cohen_kappa",
    "lrap",
    "macro_prf",
    "ndcg",
    "precision_at_k",
    "CategoryMap",
    "TemporalPattern",
    "categorize",
    "load_category_map",
    "mine",
]
