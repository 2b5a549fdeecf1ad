"""Class-based TF-IDF sentence classifier and report-level aggregation.

The weak classifier scores a sentence against each technique by cosine
between the sentence's term-frequency vector and the class's c-TFIDF
weight vector, max-normalized into a pseudo-probability. Any component
mapping a sentence to per-technique scores in [0,1] can stand in for it
downstream; this is the built-in provider.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .attack_kb import ActionDataset
from .corpus import Report, tokenize

CTFIDF_FORMAT_VERSION = "1"

DEFAULT_THRESHOLD = 0.95
TOP_K_SCORES = 5


class TrainingError(ValueError):
    """Raised when a dataset cannot produce a valid model."""


@dataclass(eq=False)
class CtfidfModel:
    vocab: dict[str, int]
    class_ids: tuple[str, ...]
    class_vectors: np.ndarray  # (classes, vocab) c-TFIDF weights
    avg_tokens_per_class: float

    def __post_init__(self):
        norms = np.linalg.norm(self.class_vectors, axis=1)
        self._row_norms = norms


@dataclass(frozen=True)
class SentencePrediction:
    scores: dict[str, float]


@dataclass(frozen=True)
class ReportPrediction:
    report_id: str
    threshold: float
    techniques: frozenset[str]
    # Top-5 sentence scores per class, descending, zero-padded. Present
    # for every class regardless of detection.
    top_scores: dict[str, tuple[float, ...]]
    # Indices of sentences scoring >= threshold, per detected technique.
    hit_sentences: dict[str, tuple[int, ...]]


def train_ctfidf(dataset: ActionDataset) -> CtfidfModel:
    """Fit c-TFIDF class vectors.

    tf(t,c) = count of t in class c's concatenated examples / total
    tokens of c; idf(t) = ln(1 + A/f(t)) with A the mean token count per
    class and f(t) the total count of t across all classes. A
    multi-labeled example contributes to each of its classes.
    """
    if not dataset.examples or not dataset.techniques:
        raise TrainingError("action dataset is empty")

    class_ids = tuple(dataset.techniques)
    class_index = {cid: k for k, cid in enumerate(class_ids)}
    counts: list[dict[str, int]] = [dict() for _ in class_ids]
    for sentence, labels in dataset.examples:
        tokens = tokenize(sentence)
        for cid in labels:
            bucket = counts[class_index[cid]]
            for tok in tokens:
                bucket[tok] = bucket.get(tok, 0) + 1

    totals = np.array([sum(c.values()) for c in counts], dtype=np.float64)
    empty = [class_ids[k] for k in range(len(class_ids)) if totals[k] == 0]
    if empty:
        raise TrainingError(f"classes with no usable tokens: {empty}")

    vocab = {tok: j for j, tok in enumerate(sorted(set().union(*counts)))}
    tf = np.zeros((len(class_ids), len(vocab)), dtype=np.float64)
    for k, bucket in enumerate(counts):
        for tok, n in bucket.items():
            tf[k, vocab[tok]] = n
    freq = tf.sum(axis=0)
    avg_tokens = float(totals.mean())
    idf = np.log(1.0 + avg_tokens / freq)
    weights = (tf / totals[:, None]) * idf[None, :]
    return CtfidfModel(
        vocab=vocab,
        class_ids=class_ids,
        class_vectors=weights,
        avg_tokens_per_class=avg_tokens,
    )


def _raw_scores(model: CtfidfModel, tokens) -> np.ndarray:
    x = np.zeros(len(model.vocab), dtype=np.float64)
    for tok in tokens:
        j = model.vocab.get(tok)
        if j is not None:
            x[j] += 1.0
    xn = np.linalg.norm(x)
    if xn == 0.0:
        return np.zeros(len(model.class_ids), dtype=np.float64)
    dots = model.class_vectors @ x
    denom = model._row_norms * xn
    out = np.zeros_like(dots)
    np.divide(dots, denom, out=out, where=denom > 0)
    return out


def _normalize(raw: np.ndarray) -> np.ndarray:
    top = raw.max() if raw.size else 0.0
    if top <= 0.0:
        return np.zeros_like(raw)
    return raw / top


def predict_sentence(model: CtfidfModel, sentence_tokens) -> SentencePrediction:
    """Max-normalized cosine scores per class; all zeros when nothing matches."""
    scores = _normalize(_raw_scores(model, sentence_tokens))
    return SentencePrediction(
        scores={cid: float(s) for cid, s in zip(model.class_ids, scores)}
    )


def predict_report(
    model: CtfidfModel, report: Report, threshold: float = DEFAULT_THRESHOLD
) -> ReportPrediction:
    """Report-level aggregation: a technique is present iff at least one
    sentence scores >= threshold for it."""
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")

    n_sent = len(report.sentences)
    matrix = np.zeros((n_sent, len(model.class_ids)), dtype=np.float64)
    for i, sentence in enumerate(report.sentences):
        matrix[i] = _normalize(_raw_scores(model, sentence.tokens))

    top_scores: dict[str, tuple[float, ...]] = {}
    hit_sentences: dict[str, tuple[int, ...]] = {}
    detected = []
    for k, cid in enumerate(model.class_ids):
        col = matrix[:, k]
        best = np.sort(col)[::-1][:TOP_K_SCORES]
        padded = np.zeros(TOP_K_SCORES, dtype=np.float64)
        padded[: best.size] = best
        top_scores[cid] = tuple(float(v) for v in padded)
        hits = tuple(int(i) for i in np.nonzero(col >= threshold)[0])
        if hits:
            detected.append(cid)
            hit_sentences[cid] = hits
    return ReportPrediction(
        report_id=report.report_id,
        threshold=threshold,
        techniques=frozenset(detected),
        top_scores=top_scores,
        hit_sentences=hit_sentences,
    )


def model_to_dict(model: CtfidfModel) -> dict:
    ordered = sorted(model.vocab, key=model.vocab.get)
    return {
        "format_version": CTFIDF_FORMAT_VERSION,
        "class_ids": list(model.class_ids),
        "vocab": ordered,
        "weights": model.class_vectors.ravel().tolist(),
        "avg_tokens_per_class": model.avg_tokens_per_class,
    }


def model_from_dict(data: dict) -> CtfidfModel:
    vocab = {tok: j for j, tok in enumerate(data["vocab"])}
    class_ids = tuple(data["class_ids"])
    weights = np.asarray(data["weights"], dtype=np.float64).reshape(
        len(class_ids), len(vocab)
    )
    return CtfidfModel(
        vocab=vocab,
        class_ids=class_ids,
        class_vectors=weights,
        avg_tokens_per_class=float(data["avg_tokens_per_class"]),
    )


def save_model(model: CtfidfModel, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(model_to_dict(model), sort_keys=True), encoding="utf-8"
    )


def load_model(path: str | Path) -> CtfidfModel:
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
