"""Pipeline orchestration: stage functions and artifact I/O.

Each stage reads prior artifacts from disk and writes its own, so any
stage can be re-run standalone. Artifacts embed the tool version, the
configuration hash, and (where applicable) the feature layout version;
a stage refuses to consume an artifact whose layout version differs
from its own.

Artifact formats:

* JSON artifacts carry a top-level ``"meta"`` object; model payloads
  sit under ``"model"`` (bare model files are also accepted on read).
* JSONL artifacts start with a single meta line ``{"meta": {...}}``
  followed by one record per line.
* The feature CSV has no inline meta; a sidecar ``<out>.layout.json``
  carries the layout descriptor plus the meta block.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from . import __version__
from .attack_kb import (
    TechniqueCatalog,
    UsageMatrix,
    build_action_dataset,
    build_usage_matrix,
    catalog_from_dict,
    catalog_to_dict,
    parse_stix,
    usage_from_dict,
    usage_to_dict,
)
from .corpus import Report, load_annotations, load_reports, pair_universe
from .ctfidf import (
    DEFAULT_THRESHOLD,
    CtfidfModel,
    ReportPrediction,
    model_from_dict,
    model_to_dict,
    predict_report,
    train_ctfidf,
)
from .embeddings import WordVectors, load_word_vectors
from .features import FeatureLayout, PairFeatureVector
from .features.builder import (
    build_report_features,
    read_features_csv,
    write_features_csv,
)
from .gbdt import GbdtEnsemble, RelationPrediction, TrainConfig
from .gbdt.ensemble import ensemble_from_dict, ensemble_to_dict, predict_batch
from .gbdt.ensemble import train as train_ensemble
from .labels import NULL
from .mining import CategoryMap, categorize, export, load_category_map, mine

logger = logging.getLogger(__name__)

_JSON_KW = {"sort_keys": True, "separators": (",", ":")}


class PipelineError(Exception):
    """A stage could not run (missing/invalid input or artifact)."""


@dataclass(frozen=True)
class PipelineConfig:
    """Configuration for the end-to-end pipeline.

    Paths are part of the hash input, so re-running an identical
    configuration file yields artifacts with identical provenance.
    """

    stix: str | None = None
    reports: str | None = None
    annotations: str | None = None
    vectors: str | None = None
    categories: str | None = None
    out_dir: str = "out"
    threshold: float = DEFAULT_THRESHOLD
    min_examples: int = 20
    bins: int = 10
    min_support: int = 2
    workers: int | None = None
    train: TrainConfig = field(default_factory=TrainConfig)

    def to_dict(self) -> dict:
        return {
            "stix": self.stix,
            "reports": self.reports,
            "annotations": self.annotations,
            "vectors": self.vectors,
            "categories": self.categories,
            "out_dir": self.out_dir,
            "threshold": self.threshold,
            "min_examples": self.min_examples,
            "bins": self.bins,
            "min_support": self.min_support,
            "workers": self.workers,
            "train": self.train.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "PipelineConfig":
        known = {
            "stix",
            "reports",
            "annotations",
            "vectors",
            "categories",
            "out_dir",
            "threshold",
            "min_examples",
            "bins",
            "min_support",
            "workers",
            "train",
        }
        unknown = sorted(set(data) - known)
        if unknown:
            raise PipelineError(f"unknown config keys: {', '.join(unknown)}")
        kwargs = dict(data)
        train = kwargs.pop("train", None)
        cfg = TrainConfig.from_dict(train) if isinstance(train, Mapping) else TrainConfig()
        return cls(train=cfg, **kwargs)

    def config_hash(self) -> str:
        payload = json.dumps(self.to_dict(), **_JSON_KW)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def make_meta(stage: str, config_hash: str, layout_version: str | None = None) -> dict:
    """Provenance block embedded in every artifact."""
    meta = {
        "tool": "ttpmine",
        "tool_version": __version__,
        "stage": stage,
        "config_hash": config_hash,
    }
    if layout_version is not None:
        meta["layout_version"] = layout_version
    return meta


def write_json(path: str, payload: Mapping) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, **_JSON_KW)
        fh.write("\n")


def read_json(path: str, what: str) -> dict:
    if not os.path.exists(path):
        raise PipelineError(f"{what} artifact not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def write_jsonl(path: str, meta: Mapping, records: Iterable[Mapping]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"meta": meta}, **_JSON_KW) + "\n")
        for record in records:
            fh.write(json.dumps(record, **_JSON_KW) + "\n")


def read_jsonl(path: str) -> tuple[dict, list[dict]]:
    """Read a JSONL artifact, returning ``(meta, records)``.

    The meta line is optional so hand-built files also load.
    """
    if not os.path.exists(path):
        raise PipelineError(f"artifact not found: {path}")
    meta: dict = {}
    records: list[dict] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise PipelineError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if lineno == 1 and isinstance(obj, dict) and set(obj) == {"meta"}:
                meta = obj["meta"]
                continue
            records.append(obj)
    return meta, records


def _unwrap_model(payload: Mapping) -> Mapping:
    """Accept both ``{"meta": ..., "model": {...}}`` and bare model dicts."""
    return payload["model"] if "model" in payload else payload


def report_prediction_to_dict(p: ReportPrediction) -> dict:
    return {
        "report_id": p.report_id,
        "threshold": p.threshold,
        "techniques": sorted(p.techniques),
        "top_scores": {cid: list(v) for cid, v in p.top_scores.items()},
        "hit_sentences": {cid: list(v) for cid, v in p.hit_sentences.items()},
    }


def relation_prediction_to_dict(p: RelationPrediction) -> dict:
    return {
        "report_id": p.report_id,
        "tx": p.tx,
        "ty": p.ty,
        "probabilities": p.probabilities,
        "labels": sorted(p.labels),
    }


def relation_prediction_from_dict(data: Mapping) -> RelationPrediction:
    return RelationPrediction(
        tx=data["tx"],
        ty=data["ty"],
        probabilities={k: float(v) for k, v in data["probabilities"].items()},
        labels=frozenset(data["labels"]),
        report_id=data.get("report_id", ""),
    )


def _map_reports(reports: Sequence[Report], fn, workers: int | None):
    """Apply ``fn`` to every report, optionally in a thread pool.

    Results come back in report order regardless of completion order,
    keeping artifacts deterministic.
    """
    if workers is not None and workers > 1 and len(reports) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, reports))
    return [fn(report) for report in reports]


# ---------------------------------------------------------------------------
# Stage: kb
# ---------------------------------------------------------------------------


def stage_kb(
    stix_path: str,
    out_dir: str,
    *,
    min_examples: int = 20,
    config_hash: str = "",
) -> CtfidfModel:
    """Parse a STIX bundle and train the sentence classifier.

    Writes ``catalog.json``, ``usage.json``, and ``ctfidf.json`` into
    ``out_dir`` and returns the trained classifier.
    """
    if not os.path.exists(stix_path):
        raise PipelineError(f"kb: STIX bundle not found: {stix_path}")
    with open(stix_path, "rb") as fh:
        bundle_bytes = fh.read()
    os.makedirs(out_dir, exist_ok=True)
    catalog = parse_stix(bundle_bytes)
    usage = build_usage_matrix(bundle_bytes, catalog)
    logger.info(
        "kb: %d techniques, %d actors", len(catalog.techniques), len(usage.actors)
    )
    dataset = build_action_dataset(catalog, min_examples=min_examples)
    logger.info(
        "kb: action dataset keeps %d/%d techniques (min_examples=%d)",
        len(dataset.techniques),
        len(catalog.techniques),
        min_examples,
    )
    model = train_ctfidf(dataset)
    meta = make_meta("kb", config_hash)
    write_json(
        os.path.join(out_dir, "catalog.json"),
        {"meta": meta, "catalog": catalog_to_dict(catalog)},
    )
    write_json(
        os.path.join(out_dir, "usage.json"),
        {"meta": meta, "usage": usage_to_dict(usage)},
    )
    write_json(
        os.path.join(out_dir, "ctfidf.json"),
        {"meta": meta, "model": model_to_dict(model)},
    )
    return model


def load_kb_catalog(kb_dir: str) -> TechniqueCatalog:
    payload = read_json(os.path.join(kb_dir, "catalog.json"), "kb catalog")
    return catalog_from_dict(payload.get("catalog", payload))


def load_kb_usage(kb_dir: str) -> UsageMatrix:
    payload = read_json(os.path.join(kb_dir, "usage.json"), "kb usage")
    return usage_from_dict(payload.get("usage", payload))


def load_ctfidf_model(path: str) -> CtfidfModel:
    payload = read_json(path, "classifier model")
    return model_from_dict(_unwrap_model(payload))


# ---------------------------------------------------------------------------
# Stage: classify
# ---------------------------------------------------------------------------


def stage_classify(
    model: CtfidfModel,
    reports: Sequence[Report],
    out_path: str,
    *,
    threshold: float = DEFAULT_THRESHOLD,
    workers: int | None = None,
    config_hash: str = "",
) -> list[ReportPrediction]:
    """Run the sentence classifier over every report and write JSONL."""
    ordered = sorted(reports, key=lambda r: r.report_id)
    predictions = _map_reports(
        ordered, lambda r: predict_report(model, r, threshold=threshold), workers
    )
    meta = make_meta("classify", config_hash)
    meta["threshold"] = threshold
    write_jsonl(out_path, meta, (report_prediction_to_dict(p) for p in predictions))
    logger.info(
        "classify: wrote %d report predictions to %s", len(predictions), out_path
    )
    return predictions


# ---------------------------------------------------------------------------
# Stage: features
# ---------------------------------------------------------------------------


def stage_features(
    model: CtfidfModel,
    usage: UsageMatrix | None,
    reports: Sequence[Report],
    out_path: str,
    *,
    vectors: WordVectors | None = None,
    threshold: float = DEFAULT_THRESHOLD,
    bins: int = 10,
    workers: int | None = None,
    config_hash: str = "",
) -> list[PairFeatureVector]:
    """Extract pair feature vectors for every report and write CSV.

    A sidecar ``<out>.layout.json`` records the layout descriptor so
    later stages can validate compatibility.
    """
    layout = FeatureLayout(bins=bins)
    universe = pair_universe(model.class_ids)
    ordered = sorted(reports, key=lambda r: r.report_id)

    def one(report: Report) -> list[PairFeatureVector]:
        prediction = predict_report(model, report, threshold=threshold)
        return build_report_features(
            report, prediction, universe, usage, vectors, bins=bins, layout=layout
        )

    per_report = _map_reports(ordered, one, workers)
    rows: list[PairFeatureVector] = []
    for chunk in per_report:
        rows.extend(chunk)
    write_features_csv(rows, layout, out_path)
    meta = make_meta("features", config_hash, layout_version=layout.version)
    meta["threshold"] = threshold
    write_json(out_path + ".layout.json", {"meta": meta, "layout": layout.descriptor()})
    logger.info(
        "features: wrote %d pair vectors (%d slots) to %s",
        len(rows),
        layout.total,
        out_path,
    )
    return rows


def load_features(path: str) -> tuple[list[PairFeatureVector], FeatureLayout]:
    """Load a feature CSV plus its sidecar layout descriptor."""
    if not os.path.exists(path):
        raise PipelineError(f"features artifact not found: {path}")
    sidecar = read_json(path + ".layout.json", "features sidecar")
    descriptor = sidecar.get("layout", {})
    if "bins" not in descriptor or "layout_version" not in descriptor:
        raise PipelineError(f"features sidecar is malformed: {path}.layout.json")
    layout = FeatureLayout(bins=int(descriptor["bins"]))
    if layout.version != descriptor["layout_version"]:
        raise PipelineError(
            "features sidecar layout version "
            f"{descriptor['layout_version']!r} does not match {layout.version!r}"
        )
    rows = read_features_csv(path, layout)
    return rows, layout


# ---------------------------------------------------------------------------
# Stage: train-relations
# ---------------------------------------------------------------------------


def labels_for_rows(rows: Sequence[PairFeatureVector], annotations) -> list[frozenset[str]]:
    """Resolve the label set for each feature row.

    Pairs without an explicit annotation are implicit ``{NULL}``.
    """
    explicit: dict[tuple[str, str, str], frozenset[str]] = {}
    for ann in annotations:
        explicit[(ann.report_id, ann.tx, ann.ty)] = ann.labels
    null_only = frozenset({NULL})
    return [explicit.get((row.report_id, row.tx, row.ty), null_only) for row in rows]


def stage_train(
    rows: Sequence[PairFeatureVector],
    layout: FeatureLayout,
    labels: Sequence[frozenset[str]],
    out_path: str,
    *,
    train_config: TrainConfig | None = None,
    feature_groups: Sequence[str] | None = None,
    config_hash: str = "",
) -> GbdtEnsemble:
    """Train the temporal relation classifier and write the model JSON."""
    config = train_config or TrainConfig()
    ensemble = train_ensemble(
        rows, labels, config, feature_groups=feature_groups, layout=layout
    )
    meta = make_meta("train-relations", config_hash, layout_version=layout.version)
    write_json(out_path, {"meta": meta, "model": ensemble_to_dict(ensemble)})
    logger.info("train-relations: wrote model to %s", out_path)
    return ensemble


def load_relation_model(path: str) -> GbdtEnsemble:
    payload = read_json(path, "relation model")
    return ensemble_from_dict(_unwrap_model(payload))


# ---------------------------------------------------------------------------
# Stage: predict
# ---------------------------------------------------------------------------


def stage_predict(
    ensemble: GbdtEnsemble,
    rows: Sequence[PairFeatureVector],
    layout: FeatureLayout,
    out_path: str,
    *,
    config_hash: str = "",
) -> list[RelationPrediction]:
    """Predict temporal relations for every feature row and write JSONL."""
    if ensemble.layout_version != layout.version:
        raise PipelineError(
            f"model layout version {ensemble.layout_version!r} does not match "
            f"feature layout {layout.version!r}; re-extract features with "
            "matching bins or retrain the model"
        )
    predictions = predict_batch(ensemble, rows)
    meta = make_meta("predict", config_hash, layout_version=layout.version)
    write_jsonl(out_path, meta, (relation_prediction_to_dict(p) for p in predictions))
    logger.info("predict: wrote %d pair predictions to %s", len(predictions), out_path)
    return predictions


def load_relation_predictions(path: str) -> list[RelationPrediction]:
    _, records = read_jsonl(path)
    return [relation_prediction_from_dict(r) for r in records]


# ---------------------------------------------------------------------------
# Stage: mine
# ---------------------------------------------------------------------------


def stage_mine(
    predictions: Sequence[RelationPrediction],
    out_path: str,
    *,
    min_support: int = 2,
    category_map: CategoryMap | None = None,
    formats: Sequence[str] = ("csv", "json", "dot"),
    config_hash: str = "",
) -> list:
    """Mine recurring patterns, attach categories, and export.

    ``out_path`` names the primary artifact; sibling formats replace
    its extension.
    """
    cmap = category_map if category_map is not None else load_category_map()
    by_report: dict[str, list[RelationPrediction]] = {}
    for pred in predictions:
        by_report.setdefault(pred.report_id, []).append(pred)
    patterns = mine(by_report, n=min_support)
    patterns = categorize(patterns, cmap)
    base, ext = os.path.splitext(out_path)
    for fmt in formats:
        path = out_path if ext == "." + fmt else base + "." + fmt
        with open(path, "wb") as fh:
            fh.write(export(patterns, fmt))
    meta = make_meta("mine", config_hash)
    meta["min_support"] = min_support
    meta["patterns"] = len(patterns)
    write_json(base + ".meta.json", {"meta": meta})
    logger.info("mine: %d patterns at min_support=%d", len(patterns), min_support)
    return patterns


# ---------------------------------------------------------------------------
# Full run
# ---------------------------------------------------------------------------


def run_pipeline(config: PipelineConfig) -> dict:
    """Execute kb -> classify -> features -> train -> predict -> mine.

    Returns a summary dict of artifact paths and headline counts. The
    relation model is trained from ``config.annotations``; the run
    fails early if a required input is missing.
    """
    for name in ("stix", "reports", "annotations"):
        if getattr(config, name) is None:
            raise PipelineError(f"run: config.{name} is required")
    chash = config.config_hash()
    out_dir = config.out_dir
    os.makedirs(out_dir, exist_ok=True)
    kb_dir = os.path.join(out_dir, "kb")

    model = stage_kb(
        config.stix, kb_dir, min_examples=config.min_examples, config_hash=chash
    )
    usage = load_kb_usage(kb_dir)
    reports = load_reports(config.reports)
    if not reports:
        raise PipelineError(f"run: no reports found under {config.reports}")

    classify_path = os.path.join(out_dir, "classify.jsonl")
    stage_classify(
        model,
        reports,
        classify_path,
        threshold=config.threshold,
        workers=config.workers,
        config_hash=chash,
    )

    vectors = None
    if config.vectors is not None:
        vectors = load_word_vectors(config.vectors)

    features_path = os.path.join(out_dir, "features.csv")
    rows = stage_features(
        model,
        usage,
        reports,
        features_path,
        vectors=vectors,
        threshold=config.threshold,
        bins=config.bins,
        workers=config.workers,
        config_hash=chash,
    )
    layout = FeatureLayout(bins=config.bins)

    catalog = load_kb_catalog(kb_dir)
    annotations = load_annotations(config.annotations, catalog=catalog)
    labels = labels_for_rows(rows, annotations)

    model_path = os.path.join(out_dir, "relations.json")
    ensemble = stage_train(
        rows,
        layout,
        labels,
        model_path,
        train_config=config.train,
        config_hash=chash,
    )

    predictions_path = os.path.join(out_dir, "predictions.jsonl")
    predictions = stage_predict(
        ensemble, rows, layout, predictions_path, config_hash=chash
    )

    category_map = None
    if config.categories is not None:
        category_map = load_category_map(config.categories)
    patterns_path = os.path.join(out_dir, "patterns.csv")
    patterns = stage_mine(
        predictions,
        patterns_path,
        min_support=config.min_support,
        category_map=category_map,
        config_hash=chash,
    )

    return {
        "config_hash": chash,
        "kb_dir": kb_dir,
        "classify": classify_path,
        "features": features_path,
        "model": model_path,
        "predictions": predictions_path,
        "patterns": patterns_path,
        "n_reports": len(reports),
        "n_pairs": len(rows),
        "n_patterns": len(patterns),
    }
