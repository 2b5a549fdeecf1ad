"""One-vs-rest gradient-boosted trees over pair feature vectors.

Per relation label, a binary GBDT with logistic loss: initial score is
the log-odds of the label's (post-downsampling) base rate, each round
fits a regression tree to residuals y - p with Newton-step leaves.
Rows labeled only NULL are downsampled per positive label; training is
deterministic under a fixed seed, and training loss is checked to be
non-increasing every round.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..labels import ALL_LABELS, NULL, POSITIVE_LABELS
from .tree import fit_tree, predict_tree, remap_tree_features, tree_max_feature

logger = logging.getLogger(__name__)

ENSEMBLE_FORMAT_VERSION = "1"

_PRIOR_CLAMP = 1e-6
_LOSS_TOLERANCE = 1e-9


class GbdtTrainingError(ValueError):
    """Raised for invalid training inputs or a broken loss contract."""


@dataclass(frozen=True)
class TrainConfig:
    trees: int = 200
    max_depth: int = 3
    learning_rate: float = 0.1
    negative_downsample_ratio: float = 10.0
    seed: int = 0
    decision_threshold: float = 0.5

    def __post_init__(self):
        if self.trees < 1:
            raise ValueError(f"trees must be >= 1, got {self.trees}")
        if self.max_depth < 1:
            raise ValueError(f"max_depth must be >= 1, got {self.max_depth}")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError(f"learning_rate must be in (0, 1], got {self.learning_rate}")
        if self.negative_downsample_ratio <= 0:
            raise ValueError(
                f"negative_downsample_ratio must be > 0, got {self.negative_downsample_ratio}"
            )
        if not 0.0 < self.decision_threshold < 1.0:
            raise ValueError(
                f"decision_threshold must be in (0, 1), got {self.decision_threshold}"
            )

    def to_dict(self) -> dict:
        return {
            "trees": self.trees,
            "max_depth": self.max_depth,
            "learning_rate": self.learning_rate,
            "negative_downsample_ratio": self.negative_downsample_ratio,
            "seed": self.seed,
            "decision_threshold": self.decision_threshold,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        return cls(**{k: data[k] for k in cls.__dataclass_fields__ if k in data})


@dataclass
class LabelModel:
    label: str
    init_score: float
    trees: list[dict]
    degenerate: bool = False
    loss_curve: list[float] = field(default_factory=list)


@dataclass
class GbdtEnsemble:
    models: dict[str, LabelModel]
    layout_version: str
    config: TrainConfig
    n_features: int

    def raw_score(self, label: str, X: np.ndarray) -> np.ndarray:
        model = self.models[label]
        score = np.full(X.shape[0], model.init_score, dtype=np.float64)
        for tree in model.trees:
            score += self.config.learning_rate * predict_tree(tree, X)
        return score


@dataclass(frozen=True)
class RelationPrediction:
    tx: str
    ty: str
    probabilities: dict[str, float]
    labels: frozenset[str]
    report_id: str = ""

    @property
    def pair(self) -> tuple[str, str]:
        return (self.tx, self.ty)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _log_loss(y: np.ndarray, p: np.ndarray) -> float:
    p = np.clip(p, 1e-15, 1.0 - 1e-15)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def _clamped_log_odds(rate: float) -> float:
    rate = min(max(rate, _PRIOR_CLAMP), 1.0 - _PRIOR_CLAMP)
    return float(np.log(rate / (1.0 - rate)))


def _validate_features(X: np.ndarray) -> None:
    bad = np.argwhere(np.isnan(X))
    if bad.size:
        row, slot = bad[0]
        raise GbdtTrainingError(f"NaN feature value at row {row}, slot {slot}")


def _downsample_rows(
    label_index: int,
    label_sets,
    y: np.ndarray,
    config: TrainConfig,
) -> np.ndarray:
    """Row indices for one positive label's model: every non-NULL-only
    row, plus a deterministic sample of NULL-only rows capped at
    ratio * positive count."""
    null_only = np.array(
        [i for i, labs in enumerate(label_sets) if set(labs) == {NULL}], dtype=np.int64
    )
    rest = np.array(
        [i for i, labs in enumerate(label_sets) if set(labs) != {NULL}], dtype=np.int64
    )
    cap = int(config.negative_downsample_ratio * int(y.sum()))
    if null_only.size <= cap:
        keep_null = null_only
    else:
        rng = np.random.default_rng((config.seed, label_index))
        picked = rng.permutation(null_only.size)[:cap]
        keep_null = null_only[np.sort(picked)]
    return np.sort(np.concatenate([rest, keep_null]))


def train(
    features,
    labels,
    config: TrainConfig,
    feature_groups=None,
    layout=None,
) -> GbdtEnsemble:
    """Fit the four one-vs-rest label models.

    `features` is a list of PairFeatureVector with one shared layout;
    `labels` the aligned label sets. `feature_groups` restricts split
    candidates to those layout groups (default slots always active);
    trees store global slot indices either way.
    """
    if not features:
        raise GbdtTrainingError("no training vectors")
    if len(features) != len(labels):
        raise GbdtTrainingError(
            f"{len(features)} vectors vs {len(labels)} label sets"
        )
    versions = {fv.layout_version for fv in features}
    if len(versions) != 1:
        raise GbdtTrainingError(f"mixed layout versions: {sorted(versions)}")
    layout_version = versions.pop()

    X = np.vstack([fv.values for fv in features]).astype(np.float64)
    _validate_features(X)

    if feature_groups is not None:
        if layout is None:
            raise GbdtTrainingError("feature_groups needs the layout")
        if layout.version != layout_version:
            raise GbdtTrainingError(
                f"layout {layout.version} does not match vectors ({layout_version})"
            )
        active = np.flatnonzero(layout.mask(feature_groups))
    else:
        active = np.arange(X.shape[1])

    models: dict[str, LabelModel] = {}
    for label_index, label in enumerate(ALL_LABELS):
        y = np.array([1.0 if label in labs else 0.0 for labs in labels])
        if label in POSITIVE_LABELS:
            rows = _downsample_rows(label_index, labels, y, config)
        else:
            rows = np.arange(len(labels))
        y_sub = y[rows]
        X_sub = X[np.ix_(rows, active)]

        n_pos = int(y_sub.sum())
        if n_pos == 0 or n_pos == y_sub.size:
            rate = n_pos / y_sub.size if y_sub.size else 0.0
            logger.warning(
                "label %s has %s positives in training data; "
                "model degenerates to the prior",
                label,
                "no" if n_pos == 0 else "only",
            )
            models[label] = LabelModel(
                label=label,
                init_score=_clamped_log_odds(rate),
                trees=[],
                degenerate=True,
            )
            continue

        init = _clamped_log_odds(n_pos / y_sub.size)
        score = np.full(y_sub.size, init, dtype=np.float64)
        trees: list[dict] = []
        losses = [_log_loss(y_sub, _sigmoid(score))]
        for _ in range(config.trees):
            p = _sigmoid(score)
            residuals = y_sub - p
            hessians = p * (1.0 - p)
            tree = fit_tree(X_sub, residuals, hessians, config.max_depth)
            score = score + config.learning_rate * predict_tree(tree, X_sub)
            loss = _log_loss(y_sub, _sigmoid(score))
            if loss > losses[-1] + _LOSS_TOLERANCE:
                raise GbdtTrainingError(
                    f"label {label}: training loss increased "
                    f"({losses[-1]:.12f} -> {loss:.12f}) at round {len(trees) + 1}"
                )
            losses.append(loss)
            trees.append(remap_tree_features(tree, active))
        models[label] = LabelModel(
            label=label, init_score=init, trees=trees, loss_curve=losses
        )

    return GbdtEnsemble(
        models=models,
        layout_version=layout_version,
        config=config,
        n_features=X.shape[1],
    )


def predict(model: GbdtEnsemble, fv) -> RelationPrediction:
    """Per-label probabilities plus the decided label set (positives at
    the decision threshold, NULL as fallback)."""
    if fv.layout_version != model.layout_version:
        raise ValueError(
            f"feature layout {fv.layout_version} does not match the model "
            f"({model.layout_version}); re-extract features or retrain"
        )
    X = fv.values[None, :]
    probabilities = {
        label: float(_sigmoid(model.raw_score(label, X))[0]) for label in ALL_LABELS
    }
    decided = frozenset(
        lab
        for lab in POSITIVE_LABELS
        if probabilities[lab] >= model.config.decision_threshold
    )
    if not decided:
        decided = frozenset({NULL})
    return RelationPrediction(
        tx=fv.tx,
        ty=fv.ty,
        probabilities=probabilities,
        labels=decided,
        report_id=fv.report_id,
    )


def predict_batch(model: GbdtEnsemble, features) -> list[RelationPrediction]:
    return [predict(model, fv) for fv in features]


def ensemble_to_dict(model: GbdtEnsemble) -> dict:
    return {
        "format_version": ENSEMBLE_FORMAT_VERSION,
        "layout_version": model.layout_version,
        "n_features": model.n_features,
        "config": model.config.to_dict(),
        "labels": {
            label: {
                "init_score": lm.init_score,
                "degenerate": lm.degenerate,
                "trees": lm.trees,
            }
            for label, lm in model.models.items()
        },
    }


def ensemble_from_dict(data: dict) -> GbdtEnsemble:
    config = TrainConfig.from_dict(data["config"])
    models = {
        label: LabelModel(
            label=label,
            init_score=float(entry["init_score"]),
            trees=list(entry["trees"]),
            degenerate=bool(entry["degenerate"]),
        )
        for label, entry in data["labels"].items()
    }
    n_features = int(data["n_features"])
    for lm in models.values():
        for tree in lm.trees:
            if tree_max_feature(tree) >= n_features:
                raise ValueError("tree references a feature beyond the layout")
    return GbdtEnsemble(
        models=models,
        layout_version=data["layout_version"],
        config=config,
        n_features=n_features,
    )


def save_ensemble(model: GbdtEnsemble, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(ensemble_to_dict(model), sort_keys=True), encoding="utf-8"
    )


def load_ensemble(path: str | Path) -> GbdtEnsemble:
    return ensemble_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
