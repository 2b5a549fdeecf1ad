"""Shared builders for hand-assembled STIX bundles, reports, predictions
and feature vectors used across the test modules."""

from __future__ import annotations

import itertools
import json
from pathlib import Path

import numpy as np

from ttpmine.corpus import make_report
from ttpmine.ctfidf import TOP_K_SCORES, ReportPrediction
from ttpmine.features.builder import PairFeatureVector

E2E_DIR = Path(__file__).parent / "data" / "e2e"
REPO_ROOT = Path(__file__).parent.parent

_rel_ids = itertools.count()


def attack_pattern(ext_id: str, name: str, *, revoked: bool = False,
                   deprecated: bool = False) -> dict:
    obj = {
        "type": "attack-pattern",
        "id": "attack-pattern--" + ext_id.lower().replace(".", "-"),
        "name": name,
        "external_references": [
            {"source_name": "mitre-attack", "external_id": ext_id}
        ],
    }
    if revoked:
        obj["revoked"] = True
    if deprecated:
        obj["x_mitre_deprecated"] = True
    return obj


def actor(ext_id: str, kind: str = "intrusion-set", name: str = "some actor") -> dict:
    return {
        "type": kind,
        "id": f"{kind}--{ext_id.lower()}",
        "name": name,
        "external_references": [
            {"source_name": "mitre-attack", "external_id": ext_id}
        ],
    }


def uses(source: dict, target: dict, description: str = "",
         *, revoked: bool = False) -> dict:
    obj = {
        "type": "relationship",
        "id": f"relationship--{next(_rel_ids):08d}",
        "relationship_type": "uses",
        "source_ref": source["id"],
        "target_ref": target["id"],
        "description": description,
    }
    if revoked:
        obj["revoked"] = True
    return obj


def bundle(*objects: dict, collection_version: str | None = None) -> bytes:
    objs = list(objects)
    if collection_version is not None:
        objs.insert(
            0,
            {
                "type": "x-mitre-collection",
                "id": "x-mitre-collection--fixture",
                "x_mitre_version": collection_version,
            },
        )
    payload = {"type": "bundle", "id": "bundle--fixture", "objects": objs}
    return json.dumps(payload).encode("utf-8")


def make_fv(values, report_id: str = "r1", tx: str = "TA", ty: str = "TB",
            layout_version: str = "test-layout",
            f4_missing: bool = False) -> PairFeatureVector:
    return PairFeatureVector(
        report_id=report_id,
        tx=tx,
        ty=ty,
        values=np.asarray(values, dtype=np.float64),
        layout_version=layout_version,
        f4_missing=f4_missing,
    )


# Word pool for random reports: nouns, verbs, markers, connectives and
# referring words so every feature family sees live inputs.
_NOUNS = [
    "loader", "beacon", "payload", "macro", "registry", "service",
    "archive", "credential", "proxy", "implant", "script", "binary",
]
_VERBS = ["executed", "dropped", "copied", "queried", "spawned", "staged"]
_EXTRAS = [
    "then", "later", "during", "while", "simultaneously", "concurrently",
    "if", "otherwise", "it", "they", "this", "that", "meanwhile", "quietly",
]


def random_report(rng: np.random.Generator, report_id: str,
                  n_sentences: tuple[int, int] = (3, 9)):
    """A report of short random sentences, one sentence per line."""
    count = int(rng.integers(n_sentences[0], n_sentences[1] + 1))
    lines = []
    for _ in range(count):
        length = int(rng.integers(3, 8))
        words = [
            str(rng.choice(_NOUNS + _VERBS + _EXTRAS)) for _ in range(length)
        ]
        lines.append(" ".join(words) + ".")
    return make_report(report_id, "\n".join(lines))


def random_prediction(rng: np.random.Generator, report, tx: str, ty: str,
                      threshold: float = 0.95) -> ReportPrediction:
    """Random but well-formed technique detections for a pair of ids."""
    n = len(report.sentences)
    techniques = []
    top_scores = {}
    hit_sentences = {}
    for tid in (tx, ty):
        scores = np.zeros(TOP_K_SCORES, dtype=np.float64)
        if rng.random() < 0.85 and n > 0:
            k = int(rng.integers(1, min(3, n) + 1))
            hits = sorted(
                int(i) for i in rng.choice(n, size=k, replace=False)
            )
            raw = np.sort(rng.random(min(TOP_K_SCORES, n)))[::-1]
            raw[0] = 1.0
            scores[: raw.size] = raw
            techniques.append(tid)
            hit_sentences[tid] = tuple(hits)
        top_scores[tid] = tuple(float(v) for v in scores)
    return ReportPrediction(
        report_id=report.report_id,
        threshold=threshold,
        techniques=frozenset(techniques),
        top_scores=top_scores,
        hit_sentences=hit_sentences,
    )


def e2e_config_dict(out_dir: str | Path) -> dict:
    """The bundled pipeline config with input paths made absolute."""
    data = json.loads((E2E_DIR / "config.json").read_text(encoding="utf-8"))
    for key in ("stix", "reports", "annotations"):
        data[key] = str(REPO_ROOT / data[key])
    data["out_dir"] = str(out_dir)
    return data


def tree_features(node: dict) -> set[int]:
    """Every feature index referenced by a serialized tree."""
    if "value" in node:
        return set()
    return (
        {node["feature"]}
        | tree_features(node["left"])
        | tree_features(node["right"])
    )
