"""ATT&CK STIX bundle ingestion.

Produces the technique catalog (with procedure-example sentences pulled
from `uses` relationship descriptions), the binary actor-usage matrix
backing the association-measure features, and the filtered multi-label
action dataset used to train the sentence classifier.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np

from .corpus import segment_sentences

logger = logging.getLogger(__name__)

CATALOG_FORMAT_VERSION = "1"

# STIX object id prefixes that count as actors in the usage matrix.
_ACTOR_PREFIXES = ("intrusion-set--", "malware--", "tool--", "campaign--")


class StixParseError(ValueError):
    """Raised when bundle bytes are not a usable STIX JSON bundle."""


class EmptyCatalogError(ValueError):
    """Raised when a bundle yields no usable attack-pattern objects."""


@dataclass(frozen=True)
class TechniqueRecord:
    id: str
    name: str
    procedure_examples: tuple[str, ...]


@dataclass(frozen=True)
class TechniqueCatalog:
    techniques: tuple[TechniqueRecord, ...]
    version: str

    def __contains__(self, technique_id: str) -> bool:
        return technique_id in self._by_id()

    def __len__(self) -> int:
        return len(self.techniques)

    def _by_id(self) -> dict[str, TechniqueRecord]:
        cached = getattr(self, "_index", None)
        if cached is None:
            cached = {rec.id: rec for rec in self.techniques}
            object.__setattr__(self, "_index", cached)
        return cached

    def get(self, technique_id: str) -> TechniqueRecord:
        return self._by_id()[technique_id]

    @property
    def technique_ids(self) -> tuple[str, ...]:
        return tuple(rec.id for rec in self.techniques)


@dataclass(eq=False)
class UsageMatrix:
    actors: tuple[str, ...]
    techniques: tuple[str, ...]
    cells: np.ndarray  # shape (len(actors), len(techniques)), values 0/1
    skipped_unknown: int = 0

    def technique_index(self, technique_id: str) -> int:
        return self.techniques.index(technique_id)


@dataclass(frozen=True)
class ActionDataset:
    examples: tuple[tuple[str, frozenset[str]], ...]
    techniques: tuple[str, ...]
    min_examples: int


def _load_bundle(bundle_bytes: bytes) -> list[dict]:
    try:
        text = bundle_bytes.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise StixParseError(
            f"bundle is not UTF-8 at byte offset {exc.start}"
        ) from exc
    try:
        bundle = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StixParseError(
            f"malformed bundle JSON at offset {exc.pos}: {exc.msg}"
        ) from exc
    if not isinstance(bundle, dict) or not isinstance(bundle.get("objects"), list):
        raise StixParseError("bundle JSON has no 'objects' list")
    return bundle["objects"]


def _is_excluded(obj: dict) -> bool:
    return bool(obj.get("revoked")) or bool(obj.get("x_mitre_deprecated"))


def _external_id(obj: dict) -> str | None:
    for ref in obj.get("external_references", ()):
        if ref.get("source_name") == "mitre-attack":
            ext = ref.get("external_id")
            if ext:
                return ext
    return None


def _pattern_map(objects: list[dict]) -> dict[str, tuple[str, str]]:
    """Map attack-pattern STIX ids to (parent technique id, object name),
    exclusions applied and sub-technique ids folded to their parent."""
    out: dict[str, tuple[str, str]] = {}
    for obj in objects:
        if obj.get("type") != "attack-pattern" or _is_excluded(obj):
            continue
        ext = _external_id(obj)
        name = (obj.get("name") or "").strip()
        if ext is None or not name:
            continue
        out[obj["id"]] = (ext.split(".")[0], name)
    return out


def parse_stix(bundle_bytes: bytes) -> TechniqueCatalog:
    """Parse a STIX 2.x bundle into a technique catalog.

    Revoked and deprecated objects are excluded; sub-techniques fold
    into their parent (id prefix rule), with the parent keeping its own
    name and inheriting the sub's procedure examples. Procedure-example
    sentences come from the descriptions of `uses` relationships whose
    source is an intrusion-set/malware/tool/campaign, split by the
    corpus segmenter, in bundle order.
    """
    objects = _load_bundle(bundle_bytes)
    patterns = _pattern_map(objects)
    if not patterns:
        raise EmptyCatalogError("bundle contains no usable attack-pattern objects")

    names: dict[str, str] = {}
    for obj in objects:
        stix_id = obj["id"] if obj.get("type") == "attack-pattern" else None
        if stix_id not in patterns:
            continue
        tid, name = patterns[stix_id]
        is_parent = "." not in (_external_id(obj) or ".")
        # A parent object's own name wins; otherwise first sub seen names it.
        if is_parent or tid not in names:
            names[tid] = name

    examples: dict[str, list[str]] = {tid: [] for tid in names}
    for obj in objects:
        if obj.get("type") != "relationship" or _is_excluded(obj):
            continue
        if obj.get("relationship_type") != "uses":
            continue
        if not str(obj.get("source_ref", "")).startswith(_ACTOR_PREFIXES):
            continue
        target = patterns.get(obj.get("target_ref"))
        if target is None:
            continue
        description = obj.get("description") or ""
        tid = target[0]
        for sentence in segment_sentences(description):
            examples[tid].append(sentence.text)

    version = "unknown"
    for obj in objects:
        if obj.get("type") == "x-mitre-collection" and obj.get("x_mitre_version"):
            version = str(obj["x_mitre_version"])
            break

    records = tuple(
        TechniqueRecord(
            id=tid, name=names[tid], procedure_examples=tuple(examples[tid])
        )
        for tid in sorted(names)
    )
    return TechniqueCatalog(techniques=records, version=version)


def build_usage_matrix(bundle_bytes: bytes, catalog: TechniqueCatalog) -> UsageMatrix:
    """Binary actor-by-technique usage matrix from `uses` relationships.

    Rows are actors (groups, software, campaigns) with at least one
    resolvable technique, in lexicographic actor-id order; columns are
    catalog techniques. Relationships whose technique cannot be resolved
    in the catalog are skipped and counted, not fatal.
    """
    objects = _load_bundle(bundle_bytes)
    patterns = _pattern_map(objects)

    actor_ids: dict[str, str] = {}
    for obj in objects:
        if _is_excluded(obj):
            continue
        stix_id = str(obj.get("id", ""))
        if not stix_id.startswith(_ACTOR_PREFIXES):
            continue
        actor_ids[stix_id] = _external_id(obj) or stix_id

    used: dict[str, set[str]] = {}
    skipped = 0
    for obj in objects:
        if obj.get("type") != "relationship" or _is_excluded(obj):
            continue
        if obj.get("relationship_type") != "uses":
            continue
        source = obj.get("source_ref")
        if source not in actor_ids:
            continue
        if not str(obj.get("target_ref", "")).startswith("attack-pattern--"):
            continue
        target = patterns.get(obj.get("target_ref"))
        if target is None or target[0] not in catalog:
            skipped += 1
            continue
        used.setdefault(actor_ids[source], set()).add(target[0])

    actors = tuple(sorted(used))
    techniques = catalog.technique_ids
    col = {tid: k for k, tid in enumerate(techniques)}
    cells = np.zeros((len(actors), len(techniques)), dtype=np.int8)
    for r, actor in enumerate(actors):
        for tid in used[actor]:
            cells[r, col[tid]] = 1
    if skipped:
        logger.warning("usage matrix: skipped %d relationships with unknown techniques", skipped)
    return UsageMatrix(
        actors=actors, techniques=techniques, cells=cells, skipped_unknown=skipped
    )


def build_action_dataset(
    catalog: TechniqueCatalog,
    min_examples: int = 20,
    extra=None,
) -> ActionDataset:
    """Merge procedure examples with extra manual mappings and filter out
    techniques with fewer than min_examples examples.

    Examples are keyed by exact sentence text, labels unioned. The
    count filter is a single pass over pre-drop counts, so raising
    min_examples can only shrink the retained technique set.
    """
    if min_examples < 1:
        raise ValueError(f"min_examples must be >= 1, got {min_examples}")

    merged: dict[str, set[str]] = {}
    for rec in catalog.techniques:
        for sentence in rec.procedure_examples:
            if not sentence.strip():
                continue
            merged.setdefault(sentence, set()).add(rec.id)

    if extra:
        unknown = sorted(
            {tid for _, labels in extra for tid in labels if tid not in catalog}
        )
        if unknown:
            raise ValueError(f"extra mappings reference unknown techniques: {unknown}")
        for sentence, labels in extra:
            if not sentence.strip() or not labels:
                continue
            merged.setdefault(sentence, set()).update(labels)

    counts: dict[str, int] = {}
    for labels in merged.values():
        for tid in labels:
            counts[tid] = counts.get(tid, 0) + 1
    retained = {tid for tid, n in counts.items() if n >= min_examples}

    examples = tuple(
        (sentence, frozenset(labels & retained))
        for sentence, labels in merged.items()
        if labels & retained
    )
    return ActionDataset(
        examples=examples,
        techniques=tuple(sorted(retained)),
        min_examples=min_examples,
    )


def catalog_to_dict(catalog: TechniqueCatalog) -> dict:
    return {
        "format_version": CATALOG_FORMAT_VERSION,
        "attack_version": catalog.version,
        "techniques": [
            {
                "id": rec.id,
                "name": rec.name,
                "procedure_examples": list(rec.procedure_examples),
            }
            for rec in catalog.techniques
        ],
    }


def catalog_from_dict(data: dict) -> TechniqueCatalog:
    records = tuple(
        TechniqueRecord(
            id=t["id"],
            name=t["name"],
            procedure_examples=tuple(t["procedure_examples"]),
        )
        for t in data["techniques"]
    )
    return TechniqueCatalog(techniques=records, version=data["attack_version"])


def usage_to_dict(matrix: UsageMatrix) -> dict:
    return {
        "format_version": CATALOG_FORMAT_VERSION,
        "actors": list(matrix.actors),
        "techniques": list(matrix.techniques),
        "cells": matrix.cells.astype(int).tolist(),
        "skipped_unknown": matrix.skipped_unknown,
    }


def usage_from_dict(data: dict) -> UsageMatrix:
    return UsageMatrix(
        actors=tuple(data["actors"]),
        techniques=tuple(data["techniques"]),
        cells=np.asarray(data["cells"], dtype=np.int8),
        skipped_unknown=int(data.get("skipped_unknown", 0)),
    )
