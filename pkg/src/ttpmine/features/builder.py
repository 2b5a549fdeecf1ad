"""Assemble PairFeatureVectors and read/write the feature-matrix CSV."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..attack_kb import UsageMatrix
from ..corpus import Report
from ..ctfidf import ReportPrediction, TOP_K_SCORES
from ..embeddings import WordVectors
from .apriori import apriori_features
from .discourse import coref_links, discourse_features
from .layout import FeatureLayout
from .markers import DEFAULT_LEXICON, MarkerLexicon, marker_features
from .sentence import sentence_features


@dataclass(frozen=True)
class PairFeatureVector:
    report_id: str
    tx: str
    ty: str
    values: np.ndarray
    layout_version: str
    # True when F4 could not be computed (technique missing from the
    # usage matrix, or no matrix) and those slots were zeroed.
    f4_missing: bool = False

    @property
    def pair(self) -> tuple[str, str]:
        return (self.tx, self.ty)


def build_feature_vector(
    report: Report,
    pair: tuple[str, str],
    report_prediction: ReportPrediction,
    um: UsageMatrix | None,
    wv: WordVectors | None = None,
    lexicon: MarkerLexicon = DEFAULT_LEXICON,
    bins: int = 10,
    links=None,
    layout: FeatureLayout | None = None,
) -> PairFeatureVector:
    """Concatenate [default ++ f1 ++ f2 ++ f3 ++ f4] for one ordered pair.

    Sentence sets come from the prediction's threshold hits. A pair
    technique absent from the usage matrix zeroes the f4 slots and sets
    the f4_missing flag instead of failing.
    """
    if layout is None:
        layout = FeatureLayout(bins=bins)
    elif layout.bins != bins:
        raise ValueError(f"layout bins {layout.bins} != requested bins {bins}")
    tx, ty = pair
    if tx == ty:
        raise ValueError(f"self-pair ({tx}, {ty}) has no feature vector")
    if links is None:
        links = coref_links(report)

    tx_sent = report_prediction.hit_sentences.get(tx, ())
    ty_sent = report_prediction.hit_sentences.get(ty, ())

    default = np.zeros(2 * TOP_K_SCORES, dtype=np.float64)
    if tx in report_prediction.techniques:
        default[:TOP_K_SCORES] = report_prediction.top_scores[tx]
    if ty in report_prediction.techniques:
        default[TOP_K_SCORES:] = report_prediction.top_scores[ty]

    f1 = marker_features(report, tx_sent, ty_sent, lexicon)
    f2 = sentence_features(report, tx_sent, ty_sent, wv, links=links)
    f3 = discourse_features(report, tx_sent, ty_sent, links)

    f4_missing = (
        um is None
        or um.cells.shape[0] == 0
        or tx not in um.techniques
        or ty not in um.techniques
    )
    if f4_missing:
        f4 = np.zeros(9 + 9 * bins, dtype=np.float64)
    else:
        f4 = apriori_features(um, pair, bins=bins)

    values = np.concatenate([default, f1, f2, f3, f4])
    assert values.shape[0] == layout.total
    return PairFeatureVector(
        report_id=report.report_id,
        tx=tx,
        ty=ty,
        values=values,
        layout_version=layout.version,
        f4_missing=bool(f4_missing),
    )


def build_report_features(
    report: Report,
    report_prediction: ReportPrediction,
    universe,
    um: UsageMatrix | None,
    wv: WordVectors | None = None,
    lexicon: MarkerLexicon = DEFAULT_LEXICON,
    bins: int = 10,
    layout: FeatureLayout | None = None,
) -> list[PairFeatureVector]:
    """Vectors for every ordered pair in the universe, sharing one coref
    pass over the report."""
    if layout is None:
        layout = FeatureLayout(bins=bins)
    links = coref_links(report)
    return [
        build_feature_vector(
            report,
            pair,
            report_prediction,
            um,
            wv,
            lexicon=lexicon,
            bins=bins,
            links=links,
            layout=layout,
        )
        for pair in universe
    ]


_META_COLUMNS = ("report_id", "tx", "ty", "f4_missing")


def features_to_csv(vectors, layout: FeatureLayout) -> str:
    """CSV with one header row naming every slot; floats via repr so a
    read-back is bit-exact."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([*_META_COLUMNS, *layout.names])
    for fv in vectors:
        if fv.layout_version != layout.version:
            raise ValueError(
                f"vector layout {fv.layout_version} != {layout.version}"
            )
        writer.writerow(
            [
                fv.report_id,
                fv.tx,
                fv.ty,
                int(fv.f4_missing),
                *(repr(float(v)) for v in fv.values),
            ]
        )
    return buf.getvalue()


def write_features_csv(vectors, layout: FeatureLayout, path: str | Path) -> None:
    Path(path).write_text(features_to_csv(vectors, layout), encoding="utf-8")


def features_from_csv(text: str, layout: FeatureLayout) -> list[PairFeatureVector]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    expected = [*_META_COLUMNS, *layout.names]
    if header != expected:
        raise ValueError(
            "feature CSV header does not match the layout "
            f"(expected {len(expected)} columns, got {0 if header is None else len(header)}); "
            "re-run the features stage with the same configuration"
        )
    out = []
    for row in reader:
        if not row:
            continue
        report_id, tx, ty, missing = row[:4]
        values = np.array([float(v) for v in row[4:]], dtype=np.float64)
        out.append(
            PairFeatureVector(
                report_id=report_id,
                tx=tx,
                ty=ty,
                values=values,
                layout_version=layout.version,
                f4_missing=bool(int(missing)),
            )
        )
    return out


def read_features_csv(path: str | Path, layout: FeatureLayout) -> list[PairFeatureVector]:
    return features_from_csv(Path(path).read_text(encoding="utf-8"), layout)
