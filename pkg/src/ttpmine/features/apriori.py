"""Association-rule interestingness measures over the binary usage matrix.

Nine measures per ordered technique pair, each with a pinned value for
its degenerate cases so tree learners always see finite numbers, plus a
per-measure one-hot embedding over equal-width bins of the clamped range.
"""

from __future__ import annotations

import math

import numpy as np

from ..attack_kb import UsageMatrix

METRIC_NAMES: tuple[str, ...] = (
    "support",
    "confidence",
    "pmi",
    "phi",
    "causal_support",
    "jaccard",
    "causal_confidence",
    "conviction",
    "added_value",
)

PMI_FLOOR = -20.0
PMI_CEIL = 20.0
CONVICTION_CAP = 100.0

# Clamp ranges for the equal-width one-hot binning.
METRIC_RANGES: dict[str, tuple[float, float]] = {
    "support": (0.0, 1.0),
    "confidence": (0.0, 1.0),
    "pmi": (PMI_FLOOR, PMI_CEIL),
    "phi": (-1.0, 1.0),
    "causal_support": (0.0, 1.0),
    "jaccard": (0.0, 1.0),
    "causal_confidence": (0.0, 1.0),
    "conviction": (0.0, CONVICTION_CAP),
    "added_value": (-1.0, 1.0),
}


def pair_measures(x_col: np.ndarray, y_col: np.ndarray) -> np.ndarray:
    """The nine measures from two aligned binary columns.

    Degenerate rules: zero-denominator conditionals are 0; PMI is 0 when
    P(x)P(y)=0 and -20 when the pair never co-occurs; conviction caps at
    100 when confidence is 1; phi is 0 when any marginal is 0 or 1.
    """
    x = np.asarray(x_col, dtype=np.float64)
    y = np.asarray(y_col, dtype=np.float64)
    n = x.size
    if n == 0:
        raise ValueError("usage matrix has no rows")

    px = float(x.sum()) / n
    py = float(y.sum()) / n
    pxy = float((x * y).sum()) / n
    p_nx_ny = float(((1 - x) * (1 - y)).sum()) / n

    support = pxy
    confidence = pxy / px if px > 0 else 0.0

    if px * py == 0.0:
        pmi = 0.0
    elif pxy == 0.0:
        pmi = PMI_FLOOR
    else:
        pmi = math.log2(pxy / (px * py))

    if px in (0.0, 1.0) or py in (0.0, 1.0):
        phi = 0.0
    else:
        phi = (pxy - px * py) / math.sqrt(px * py * (1 - px) * (1 - py))

    causal_support = pxy + p_nx_ny

    denom = px + py - pxy
    jaccard = pxy / denom if denom > 0 else 0.0

    p_nx_given_ny = p_nx_ny / (1 - py) if py < 1.0 else 0.0
    causal_confidence = 0.5 * (confidence + p_nx_given_ny)

    if confidence >= 1.0:
        conviction = CONVICTION_CAP
    else:
        conviction = (1 - py) / (1 - confidence)

    added_value = confidence - py

    return np.array(
        [
            support,
            confidence,
            pmi,
            phi,
            causal_support,
            jaccard,
            causal_confidence,
            conviction,
            added_value,
        ],
        dtype=np.float64,
    )


def bin_index(value: float, name: str, bins: int) -> int:
    lo, hi = METRIC_RANGES[name]
    v = min(max(value, lo), hi)
    if v >= hi:
        return bins - 1
    return int((v - lo) / (hi - lo) * bins)


def apriori_features(um: UsageMatrix, pair: tuple[str, str], bins: int = 10) -> np.ndarray:
    """9 raw measures followed by 9 one-hot blocks of `bins` slots each."""
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    tx, ty = pair
    try:
        ix = um.techniques.index(tx)
        iy = um.techniques.index(ty)
    except ValueError as exc:
        raise ValueError(f"technique not in usage matrix: {exc}") from exc
    if um.cells.shape[0] == 0:
        raise ValueError("usage matrix has no rows")

    raw = pair_measures(um.cells[:, ix], um.cells[:, iy])
    out = np.zeros(9 + 9 * bins, dtype=np.float64)
    out[:9] = raw
    for m, name in enumerate(METRIC_NAMES):
        out[9 + m * bins + bin_index(float(raw[m]), name, bins)] = 1.0
    return out
