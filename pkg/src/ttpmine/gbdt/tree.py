"""Depth-limited regression trees on boosting residuals.

Exact greedy splits via the selected kernel; leaves take clipped
Newton-step values (sum of residuals over sum of hessians). Nodes are
plain dicts so trees serialize to JSON as-is: a split is
{"feature", "threshold", "left", "right"}, a leaf is {"value"}.
"""

from __future__ import annotations

import numpy as np

from .kernel import best_split as _default_best_split

MIN_GAIN = 1e-12
LEAF_VALUE_CAP = 10.0
_HESSIAN_EPS = 1e-16


def _leaf(residuals: np.ndarray, hessians: np.ndarray, idx: np.ndarray) -> dict:
    s_h = float(hessians[idx].sum())
    if s_h < _HESSIAN_EPS:
        value = 0.0
    else:
        value = float(residuals[idx].sum()) / s_h
    value = float(np.clip(value, -LEAF_VALUE_CAP, LEAF_VALUE_CAP))
    return {"value": value}


def fit_tree(
    X: np.ndarray,
    residuals: np.ndarray,
    hessians: np.ndarray,
    max_depth: int,
    split_fn=None,
) -> dict:
    """Fit one regression tree; feature indices refer to X's columns."""
    if split_fn is None:
        split_fn = _default_best_split
    X = np.ascontiguousarray(X, dtype=np.float64)
    residuals = np.asarray(residuals, dtype=np.float64)
    hessians = np.asarray(hessians, dtype=np.float64)

    def build(idx: np.ndarray, depth: int) -> dict:
        if depth >= max_depth or idx.size < 2:
            return _leaf(residuals, hessians, idx)
        rows = X[idx]
        order = np.argsort(rows, axis=0, kind="stable")
        vals = np.asfortranarray(np.take_along_axis(rows, order, axis=0))
        grads = np.asfortranarray(residuals[idx][order])
        feat, pos, gain = split_fn(vals, grads)
        if feat < 0 or gain <= MIN_GAIN:
            return _leaf(residuals, hessians, idx)
        a = float(vals[pos, feat])
        b = float(vals[pos + 1, feat])
        threshold = (a + b) / 2.0
        if threshold >= b:
            # Adjacent floats can round the midpoint up to b; fall back
            # to the left value so the partition matches the scan.
            threshold = a
        mask = rows[:, feat] <= threshold
        return {
            "feature": int(feat),
            "threshold": threshold,
            "left": build(idx[mask], depth + 1),
            "right": build(idx[~mask], depth + 1),
        }

    return build(np.arange(X.shape[0]), 0)


def predict_tree(node: dict, X: np.ndarray) -> np.ndarray:
    """Vectorized tree evaluation over rows of X."""
    X = np.asarray(X, dtype=np.float64)
    out = np.empty(X.shape[0], dtype=np.float64)

    def walk(nd: dict, idx: np.ndarray) -> None:
        if "value" in nd:
            out[idx] = nd["value"]
            return
        mask = X[idx, nd["feature"]] <= nd["threshold"]
        walk(nd["left"], idx[mask])
        walk(nd["right"], idx[~mask])

    walk(node, np.arange(X.shape[0]))
    return out


def remap_tree_features(node: dict, mapping: np.ndarray) -> dict:
    """Rewrite local (masked) feature indices to global slot indices."""
    if "value" in node:
        return node
    return {
        "feature": int(mapping[node["feature"]]),
        "threshold": node["threshold"],
        "left": remap_tree_features(node["left"], mapping),
        "right": remap_tree_features(node["right"], mapping),
    }


def tree_max_feature(node: dict) -> int:
    if "value" in node:
        return -1
    return max(
        node["feature"],
        tree_max_feature(node["left"]),
        tree_max_feature(node["right"]),
    )
