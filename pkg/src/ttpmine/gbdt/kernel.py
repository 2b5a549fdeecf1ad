"""Split-kernel backend selection: compiled extension when built, numpy
fallback otherwise. Both honor one contract and produce identical
outputs, so which one loads never changes results, only speed."""

from __future__ import annotations

from . import _split_py

try:  # pragma: no cover - depends on whether the extension was built
    from . import _split_cy

    best_split = _split_cy.best_split
    BACKEND = "cython"
except ImportError:  # pragma: no cover
    _split_cy = None
    best_split = _split_py.best_split
    BACKEND = "python"


def available_backends() -> dict[str, object]:
    """Name → best_split callable for every importable backend."""
    out = {"python": _split_py.best_split}
    if _split_cy is not None:
        out["cython"] = _split_cy.best_split
    return out
