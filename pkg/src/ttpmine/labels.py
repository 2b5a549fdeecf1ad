"""Temporal relation label constants shared across the package."""

BEFORE = "BEFORE"
SIMULTANEOUS_OVERLAP = "SIMULTANEOUS_OVERLAP"
CONCURRENT = "CONCURRENT"
NULL = "NULL"

# Canonical order: positive relations first, NULL last.
ALL_LABELS: tuple[str, ...] = (BEFORE, SIMULTANEOUS_OVERLAP, CONCURRENT, NULL)
POSITIVE_LABELS: tuple[str, ...] = (BEFORE, SIMULTANEOUS_OVERLAP, CONCURRENT)

# Relations that do not distinguish argument order.
SYMMETRIC_LABELS: frozenset[str] = frozenset({SIMULTANEOUS_OVERLAP, CONCURRENT})
