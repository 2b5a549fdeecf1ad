"""Pure-numpy split-scan kernel.

Bit-compatible with the compiled kernel: np.cumsum accumulates
sequentially exactly like the running sum in the C loop, the gain
expression keeps the same operation order, and the feature-major
first-maximum argmax reproduces the strictly-greater scan order
(lowest feature index, then lowest position, wins ties).
"""

from __future__ import annotations

import numpy as np


def best_split(vals: np.ndarray, grads: np.ndarray):
    """Best variance-reduction split over presorted columns.

    vals/grads: (m, F) with each column sorted ascending by value and
    grads carrying the matching row's gradient. A split at position p
    puts sorted rows 0..p in the left child. Returns (feature, position,
    gain); feature -1 means no valid split (all column values equal).
    """
    m, nf = vals.shape
    if m < 2 or nf == 0:
        return -1, -1, 0.0

    acc = np.cumsum(grads, axis=0)
    gt = acc[-1]
    base = gt * gt / float(m)

    gl = acc[:-1]
    nl = np.arange(1, m, dtype=np.float64)[:, None]
    nr = np.arange(m - 1, 0, -1, dtype=np.float64)[:, None]
    gr = gt[None, :] - gl
    gain = gl * gl / nl + gr * gr / nr - base[None, :]

    invalid = vals[1:] <= vals[:-1]
    gain[invalid] = -np.inf

    flat = gain.ravel(order="F")
    best = int(np.argmax(flat))
    best_gain = flat[best]
    if best_gain == -np.inf:
        return -1, -1, 0.0
    return best // (m - 1), best % (m - 1), float(best_gain)
