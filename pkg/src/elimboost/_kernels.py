"""Hot inner-loop kernels, in two interchangeable implementations.

The numba-compiled path is used by default.  Setting the environment
variable ``ELIMBOOST_DISABLE_NUMBA=1`` before import (or running without
numba installed) selects the pure-numpy fallback.  Both paths are exposed
(`NUMPY_KERNELS`, `NUMBA_KERNELS`) so the test suite can compare them and
``benchmarks/bench_kernels.py`` can time them side by side.

All kernels operate on 1-based integer label arrays (values in 1..m) and
row-major float64/int64 buffers.
"""

import math
import os
from typing import Callable, NamedTuple, Optional

import numpy as np

_ENV_FLAG = "ELIMBOOST_DISABLE_NUMBA"


class KernelSet(NamedTuple):
    name: str
    best_scan: Callable
    reweight: Callable
    score_update: Callable
    every_row_has_negative: Callable
    threshold_scores: Callable


# ---------------------------------------------------------------------------
# pure numpy


def _best_scan_numpy(realized, y, d):
    """Index and edge of the pool row maximizing sum((2*[h==y]-1)*d).

    Ties break toward the lowest index (the pool's canonical order).
    """
    edges = (2.0 * (realized == y) - 1.0) @ d
    best = int(np.argmax(edges))
    return best, float(edges[best])


def _reweight_numpy(d, labels, y, alpha, m):
    """Exponential reweight; returns the renormalized weights and the normalizer."""
    w = d * np.where(labels == y, math.exp(-alpha * (m - 1)), math.exp(alpha))
    z = float(w.sum())
    return w / z, z


def _score_update_numpy(votes, margins, labels, alpha, m):
    """Add one weighted round to the vote and margin tables, in place."""
    rows = np.arange(votes.shape[0])
    votes[rows, labels - 1] += alpha
    margins -= alpha
    margins[rows, labels - 1] += alpha * m


def _every_row_has_negative_numpy(margins):
    return bool((margins < 0.0).any(axis=1).all())


def _threshold_scores_numpy(proj, thresholds, above, below, alphas, m):
    """Margin table accumulated from a sequence of threshold rounds.

    ``proj[i]`` holds the i-th round's projection values for every point;
    the point gets ``above[i]`` when its projection >= ``thresholds[i]``.
    """
    n = proj.shape[1]
    out = np.zeros((n, m))
    rows = np.arange(n)
    for i in range(proj.shape[0]):
        labels = np.where(proj[i] >= thresholds[i], above[i], below[i])
        out -= alphas[i]
        out[rows, labels - 1] += alphas[i] * m
    return out


NUMPY_KERNELS = KernelSet(
    "numpy",
    _best_scan_numpy,
    _reweight_numpy,
    _score_update_numpy,
    _every_row_has_negative_numpy,
    _threshold_scores_numpy,
)


# ---------------------------------------------------------------------------
# numba

try:
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba
    njit = None

NUMBA_KERNELS: Optional[KernelSet] = None

if njit is not None:

    @njit(cache=True)
    def _best_scan_numba(realized, y, d):
        n_hyp, n_obs = realized.shape
        best = 0
        best_edge = -2.0
        for h in range(n_hyp):
            acc = 0.0
            for p in range(n_obs):
                if realized[h, p] == y[p]:
                    acc += d[p]
                else:
                    acc -= d[p]
            if acc > best_edge:
                best_edge = acc
                best = h
        return best, best_edge

    @njit(cache=True)
    def _reweight_numba(d, labels, y, alpha, m):
        n = d.shape[0]
        hit = math.exp(-alpha * (m - 1))
        miss = math.exp(alpha)
        w = np.empty(n)
        z = 0.0
        for p in range(n):
            w[p] = d[p] * (hit if labels[p] == y[p] else miss)
            z += w[p]
        for p in range(n):
            w[p] /= z
        return w, z

    @njit(cache=True)
    def _score_update_numba(votes, margins, labels, alpha, m):
        n = votes.shape[0]
        for p in range(n):
            votes[p, labels[p] - 1] += alpha
            for c in range(m):
                margins[p, c] -= alpha
            margins[p, labels[p] - 1] += alpha * m

    @njit(cache=True)
    def _every_row_has_negative_numba(margins):
        n, m = margins.shape
        for p in range(n):
            found = False
            for c in range(m):
                if margins[p, c] < 0.0:
                    found = True
                    break
            if not found:
                return False
        return True

    @njit(cache=True)
    def _threshold_scores_numba(proj, thresholds, above, below, alphas, m):
        r, n = proj.shape
        out = np.zeros((n, m))
        for i in range(r):
            a = alphas[i]
            for p in range(n):
                label = above[i] if proj[i, p] >= thresholds[i] else below[i]
                for c in range(m):
                    out[p, c] -= a
                out[p, label - 1] += a * m
        return out

    NUMBA_KERNELS = KernelSet(
        "numba",
        _best_scan_numba,
        _reweight_numba,
        _score_update_numba,
        _every_row_has_negative_numba,
        _threshold_scores_numba,
    )


def _numba_disabled() -> bool:
    return os.environ.get(_ENV_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}


ACTIVE: KernelSet = (
    NUMPY_KERNELS if NUMBA_KERNELS is None or _numba_disabled() else NUMBA_KERNELS
)


def active_kernels() -> KernelSet:
    return ACTIVE


def warmup(kernels: Optional[KernelSet] = None) -> None:
    """Run every kernel once on tiny inputs to trigger JIT compilation."""
    ks = kernels or ACTIVE
    realized = np.array([[1, 2], [2, 1]], dtype=np.int64)
    y = np.array([1, 2], dtype=np.int64)
    d = np.array([0.5, 0.5])
    ks.best_scan(realized, y, d)
    ks.reweight(d, realized[0], y, 0.1, 3)
    votes = np.zeros((2, 3))
    margins = np.zeros((2, 3))
    ks.score_update(votes, margins, realized[0], 0.1, 3)
    ks.every_row_has_negative(margins)
    ks.threshold_scores(
        np.array([[0.0, 1.0]]),
        np.array([0.5]),
        np.array([2], dtype=np.int64),
        np.array([1], dtype=np.int64),
        np.array([0.1]),
        3,
    )
