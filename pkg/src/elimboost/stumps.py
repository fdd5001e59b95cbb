"""Threshold-classifier pools: enumeration, optimal selection, permutation.

A pool is generated per label alphabet.  Thresholds sit at the midpoints
between consecutive distinct projection values, plus -inf/+inf sentinels, so
the pool realizes every labeling a single threshold can produce on the
sample.  Realizations are deduplicated keeping the first hit in canonical
order (axis, then threshold, then label pair), which also fixes how ties are
broken everywhere downstream.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .core import HypothesisRealization


@dataclass(frozen=True)
class PoolConfig:
    """Extra projection directions to enumerate in addition to the axes."""

    directions: Optional[np.ndarray] = None


class StumpPool:
    """Immutable, deduplicated pool of hypotheses over a fixed training set."""

    def __init__(self, label_count, realized, thresholds=None, above=None,
                 below=None, axes=None, directions=None, hypotheses=None):
        if label_count < 1:
            raise ValueError("label_count must be >= 1")
        realized = np.ascontiguousarray(realized, dtype=np.int64)
        if realized.ndim != 2 or realized.shape[0] < 1:
            raise ValueError("pool must contain at least one realization")
        realized.setflags(write=False)
        self.label_count = int(label_count)
        self.realized = realized
        self._thresholds = thresholds
        self._above = above
        self._below = below
        self._axes = axes
        self._directions = directions
        self._hypotheses = list(hypotheses) if hypotheses is not None else None

    @classmethod
    def from_hypotheses(cls, hypotheses: Sequence[HypothesisRealization], label_count: int):
        hyps = tuple(hypotheses)
        if not hyps:
            raise ValueError("pool must contain at least one hypothesis")
        realized = np.vstack([h.realized for h in hyps])
        return cls(label_count, realized, hypotheses=hyps)

    def __len__(self) -> int:
        return self.realized.shape[0]

    @property
    def n_obs(self) -> int:
        return self.realized.shape[1]

    def hypothesis(self, i: int) -> HypothesisRealization:
        if self._hypotheses is not None:
            return self._hypotheses[i]
        axis = int(self._axes[i])
        direction = None
        if axis < 0:
            direction = self._directions[-(axis + 1)]
            axis = None
        return HypothesisRealization(
            label_above=int(self._above[i]),
            label_below=int(self._below[i]),
            realized=self.realized[i],
            threshold=float(self._thresholds[i]),
            axis=axis,
            direction=direction,
        )

    @property
    def hypotheses(self) -> tuple:
        if self._hypotheses is None:
            self._hypotheses = [self.hypothesis(i) for i in range(len(self))]
        return tuple(self._hypotheses)

    def __iter__(self):
        return iter(self.hypotheses)


def _midpoint_thresholds(values: np.ndarray) -> np.ndarray:
    distinct = np.unique(values)
    mids = (distinct[:-1] + distinct[1:]) / 2.0
    return np.concatenate(([-np.inf], mids, [np.inf]))


def enumerate_stumps(features, label_count: int, config: Optional[PoolConfig] = None) -> StumpPool:
    """All distinct threshold-classifier realizations on ``features``.

    Every ordered label pair (above, below) is instantiated per threshold,
    including the constant classifiers (equal pair).  With a config carrying
    extra directions, those projections are enumerated after the axes.
    """
    X = np.atleast_2d(np.asarray(features, dtype=np.float64))
    n = X.shape[0]
    if n < 1 or X.shape[1] < 1:
        raise ValueError("features must be a non-empty 2-D matrix")
    if label_count < 2:
        raise ValueError("label_count must be >= 2")

    projections = [(X[:, j], j) for j in range(X.shape[1])]
    direction_rows = []
    if config is not None and config.directions is not None:
        dirs = np.atleast_2d(np.asarray(config.directions, dtype=np.float64))
        if dirs.shape[1] != X.shape[1]:
            raise ValueError("direction vectors must match the feature dimension")
        for k in range(dirs.shape[0]):
            vec = dirs[k].copy()
            vec.setflags(write=False)
            direction_rows.append(vec)
            # axis code -(k+1) marks "direction k"
            projections.append((X @ vec, -(k + 1)))

    m = label_count
    pair_above = np.repeat(np.arange(1, m + 1), m)
    pair_below = np.tile(np.arange(1, m + 1), m)

    blocks, thresholds, above, below, axes = [], [], [], [], []
    for values, axis_code in projections:
        thr = _midpoint_thresholds(values)
        side = values[None, :] >= thr[:, None]                     # (T, n)
        block = np.where(side[:, None, :], pair_above[None, :, None],
                         pair_below[None, :, None])                # (T, m*m, n)
        blocks.append(block.reshape(-1, n))
        thresholds.append(np.repeat(thr, m * m))
        above.append(np.tile(pair_above, thr.shape[0]))
        below.append(np.tile(pair_below, thr.shape[0]))
        axes.append(np.full(thr.shape[0] * m * m, axis_code, dtype=np.int64))

    realized = np.vstack(blocks).astype(np.int64)
    thresholds = np.concatenate(thresholds)
    above = np.concatenate(above).astype(np.int64)
    below = np.concatenate(below).astype(np.int64)
    axes = np.concatenate(axes)

    # dedup by realized vector, keeping the first (canonical) representative
    _, first = np.unique(realized, axis=0, return_index=True)
    keep = np.sort(first)
    return StumpPool(
        label_count,
        realized[keep],
        thresholds=thresholds[keep],
        above=above[keep],
        below=below[keep],
        axes=axes[keep],
        directions=direction_rows or None,
    )


def constant_pool(n_obs: int, labels: Sequence[int], label_count: int) -> StumpPool:
    """Pool of constant classifiers, one per requested label."""
    hyps = [
        HypothesisRealization(
            label_above=int(c),
            label_below=int(c),
            realized=np.full(n_obs, int(c), dtype=np.int64),
            threshold=-np.inf,
            axis=0,
        )
        for c in labels
    ]
    return StumpPool.from_hypotheses(hyps, label_count)


def best_hypothesis(pool: StumpPool, y, d):
    """Pool member with the maximal weighted agreement score under ``d``.

    Returns (hypothesis, edge, epsilon) where epsilon is the weighted
    mistake mass of the winner.  Ties go to the earliest pool member.
    """
    y = np.ascontiguousarray(y, dtype=np.int64)
    d = np.ascontiguousarray(d, dtype=np.float64)
    if y.shape[0] != pool.n_obs or d.shape[0] != pool.n_obs:
        raise ValueError("y and d must have one entry per pooled observation")
    if y.min() < 1 or y.max() > pool.label_count:
        raise ValueError(f"targets must lie in 1..{pool.label_count}")
    idx, edge = _kernels.ACTIVE.best_scan(pool.realized, y, d)
    epsilon = float(d[pool.realized[idx] != y].sum())
    return pool.hypothesis(idx), float(edge), epsilon


def permute_realization(h: HypothesisRealization, perm: Sequence[int]) -> HypothesisRealization:
    """Relabel a hypothesis through a bijection on 1..m.

    ``perm[a-1]`` is the image of label a.
    """
    perm = np.asarray(perm, dtype=np.int64)
    m = perm.shape[0]
    if sorted(perm.tolist()) != list(range(1, m + 1)):
        raise ValueError("perm must be a bijection on 1..m")
    if h.realized.max() > m or max(h.label_above, h.label_below) > m:
        raise ValueError("hypothesis labels exceed the permutation's range")
    return HypothesisRealization(
        label_above=int(perm[h.label_above - 1]),
        label_below=int(perm[h.label_below - 1]),
        realized=perm[h.realized - 1],
        threshold=h.threshold,
        axis=h.axis,
        direction=h.direction,
    )
