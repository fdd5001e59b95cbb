"""The outer training loop: eliminate labels epoch by epoch.

After each epoch, every observation's negative-margin labels are elimination
candidates.  The same number of labels (the smallest candidate count over
observations) is removed everywhere -- the candidates with the largest
indices -- and the survivors are renumbered 1..m' in increasing order via a
per-observation survivor map.  Training stops when one label per observation
remains; composing the survivor maps outward turns it back into a label of
the original alphabet.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .core import Dataset, EpochDivergence, ScoreTable, WeakLearnabilityViolation, _freeze
from .rounds import EpochRecord, run_epoch
from .stumps import PoolConfig, StumpPool, enumerate_stumps


def elimination_candidates(table: ScoreTable, p: int) -> Tuple[int, ...]:
    """Labels with strictly negative margin for observation ``p``, ascending."""
    row = table.margins[p]
    return tuple(int(a) for a in np.flatnonzero(row < 0.0) + 1)


def elimination_count(candidate_sets: Sequence[Sequence[int]]) -> int:
    """Number of labels removed per observation: the smallest candidate count."""
    sizes = [len(c) for c in candidate_sets]
    if not sizes or min(sizes) < 1:
        raise ValueError("every observation needs at least one candidate")
    return min(sizes)


def select_eliminated(candidates: Sequence[int], count: int) -> Tuple[int, ...]:
    """The ``count`` largest-index candidates (the tail of the ordered set)."""
    if count > len(candidates):
        raise ValueError("cannot eliminate more labels than there are candidates")
    return tuple(candidates[len(candidates) - count:])

def build_survivor_map(label_count: int, eliminated: Sequence[int]) -> Tuple[int, ...]:
    """Increasing bijection from new labels 1..m' onto the surviving labels.

    Entry j-1 is the j-th smallest survivor.
    """
    gone = set(eliminated)
    if not gone <= set(range(1, label_count + 1)):
        raise ValueError("eliminated labels must lie in 1..label_count")
    return tuple(a for a in range(1, label_count + 1) if a not in gone)


def relabel(y, eliminated_sets, survivor_maps, margins):
    """Targets for the next epoch plus the observations whose truth was lost.

    A surviving target keeps its identity through the survivor map's
    inverse.  When the target itself was eliminated, the observation is
    recorded as lost and the surviving label with the largest margin
    (smallest label on ties) becomes the surrogate target.
    """
    n = len(y)
    y_next = np.empty(n, dtype=np.int64)
    lost = []
    for p in range(n):
        smap = survivor_maps[p]
        target = int(y[p])
        if target in smap:
            y_next[p] = smap.index(target) + 1
        else:
            lost.append(p)
            best = max(smap, key=lambda a: (margins[p, a - 1], -a))
            y_next[p] = smap.index(best) + 1
    return y_next, tuple(lost)


@dataclass(frozen=True)
class EliminationStep:
    """Bookkeeping of one epoch's elimination."""

    candidates: Tuple[Tuple[int, ...], ...]
    removed_count: int
    eliminated: Tuple[Tuple[int, ...], ...]
    survivor_maps: Tuple[Tuple[int, ...], ...]
    next_label_count: int
    truth_lost: Tuple[int, ...]


@dataclass(frozen=True)
class TrainedModel:
    """Ordered epochs plus everything needed to reproduce their decisions."""

    num_labels: int
    dim: int
    epochs: Tuple[EpochRecord, ...]
    steps: Tuple[EliminationStep, ...]
    label_counts: Tuple[int, ...]
    training_features: np.ndarray
    training_labels: np.ndarray
    training_predictions: np.ndarray
    truth_lost: Tuple[int, ...]

    @property
    def n_epochs(self) -> int:
        return len(self.epochs)

    @property
    def n_train(self) -> int:
        return self.training_features.shape[0]

    @property
    def training_error(self) -> float:
        return float(np.mean(self.training_predictions != self.training_labels))


def _eliminate_from_epoch(epoch: EpochRecord, y):
    m = epoch.label_count
    n = len(y)
    if epoch.perfect:
        # a zero-error round settles the epoch: only the predicted label survives
        h = epoch.perfect_hypothesis.realized
        eliminated = tuple(
            tuple(a for a in range(1, m + 1) if a != int(h[p])) for p in range(n)
        )
        maps = tuple((int(h[p]),) for p in range(n))
        lost = tuple(int(p) for p in range(n) if h[p] != y[p])
        step = EliminationStep(eliminated, m - 1, eliminated, maps, 1, lost)
        return step, np.ones(n, dtype=np.int64)

    table = epoch.table
    candidates = tuple(elimination_candidates(table, p) for p in range(n))
    if any(len(c) == 0 for c in candidates):
        raise RuntimeError("epoch stopped without a candidate for every observation")
    removed = elimination_count(candidates)
    eliminated = tuple(select_eliminated(c, removed) for c in candidates)
    maps = tuple(build_survivor_map(m, e) for e in eliminated)
    y_next, lost = relabel(y, eliminated, maps, table.margins)
    step = EliminationStep(candidates, removed, eliminated, maps, m - removed, lost)
    return step, y_next


def train(data: Dataset, min_rounds: int, pool_config: Optional[PoolConfig] = None,
          round_cap: Optional[int] = None,
          pool_builder: Optional[Callable[[np.ndarray, int], StumpPool]] = None) -> TrainedModel:
    """Run elimination epochs until a single label per observation survives.

    A fresh pool targeting the current alphabet is built for every epoch.
    WeakLearnabilityViolation / EpochDivergence from an inner epoch propagate
    with the epoch index attached.
    """
    if min_rounds < 1:
        raise ValueError("min_rounds must be >= 1")
    if pool_builder is None:
        pool_builder = lambda feats, m: enumerate_stumps(feats, m, pool_config)

    n = data.n_obs
    y = data.labels.copy()
    m = data.num_labels
    original = np.tile(np.arange(1, m + 1, dtype=np.int64), (n, 1))
    epochs, steps, counts = [], [], [m]
    lost_all = set()
    epoch_index = 0
    while True:
        epoch_index += 1
        pool = pool_builder(data.features, m)
        try:
            epoch = run_epoch(pool, y, min_rounds, round_cap)
        except (WeakLearnabilityViolation, EpochDivergence) as exc:
            exc.epoch = epoch_index
            raise
        step, y = _eliminate_from_epoch(epoch, y)
        smaps = np.array(step.survivor_maps, dtype=np.int64)
        original = np.take_along_axis(original, smaps - 1, axis=1)
        epochs.append(epoch)
        steps.append(step)
        counts.append(step.next_label_count)
        lost_all.update(step.truth_lost)
        m = step.next_label_count
        if m == 1:
            break

    return TrainedModel(
        num_labels=data.num_labels,
        dim=data.dim,
        epochs=tuple(epochs),
        steps=tuple(steps),
        label_counts=tuple(counts),
        training_features=data.features,
        training_labels=data.labels,
        training_predictions=_freeze(original[:, 0].copy()),
        truth_lost=tuple(sorted(lost_all)),
    )


def _round_margin_table(epoch: EpochRecord, X: np.ndarray) -> np.ndarray:
    proj = np.empty((len(epoch.rounds), X.shape[0]))
    thresholds = np.empty(len(epoch.rounds))
    above = np.empty(len(epoch.rounds), dtype=np.int64)
    below = np.empty(len(epoch.rounds), dtype=np.int64)
    alphas = np.empty(len(epoch.rounds))
    for i, r in enumerate(epoch.rounds):
        proj[i] = r.hypothesis.project(X)
        thresholds[i] = r.hypothesis.threshold
        above[i] = r.hypothesis.label_above
        below[i] = r.hypothesis.label_below
        alphas[i] = r.alpha
    return _kernels.ACTIVE.threshold_scores(proj, thresholds, above, below,
                                            alphas, epoch.label_count)


def _predict_fresh(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    """Elimination replayed on unseen points.

    Each epoch removes its stored number of labels, picking the ones with
    the smallest margins (larger index goes first on ties), then renumbers
    survivors in increasing order exactly as during training.
    """
    n = X.shape[0]
    original = np.tile(np.arange(1, model.num_labels + 1, dtype=np.int64), (n, 1))
    for epoch, step in zip(model.epochs, model.steps):
        m = epoch.label_count
        if epoch.perfect:
            labels = epoch.perfect_hypothesis.evaluate(X)
            original = np.take_along_axis(original, labels[:, None] - 1, axis=1)
            continue
        margins = _round_margin_table(epoch, X)
        # ascending margin; reversing columns makes the stable sort put the
        # larger label index first on exact ties
        order = m - 1 - np.argsort(margins[:, ::-1], axis=1, kind="stable")
        survivors = np.sort(order[:, step.removed_count:], axis=1)
        original = np.take_along_axis(original, survivors, axis=1)
    return original[:, 0].copy()


def predict_batch(model: TrainedModel, X) -> np.ndarray:
    """Predicted original-alphabet labels for each row of ``X``.

    Rows that exactly match a training observation reuse its stored
    elimination decisions, so they reproduce the training prediction bit for
    bit.
    """
    X = np.atleast_2d(np.ascontiguousarray(X, dtype=np.float64))
    if X.shape[1] != model.dim:
        raise ValueError(f"expected feature dimension {model.dim}, got {X.shape[1]}")
    stored = {}
    for i in range(model.n_train):
        stored.setdefault(model.training_features[i].tobytes(),
                          int(model.training_predictions[i]))
    out = np.empty(X.shape[0], dtype=np.int64)
    fresh = []
    for i in range(X.shape[0]):
        hit = stored.get(X[i].tobytes())
        if hit is None:
            fresh.append(i)
        else:
            out[i] = hit
    if fresh:
        out[fresh] = _predict_fresh(model, X[fresh])
    return out


def predict(model: TrainedModel, x) -> int:
    """Predicted label for a single feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("predict expects a single feature vector")
    return int(predict_batch(model, x[None, :])[0])
