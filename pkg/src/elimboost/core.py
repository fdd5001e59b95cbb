"""Domain types shared across the library, plus the weighted agreement score.

Labels are the integers 1..m throughout the public API; the shift to 0-based
column indices happens only where arrays are indexed.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

DISTRIBUTION_ATOL = 1e-12


class WeakLearnabilityViolation(RuntimeError):
    """A round's weighted error reached the random-guess boundary.

    The stage weight would be non-positive, so the hypothesis pool is not
    (iteratively) weakly learnable on this data.
    """

    def __init__(self, message, epsilon=None, label_count=None, round_index=None, epoch=None):
        super().__init__(message)
        self.epsilon = epsilon
        self.label_count = label_count
        self.round_index = round_index
        self.epoch = epoch


class EpochDivergence(RuntimeError):
    """An epoch exceeded its round cap without reaching the stopping rule."""

    def __init__(self, message, round_cap=None, epoch=None):
        super().__init__(message)
        self.round_cap = round_cap
        self.epoch = epoch


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def uniform_weights(n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("need at least one observation")
    return np.full(n, 1.0 / n)


def random_guess_score(label_count: int) -> float:
    """Agreement score of guessing uniformly among ``label_count`` labels."""
    if label_count < 2:
        raise ValueError(f"label_count must be >= 2, got {label_count}")
    return (2.0 - label_count) / label_count


@dataclass(frozen=True)
class HypothesisRealization:
    """A threshold classifier plus its label vector on the training set.

    Points whose projection (coordinate ``axis``, or dot product with
    ``direction``) is >= ``threshold`` get ``label_above``, the rest get
    ``label_below``.  ``realized`` caches the classifier's output on every
    training observation.  Parameter-free pool members (realization only)
    leave both ``axis`` and ``direction`` unset and cannot label new points.
    """

    label_above: int
    label_below: int
    realized: np.ndarray
    threshold: Optional[float] = None
    axis: Optional[int] = None
    direction: Optional[np.ndarray] = None

    def __post_init__(self):
        realized = np.ascontiguousarray(self.realized, dtype=np.int64)
        object.__setattr__(self, "realized", _freeze(realized))
        if self.direction is not None:
            direction = np.ascontiguousarray(self.direction, dtype=np.float64)
            object.__setattr__(self, "direction", _freeze(direction))
        if self.is_parametric and self.threshold is None:
            raise ValueError("parametric hypothesis needs a threshold")

    @property
    def is_parametric(self) -> bool:
        return self.axis is not None or self.direction is not None

    def project(self, X: np.ndarray) -> np.ndarray:
        if self.axis is not None:
            return X[:, self.axis]
        if self.direction is not None:
            return X @ self.direction
        raise ValueError("hypothesis has no parameters; cannot label new points")

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        """Labels assigned to the rows of feature matrix ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        side = self.project(X) >= self.threshold
        return np.where(side, self.label_above, self.label_below).astype(np.int64)

    def evaluate_one(self, x: np.ndarray) -> int:
        return int(self.evaluate(np.asarray(x, dtype=np.float64)[None, :])[0])


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with integer labels in 1..num_labels.

    Duplicate feature rows are allowed when they agree on the label; rows
    that repeat with conflicting labels are rejected because the target must
    be a function of the features.
    """

    features: np.ndarray
    labels: np.ndarray
    num_labels: int

    def __post_init__(self):
        features = np.ascontiguousarray(np.atleast_2d(self.features), dtype=np.float64)
        labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        if features.ndim != 2 or features.shape[0] < 1 or features.shape[1] < 1:
            raise ValueError("features must be a non-empty 2-D matrix")
        if not np.isfinite(features).all():
            raise ValueError("features must be finite")
        if labels.shape != (features.shape[0],):
            raise ValueError("labels must be a vector with one entry per row")
        if self.num_labels < 2:
            raise ValueError("num_labels must be >= 2")
        if labels.min() < 1 or labels.max() > self.num_labels:
            raise ValueError(f"labels must lie in 1..{self.num_labels}")
        _reject_conflicting_duplicates(features, labels)
        object.__setattr__(self, "features", _freeze(features))
        object.__setattr__(self, "labels", _freeze(labels))

    @property
    def n_obs(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


def _reject_conflicting_duplicates(features, labels):
    seen = {}
    for i in range(features.shape[0]):
        key = features[i].tobytes()
        label = int(labels[i])
        prev = seen.setdefault(key, label)
        if prev != label:
            raise ValueError(
                f"duplicate feature row {i} has conflicting labels {prev} and {label}"
            )


@dataclass(frozen=True)
class ScoreTable:
    """Per-observation vote totals and label margins after some rounds.

    ``votes[p, a-1]`` accumulates the stage weights of rounds that labeled
    observation p with a.  ``margins[p, a-1]`` rescales votes so each row
    sums to zero: (m-1) * votes[a] minus the votes of all other labels.
    """

    votes: np.ndarray
    margins: np.ndarray
    round_index: int

    def __post_init__(self):
        votes = np.ascontiguousarray(self.votes, dtype=np.float64)
        margins = np.ascontiguousarray(self.margins, dtype=np.float64)
        if votes.shape != margins.shape or votes.ndim != 2:
            raise ValueError("votes and margins must be matrices of equal shape")
        object.__setattr__(self, "votes", _freeze(votes))
        object.__setattr__(self, "margins", _freeze(margins))

    @property
    def n_obs(self) -> int:
        return self.votes.shape[0]

    @property
    def label_count(self) -> int:
        return self.votes.shape[1]

    def validate(self, atol: float = 1e-9) -> None:
        """Check the vote/margin identity and the zero row-sum property."""
        m = self.label_count
        expected = m * self.votes - self.votes.sum(axis=1, keepdims=True)
        if not np.allclose(self.margins, expected, atol=atol, rtol=0.0):
            raise ValueError("margins do not match the rescaled votes")
        if not np.allclose(self.margins.sum(axis=1), 0.0, atol=atol, rtol=0.0):
            raise ValueError("margin rows must sum to zero")


def new_score_table(n_obs: int, label_count: int) -> ScoreTable:
    return ScoreTable(np.zeros((n_obs, label_count)), np.zeros((n_obs, label_count)), 0)


def _realized_labels(h) -> np.ndarray:
    if isinstance(h, HypothesisRealization):
        return h.realized
    return np.ascontiguousarray(h, dtype=np.int64)


def score(h, y, d) -> float:
    """Weighted agreement minus disagreement of ``h`` with targets ``y``.

    Returns sum over observations of (+d if h matches y else -d); lies in
    [-1, 1] for any probability vector ``d``.
    """
    labels = _realized_labels(h)
    y = np.asarray(y, dtype=np.int64)
    d = np.asarray(d, dtype=np.float64)
    if labels.shape != y.shape or labels.shape != d.shape:
        raise ValueError("h, y and d must have one entry per observation")
    return float(((labels == y) * 2.0 - 1.0) @ d)
