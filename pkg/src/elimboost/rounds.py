"""The within-epoch boosting loop.

Each round picks the pool member with the best weighted score, converts its
error into a positive stage weight, reweights the observations
exponentially, and accumulates the vote/margin tables.  The epoch ends at
the first round >= the requested minimum where every observation has at
least one strictly negative margin; a round with zero error ends the epoch
immediately with that hypothesis as a perfect classifier.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from . import _kernels
from .core import (
    EpochDivergence,
    HypothesisRealization,
    ScoreTable,
    WeakLearnabilityViolation,
    _freeze,
    random_guess_score,
    uniform_weights,
)
from .stumps import StumpPool, best_hypothesis

DEFAULT_CAP_FACTOR = 50


def _check_label_count(label_count):
    if label_count < 2:
        raise ValueError(f"label_count must be >= 2, got {label_count}")


def compute_alpha(epsilon: float, label_count: int) -> float:
    """Stage weight of the elimination loop; positive on 0 < eps < (m-1)/m.

    Zero error must be short-circuited by the caller (perfect round); error
    at or beyond the random-guess boundary means the pool failed weak
    learnability and raises.
    """
    _check_label_count(label_count)
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive; perfect rounds are handled by the caller")
    bound = (label_count - 1) / label_count
    if epsilon >= bound:
        raise WeakLearnabilityViolation(
            f"round error {epsilon} is not below the random-guess boundary {bound}",
            epsilon=epsilon,
            label_count=label_count,
        )
    m1 = label_count - 1
    return math.log(m1 * (1.0 - epsilon) / epsilon) / (2.0 * m1)


def compute_alpha_samme(epsilon: float, label_count: int) -> float:
    """Stage weight of the vote-based baseline; same domain as compute_alpha."""
    _check_label_count(label_count)
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive; perfect rounds are handled by the caller")
    bound = (label_count - 1) / label_count
    if epsilon >= bound:
        raise WeakLearnabilityViolation(
            f"round error {epsilon} is not below the random-guess boundary {bound}",
            epsilon=epsilon,
            label_count=label_count,
        )
    m1 = label_count - 1
    return (m1 * m1 / label_count) * math.log(m1 * (1.0 - epsilon) / epsilon)


def round_normalizer(epsilon: float, label_count: int) -> float:
    """Value the reweight normalizer takes as a function of the round error.

    Strictly concave on [0, 1] with maximum 1 at epsilon = 1 - 1/m, so any
    round beating random guessing strictly shrinks the normalizer product.
    """
    _check_label_count(label_count)
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    m1 = label_count - 1
    e = 1.0 / (2.0 * m1)
    return (
        m1 ** -0.5 * epsilon ** 0.5 * (1.0 - epsilon) ** 0.5
        + m1 ** e * (1.0 - epsilon) ** e * epsilon ** (1.0 - e)
    )


def reweight(d, h, y, alpha: float, label_count: int):
    """One exponential reweight step; returns (new weights, normalizer)."""
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    _check_label_count(label_count)
    labels = h.realized if isinstance(h, HypothesisRealization) else np.ascontiguousarray(h, dtype=np.int64)
    d = np.ascontiguousarray(d, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    if labels.shape != y.shape or labels.shape != d.shape:
        raise ValueError("d, h and y must have one entry per observation")
    d_next, z = _kernels.ACTIVE.reweight(d, labels, y, alpha, label_count)
    if not math.isfinite(z) or z <= 0.0:
        raise RuntimeError(f"reweight normalizer degenerated to {z}")
    return d_next, z


def accumulate_scores(table: ScoreTable, h, alpha: float) -> ScoreTable:
    """New table with one round's votes and margins added."""
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    labels = h.realized if isinstance(h, HypothesisRealization) else np.ascontiguousarray(h, dtype=np.int64)
    if labels.shape[0] != table.n_obs:
        raise ValueError("hypothesis length does not match the table")
    votes = table.votes.copy()
    margins = table.margins.copy()
    _kernels.ACTIVE.score_update(votes, margins, labels, alpha, table.label_count)
    return ScoreTable(votes, margins, table.round_index + 1)


@dataclass(frozen=True)
class RoundRecord:
    hypothesis: HypothesisRealization
    alpha: float
    epsilon: float
    edge: float
    edge_over_random: float
    normalizer: float


@dataclass(frozen=True)
class EpochRecord:
    """Everything one epoch produced.

    ``stop_round`` is the terminal round; for perfect epochs it is the round
    at which the zero-error hypothesis appeared (possibly before the
    minimum), otherwise it is >= the requested minimum.  ``weight_history``
    holds the observation weights after each completed round.
    """

    label_count: int
    rounds: Tuple[RoundRecord, ...]
    table: Optional[ScoreTable]
    stop_round: int
    perfect: bool = False
    perfect_hypothesis: Optional[HypothesisRealization] = None
    weight_history: Tuple[np.ndarray, ...] = field(default_factory=tuple)

    def alphas(self) -> np.ndarray:
        return np.array([r.alpha for r in self.rounds])

    def normalizers(self) -> np.ndarray:
        return np.array([r.normalizer for r in self.rounds])

    def normalizer_products(self) -> np.ndarray:
        return np.cumprod(self.normalizers())


def run_epoch(pool: StumpPool, y, min_rounds: int, round_cap: Optional[int] = None) -> EpochRecord:
    """Boost until every observation has a strictly negative margin.

    Starts from uniform weights.  Stops at the first round k >= min_rounds
    where each observation has some label with margin < 0; returns early
    with ``perfect=True`` if a round's error hits zero.  Raises
    WeakLearnabilityViolation when a round cannot beat random guessing and
    EpochDivergence when ``round_cap`` is exceeded.
    """
    m = pool.label_count
    _check_label_count(m)
    if min_rounds < 1:
        raise ValueError("min_rounds must be >= 1")
    if round_cap is None:
        round_cap = DEFAULT_CAP_FACTOR * min_rounds * m
    y = np.ascontiguousarray(y, dtype=np.int64)
    n = pool.n_obs
    if y.shape[0] != n:
        raise ValueError("y must have one entry per pooled observation")

    guess = random_guess_score(m)
    d = uniform_weights(n)
    votes = np.zeros((n, m))
    margins = np.zeros((n, m))
    rounds = []
    weight_history = []
    k = 0
    while True:
        k += 1
        h, edge, epsilon = best_hypothesis(pool, y, d)
        if epsilon == 0.0:
            table = ScoreTable(votes, margins, len(rounds))
            return EpochRecord(m, tuple(rounds), table, k, perfect=True,
                               perfect_hypothesis=h,
                               weight_history=tuple(weight_history))
        try:
            alpha = compute_alpha(epsilon, m)
        except WeakLearnabilityViolation as exc:
            exc.round_index = k
            raise
        d, z = _kernels.ACTIVE.reweight(d, h.realized, y, alpha, m)
        if not math.isfinite(z) or z <= 0.0:
            raise RuntimeError(f"reweight normalizer degenerated to {z} at round {k}")
        _kernels.ACTIVE.score_update(votes, margins, h.realized, alpha, m)
        rounds.append(RoundRecord(h, alpha, epsilon, edge, edge - guess, z))
        weight_history.append(_freeze(d.copy()))
        if k >= min_rounds and _kernels.ACTIVE.every_row_has_negative(margins):
            return EpochRecord(m, tuple(rounds), ScoreTable(votes, margins, k), k,
                               weight_history=tuple(weight_history))
        if k >= round_cap:
            raise EpochDivergence(
                f"no admissible stopping round within {round_cap} rounds; "
                "the pool may not be iteratively weakly learnable on this data",
                round_cap=round_cap,
            )
