"""Stagewise vote-based baselines: multi-class and binary boosting.

Both run the same loop -- optimal pool member, stage weight, exponential
reweight -- for a fixed number of rounds and predict by weighted plurality
vote.  They share the elimination trainer's pool and tie-breaking so
head-to-head comparisons isolate the algorithmic difference.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import _kernels
from .core import Dataset, HypothesisRealization, WeakLearnabilityViolation, _freeze, uniform_weights
from .rounds import compute_alpha, compute_alpha_samme
from .stumps import StumpPool, best_hypothesis, enumerate_stumps


@dataclass(frozen=True)
class SammeModel:
    """Weighted ensemble with an argmax-vote decision rule."""

    algorithm: str
    num_labels: int
    dim: int
    hypotheses: Tuple[HypothesisRealization, ...]
    alphas: Tuple[float, ...]
    perfect: bool
    training_features: np.ndarray
    training_labels: np.ndarray
    training_predictions: np.ndarray

    @property
    def n_rounds(self) -> int:
        return len(self.hypotheses)

    @property
    def training_error(self) -> float:
        return float(np.mean(self.training_predictions != self.training_labels))

    def training_votes(self, upto: Optional[int] = None) -> np.ndarray:
        """Vote totals per observation and label after the first ``upto`` rounds."""
        k = self.n_rounds if upto is None else upto
        n = self.training_features.shape[0]
        votes = np.zeros((n, self.num_labels))
        rows = np.arange(n)
        for h, alpha in zip(self.hypotheses[:k], self.alphas[:k]):
            votes[rows, h.realized - 1] += alpha
        return votes

    def prefix_training_predictions(self, upto: int) -> np.ndarray:
        return np.argmax(self.training_votes(upto), axis=1).astype(np.int64) + 1


def _vote_boost(data: Dataset, n_rounds: int, pool: StumpPool, alpha_fn, algorithm: str) -> SammeModel:
    if n_rounds < 1:
        raise ValueError("n_rounds must be >= 1")
    y = data.labels
    m = data.num_labels
    d = uniform_weights(data.n_obs)
    hyps, alphas = [], []
    perfect = False
    for k in range(1, n_rounds + 1):
        h, _, epsilon = best_hypothesis(pool, y, d)
        if epsilon == 0.0:
            # the single perfect hypothesis becomes the whole ensemble
            hyps, alphas, perfect = [h], [1.0], True
            break
        try:
            alpha = alpha_fn(epsilon, m)
        except WeakLearnabilityViolation as exc:
            exc.round_index = k
            raise
        d, z = _kernels.ACTIVE.reweight(d, h.realized, y, alpha, m)
        if not math.isfinite(z) or z <= 0.0:
            raise RuntimeError(f"reweight normalizer degenerated to {z} at round {k}")
        hyps.append(h)
        alphas.append(alpha)

    votes = np.zeros((data.n_obs, m))
    rows = np.arange(data.n_obs)
    for h, alpha in zip(hyps, alphas):
        votes[rows, h.realized - 1] += alpha
    predictions = np.argmax(votes, axis=1).astype(np.int64) + 1
    return SammeModel(
        algorithm=algorithm,
        num_labels=m,
        dim=data.dim,
        hypotheses=tuple(hyps),
        alphas=tuple(alphas),
        perfect=perfect,
        training_features=data.features,
        training_labels=data.labels,
        training_predictions=_freeze(predictions),
    )


def samme_train(data: Dataset, n_rounds: int, pool: Optional[StumpPool] = None) -> SammeModel:
    """Multi-class vote boosting over the full alphabet for ``n_rounds`` rounds."""
    if pool is None:
        pool = enumerate_stumps(data.features, data.num_labels)
    return _vote_boost(data, n_rounds, pool, compute_alpha_samme, "samme")


def adaboost_train(data: Dataset, n_rounds: int, pool: Optional[StumpPool] = None) -> SammeModel:
    """Classical binary boosting; requires exactly two labels."""
    if data.num_labels != 2:
        raise ValueError("adaboost_train requires num_labels == 2")
    if pool is None:
        pool = enumerate_stumps(data.features, 2)
    return _vote_boost(data, n_rounds, pool, compute_alpha, "adaboost")


def vote_predict(model: SammeModel, X) -> np.ndarray:
    """Weighted plurality vote on new points; ties go to the smallest label."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.dim:
        raise ValueError(f"expected feature dimension {model.dim}, got {X.shape[1]}")
    votes = np.zeros((X.shape[0], model.num_labels))
    rows = np.arange(X.shape[0])
    for h, alpha in zip(model.hypotheses, model.alphas):
        votes[rows, h.evaluate(X) - 1] += alpha
    return np.argmax(votes, axis=1).astype(np.int64) + 1
