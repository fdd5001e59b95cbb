"""Minimax value of the agreement game and learnability verdicts.

The adversary picks a distribution over observations to minimize the best
pool member's weighted agreement score; the pool is (weakly) learnable over
an alphabet of size m when that value strictly exceeds the random-guess
score (2-m)/m.  The game is a finite zero-sum matrix game solved exactly (to
solver tolerance) by linear programming; the hypothesis-mixture program is
exposed separately so duality can be checked.
"""

import itertools
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.optimize import linprog

from .core import random_guess_score
from .stumps import StumpPool, enumerate_stumps

RHO_TOL = 1e-9
MAX_EXHAUSTIVE_LABELS = 6
MAX_EXHAUSTIVE_OBS = 12

_LP_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


@dataclass(frozen=True)
class GameValueReport:
    """Minimax value with the adversarial witness and the learnability verdict."""

    value: float
    witness: np.ndarray
    threshold: float
    margin: float
    passed: bool
    label_count: int

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"


@dataclass(frozen=True)
class SubsetCheck:
    """Worst case over the labelings checked at one alphabet size."""

    label_count: int
    n_labelings: int
    skipped: bool
    value: Optional[float] = None
    threshold: Optional[float] = None
    margin: Optional[float] = None
    passed: Optional[bool] = None
    worst_labeling: Optional[Tuple[int, ...]] = None
    witness: Optional[np.ndarray] = None

    @property
    def verdict(self) -> str:
        if self.skipped:
            return "SKIPPED"
        return "PASS" if self.passed else "FAIL"


@dataclass(frozen=True)
class IterativeReport:
    checks: Tuple[SubsetCheck, ...]
    passed: bool


def _realized_matrix(pool) -> np.ndarray:
    if isinstance(pool, StumpPool):
        return pool.realized
    realized = np.atleast_2d(np.asarray(pool, dtype=np.int64))
    if realized.shape[0] < 1:
        raise ValueError("pool must contain at least one realization")
    return realized


def _payoff(realized: np.ndarray, y: np.ndarray) -> np.ndarray:
    matrix = 2.0 * (realized == y) - 1.0
    # duplicated realizations cannot move the value
    _, first = np.unique(matrix, axis=0, return_index=True)
    return matrix[np.sort(first)]


def _solve_distribution_game(M: np.ndarray):
    """min over distributions d of max over rows of M @ d."""
    n_h, n_p = M.shape
    c = np.zeros(n_p + 1)
    c[-1] = 1.0
    A_ub = np.hstack([M, -np.ones((n_h, 1))])
    b_ub = np.zeros(n_h)
    A_eq = np.hstack([np.ones((1, n_p)), np.zeros((1, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0, None)] * n_p + [(None, None)],
                  method="highs", options=_LP_OPTIONS)
    if not res.success:
        raise RuntimeError(f"game solver failed: {res.message} (status {res.status})")
    witness = np.clip(res.x[:n_p], 0.0, None)
    witness /= witness.sum()
    return float(res.x[-1]), witness


def mixture_value(pool, y) -> Tuple[float, np.ndarray]:
    """max over hypothesis mixtures w of min over observations of (M.T @ w).

    Equals the distribution player's value by LP duality; kept separate so
    tests can certify the gap.
    """
    M = _payoff(_realized_matrix(pool), np.asarray(y, dtype=np.int64))
    n_h, n_p = M.shape
    c = np.zeros(n_h + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-M.T, np.ones((n_p, 1))])
    b_ub = np.zeros(n_p)
    A_eq = np.hstack([np.ones((1, n_h)), np.zeros((1, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0, None)] * n_h + [(None, None)],
                  method="highs", options=_LP_OPTIONS)
    if not res.success:
        raise RuntimeError(f"game solver failed: {res.message} (status {res.status})")
    weights = np.clip(res.x[:n_h], 0.0, None)
    weights /= weights.sum()
    return float(res.x[-1]), weights


def game_value(pool, y, label_count: Optional[int] = None, rho_tol: float = RHO_TOL) -> GameValueReport:
    """Solve the agreement game and judge the margin over random guessing."""
    realized = _realized_matrix(pool)
    y = np.asarray(y, dtype=np.int64)
    if y.shape[0] != realized.shape[1]:
        raise ValueError("y must have one entry per pooled observation")
    if label_count is None:
        if not isinstance(pool, StumpPool):
            raise ValueError("label_count is required for a raw realization pool")
        label_count = pool.label_count
    value, witness = _solve_distribution_game(_payoff(realized, y))
    threshold = random_guess_score(label_count)
    margin = value - threshold
    return GameValueReport(value, witness, threshold, margin, margin > rho_tol, label_count)


def weak_learnability(pool, y, label_count: int, rho_tol: float = RHO_TOL) -> GameValueReport:
    """Game value judged against the random-guess score of ``label_count`` labels."""
    return game_value(pool, y, label_count=label_count, rho_tol=rho_tol)


def iterative_weak_learnability(
    features,
    y,
    num_labels: int,
    pool_builder: Optional[Callable[[np.ndarray, int], StumpPool]] = None,
    mode: str = "given",
    rho_tol: float = RHO_TOL,
) -> IterativeReport:
    """Check learnability for every alphabet size from 2 up to ``num_labels``.

    ``mode="given"`` checks the supplied labeling at each size it fits into;
    ``mode="exhaustive"`` enumerates every labeling into the first s labels
    (guarded to small instances).  Overall verdict is the worst margin over
    everything checked.
    """
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    y = np.asarray(y, dtype=np.int64)
    n = features.shape[0]
    if mode not in ("given", "exhaustive"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "exhaustive" and (num_labels > MAX_EXHAUSTIVE_LABELS or n > MAX_EXHAUSTIVE_OBS):
        raise ValueError(
            "exhaustive labeling check is limited to "
            f"num_labels <= {MAX_EXHAUSTIVE_LABELS} and n <= {MAX_EXHAUSTIVE_OBS}; "
            "check specific labelings with mode='given' instead"
        )
    if pool_builder is None:
        pool_builder = lambda feats, m: enumerate_stumps(feats, m)

    checks = []
    for size in range(2, num_labels + 1):
        pool = pool_builder(features, size)
        if mode == "given":
            labelings = [tuple(int(v) for v in y)] if y.max() <= size else []
        else:
            labelings = list(itertools.product(range(1, size + 1), repeat=n))
        if not labelings:
            checks.append(SubsetCheck(size, 0, True))
            continue
        worst = None
        for labeling in labelings:
            report = game_value(pool, np.array(labeling), label_count=size, rho_tol=rho_tol)
            if worst is None or report.margin < worst[0].margin:
                worst = (report, labeling)
        report, labeling = worst
        checks.append(SubsetCheck(
            size, len(labelings), False,
            value=report.value, threshold=report.threshold, margin=report.margin,
            passed=report.passed, worst_labeling=tuple(labeling), witness=report.witness,
        ))
    judged = [c for c in checks if not c.skipped]
    return IterativeReport(tuple(checks), bool(judged) and all(c.passed for c in judged))
