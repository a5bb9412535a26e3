"""Binary search for the deepest constraint-consistent hypothesis.

``memo`` probes the sorted set of distinct oracle values; at each
threshold d it builds per-row allowed-label sets {y : O(x_i, y) >= d}
and asks the learner for a consistent model. The largest feasible
threshold wins, the model from that probe is returned, and its depth is
recomputed directly from the oracle (never trusted from the probe).
``memo_trimmed`` additionally excludes rows whose allowed set is empty,
up to a budget of floor(eps * m) rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import ConstraintSample, Dataset
from .errors import (
    ConflictingDuplicate,
    ConstraintViolation,
    EmptySample,
    LearnerAlwaysFails,
    TrimExceedsSample,
)
from .oracle import MatrixOracleSource, threshold_set


@dataclass
class MemoResult:
    """Deepest model found, its certified depth, and search telemetry."""

    model: object
    depth: float
    learner_calls: int
    probed_thresholds: list = field(default_factory=list)
    trimmed_rows: tuple = ()

    def to_json_dict(self) -> dict:
        return {"model": self.model.to_json_dict(),
                "depth": float(self.depth),
                "learner_calls": int(self.learner_calls),
                "probed_thresholds": [float(t) for t in self.probed_thresholds],
                "trimmed_rows": [int(r) for r in self.trimmed_rows]}


def build_constraints(oracle: MatrixOracleSource, rows, d: float) -> ConstraintSample:
    """Allowed-label sets {y : O(x_i, y) >= d}; empty sets are recorded."""
    rows = np.asarray(rows, dtype=np.int64)
    pairs = []
    for i in rows:
        allowed = frozenset(np.flatnonzero(oracle.matrix[i] >= d).tolist())
        pairs.append((int(i), allowed))
    return ConstraintSample(tuple(pairs))


def _trim_for_threshold(oracle, rows, d, budget):
    """Split rows into (kept constraints, trimmed rows) at threshold d.

    Rows whose allowed set would be empty are excluded, lowest
    max-probability first (row-index tie-break); returns None when the
    number of empty rows exceeds the budget.
    """
    matrix = oracle.matrix[rows]
    max_prob = matrix.max(axis=1)
    empty = max_prob < d
    n_empty = int(np.count_nonzero(empty))
    if n_empty > budget:
        return None
    empty_rows = rows[empty]
    order = np.lexsort((empty_rows, max_prob[empty]))
    trimmed = tuple(int(r) for r in empty_rows[order])
    kept = rows[~empty]
    pairs = tuple((int(i), frozenset(np.flatnonzero(oracle.matrix[i] >= d).tolist()))
                  for i in kept)
    return ConstraintSample(pairs, trimmed)


def memo_trimmed(dataset: Dataset, oracle: MatrixOracleSource, learner,
                 epsilon: float, rows=None) -> MemoResult:
    """MEMO with an empty-constraint trim budget of floor(eps * m) rows.

    eps=0 reduces exactly to the untrimmed algorithm.
    """
    if rows is None:
        rows = np.arange(dataset.num_rows, dtype=np.int64)
    else:
        rows = np.asarray(rows, dtype=np.int64)
    if rows.size == 0:
        raise EmptySample("memo over empty sample")
    if not (0.0 <= epsilon < 1.0):
        raise TrimExceedsSample(f"epsilon {epsilon!r} outside [0, 1)")
    budget = math.floor(epsilon * rows.size)
    if budget >= rows.size:
        raise TrimExceedsSample("trim budget covers the whole sample")

    thresholds = threshold_set(oracle, rows)
    probed = []
    calls = 0
    best = None  # (threshold, model, constraints)
    lo, hi = 0, thresholds.size - 1
    while lo <= hi:
        mid = (lo + hi) // 2
        d = float(thresholds[mid])
        probed.append(d)
        constraints = _trim_for_threshold(oracle, rows, d, budget)
        feasible = False
        model = None
        if constraints is not None:
            try:
                calls += 1
                model = learner.learn(dataset, constraints)
            except ConflictingDuplicate:
                model = None
            feasible = model is not None
        if feasible:
            best = (d, model, constraints)
            lo = mid + 1
        else:
            hi = mid - 1
    if best is None:
        raise LearnerAlwaysFails(
            "learner failed at the minimal threshold, violating its contract")
    d_star, model, constraints = best
    kept = np.asarray([r for r, _ in constraints.pairs], dtype=np.int64)
    if not all(int(p) in allowed for p, (_, allowed) in
               zip(model.predict(dataset.features[kept]), constraints.pairs)):
        raise ConstraintViolation(
            f"returned model violates constraints at d={d_star}")
    depths = oracle.matrix[kept, model.predict(dataset.features[kept])]
    return MemoResult(model, float(depths.min()), calls, probed,
                      constraints.trimmed_rows)


def memo(dataset: Dataset, oracle: MatrixOracleSource, learner,
         rows=None) -> MemoResult:
    """Deepest hypothesis search over the full (untrimmed) sample."""
    return memo_trimmed(dataset, oracle, learner, 0.0, rows)
