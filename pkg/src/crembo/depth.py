"""Depth computations: per-point, empirical (minimum), sample-based,
and the trimmed variant used for robust compression."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Dataset
from .errors import EmptyHypothesisSample, EmptySample, TrimExceedsSample
from .oracle import MatrixOracleSource


@dataclass(frozen=True)
class DepthProfile:
    """Per-point depths plus their (possibly trimmed) minimum."""

    per_point: tuple  # tuple of (row_index, depth)
    overall: float
    trimmed_rows: tuple = field(default_factory=tuple)

    def to_json_dict(self) -> dict:
        return {
            "per_point": [[int(i), float(v)] for i, v in self.per_point],
            "overall": float(self.overall),
            "trimmed_rows": [int(i) for i in self.trimmed_rows],
        }


def _resolve_rows(dataset: Dataset, rows):
    if rows is None:
        return np.arange(dataset.num_rows, dtype=np.int64)
    rows = np.asarray(rows, dtype=np.int64)
    if rows.size == 0:
        raise EmptySample("empty row set")
    return rows


def _per_point_depths(model, oracle: MatrixOracleSource, dataset: Dataset, rows):
    preds = model.predict(dataset.features[rows])
    return oracle.matrix[rows, preds]


def depth_at_point(model, oracle: MatrixOracleSource, dataset: Dataset,
                   row_index: int) -> float:
    """Oracle belief in the model's prediction at one sample point."""
    pred = int(model.predict(dataset.features[row_index:row_index + 1])[0])
    return oracle.prob(row_index, pred)


def empirical_depth(model, oracle: MatrixOracleSource, dataset: Dataset,
                    rows=None) -> DepthProfile:
    """Minimum over sample points of the per-point depth."""
    rows = _resolve_rows(dataset, rows)
    depths = _per_point_depths(model, oracle, dataset, rows)
    return DepthProfile(tuple(zip(rows.tolist(), depths.tolist())),
                        float(depths.min()))


def sample_depth(model, hypotheses, dataset: Dataset, rows=None) -> DepthProfile:
    """Depth against a finite hypothesis sample: per point, the fraction
    of hypotheses agreeing with the model's prediction."""
    if not hypotheses:
        raise EmptyHypothesisSample("no hypotheses")
    rows = _resolve_rows(dataset, rows)
    x = dataset.features[rows]
    preds = model.predict(x)
    agree = np.zeros(rows.size)
    for h in hypotheses:
        agree += (h.predict(x) == preds)
    depths = agree / len(hypotheses)
    return DepthProfile(tuple(zip(rows.tolist(), depths.tolist())),
                        float(depths.min()))


def trimmed_depth(model, oracle: MatrixOracleSource, dataset: Dataset,
                  epsilon: float, rows=None) -> DepthProfile:
    """Depth after discarding the floor(eps*m) lowest per-point depths.

    Ties among equal depths break by ascending row index; eps=0 reduces
    exactly to ``empirical_depth``.
    """
    rows = _resolve_rows(dataset, rows)
    if not (0.0 <= epsilon < 1.0):
        raise TrimExceedsSample(f"epsilon {epsilon!r} outside [0, 1)")
    k = math.floor(epsilon * rows.size)
    if k >= rows.size:
        raise TrimExceedsSample(f"trim count {k} >= sample size {rows.size}")
    depths = _per_point_depths(model, oracle, dataset, rows)
    order = np.lexsort((rows, depths))  # by depth, then row index
    trimmed = tuple(sorted(rows[order[:k]].tolist()))
    overall = float(depths[order[k]])
    return DepthProfile(tuple(zip(rows.tolist(), depths.tolist())),
                        overall, trimmed)
