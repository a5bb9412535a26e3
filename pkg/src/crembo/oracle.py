"""Belief oracles: row-indexed access to p(y | x_i) on sample points.

All adapters materialize a row-stochastic matrix quantized to 1e-9, so
threshold extraction and binary search are reproducible across
platforms. Oracles are immutable and pure.
"""

from __future__ import annotations

import csv

import numpy as np

from .core import Dataset
from .errors import (
    EmptySample,
    FeatureDimensionMismatch,
    NegativeEntry,
    NonPositiveTemperature,
    RowNotStochastic,
    ShapeMismatch,
)

QUANTUM_DECIMALS = 9
ROW_SUM_TOL = 1e-6


class MatrixOracleSource:
    """Oracle backed by a quantized [num_rows x num_classes] matrix."""

    def __init__(self, matrix: np.ndarray):
        m = np.array(matrix, dtype=np.float64, copy=True)
        if m.ndim != 2 or m.shape[0] == 0 or m.shape[1] < 2:
            raise ShapeMismatch(f"oracle matrix shape {m.shape} invalid")
        if np.any(m < 0.0):
            raise NegativeEntry("oracle matrix has negative entries")
        sums = m.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > ROW_SUM_TOL):
            bad = int(np.argmax(np.abs(sums - 1.0)))
            raise RowNotStochastic(f"row {bad} sums to {sums[bad]:.8f}")
        m = np.round(m, QUANTUM_DECIMALS)
        m.flags.writeable = False
        self._m = m

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    @property
    def num_rows(self) -> int:
        return self._m.shape[0]

    @property
    def num_classes(self) -> int:
        return self._m.shape[1]

    def prob(self, row: int, y: int) -> float:
        return float(self._m[row, y])

    def row(self, row: int) -> np.ndarray:
        return self._m[row].copy()

    def restrict(self, rows) -> "MatrixOracleSource":
        """Oracle over a row subset, re-indexed to 0..len(rows)-1."""
        rows = np.asarray(rows, dtype=np.int64)
        return MatrixOracleSource(self._m[rows])


def ensemble_vote_oracle(forest, dataset: Dataset, soft: bool = False) -> MatrixOracleSource:
    """Oracle from an ensemble: fraction of trees voting for each class.

    With ``soft=True`` the hard votes are replaced by averaged leaf class
    distributions (a convenience; the canonical oracle is the hard vote
    fraction).
    """
    if forest.num_attrs != dataset.num_attrs:
        raise FeatureDimensionMismatch(
            f"forest expects {forest.num_attrs} attrs, dataset has {dataset.num_attrs}")
    n = len(forest.trees)
    k = forest.num_classes
    if soft:
        acc = np.zeros((dataset.num_rows, k))
        for tree in forest.trees:
            acc += tree.predict_proba(dataset.features)
        matrix = acc / n
    else:
        counts = np.zeros((dataset.num_rows, k))
        for tree in forest.trees:
            preds = tree.predict(dataset.features)
            counts[np.arange(dataset.num_rows), preds] += 1.0
        matrix = counts / n
    return MatrixOracleSource(matrix)


def matrix_oracle(path, dataset: Dataset, normalize: bool = False) -> MatrixOracleSource:
    """Oracle from a stored probability-matrix CSV (optional header).

    Rows must align with the dataset in order and be row-stochastic
    within 1e-6; with ``normalize=True`` raw non-negative scores are
    renormalized instead of rejected.
    """
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.reader(fh):
            if not rec or all(not c.strip() for c in rec):
                continue
            try:
                rows.append([float(c) for c in rec])
            except ValueError:
                if rows:
                    raise ShapeMismatch(f"non-numeric row in {path}") from None
                continue  # header line
    if not rows:
        raise ShapeMismatch(f"{path}: no numeric rows")
    m = np.asarray(rows, dtype=np.float64)
    if m.shape[0] != dataset.num_rows:
        raise ShapeMismatch(f"matrix has {m.shape[0]} rows, dataset {dataset.num_rows}")
    if dataset.num_classes and m.shape[1] != dataset.num_classes:
        raise ShapeMismatch(
            f"matrix has {m.shape[1]} columns, dataset declares {dataset.num_classes} classes")
    if np.any(m < 0.0):
        raise NegativeEntry("probability matrix has negative entries")
    if normalize:
        sums = m.sum(axis=1, keepdims=True)
        if np.any(sums <= 0.0):
            raise RowNotStochastic("cannot normalize a zero row")
        m = m / sums
    return MatrixOracleSource(m)


def softmax(scores, temperature: float = 1.0) -> np.ndarray:
    """Exp-normalize a score vector at the given temperature."""
    if not temperature > 0.0:
        raise NonPositiveTemperature(f"temperature {temperature!r}")
    s = np.asarray(scores, dtype=np.float64) / temperature
    s = s - s.max()
    e = np.exp(s)
    return e / e.sum()


def threshold_set(oracle: MatrixOracleSource, rows=None) -> np.ndarray:
    """Sorted, deduplicated oracle values over the given rows (all classes)."""
    if rows is None:
        sub = oracle.matrix
    else:
        rows = np.asarray(rows, dtype=np.int64)
        if rows.size == 0:
            raise EmptySample("threshold set over empty row set")
        sub = oracle.matrix[rows]
    return np.unique(sub)
