"""Domain types, CSV ingestion, and deterministic splitting/folding.

The ``Dataset`` is immutable after construction; split and fold
operations are pure functions of (data, seed) so identical seeds yield
bit-identical index lists.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ClassTooSmall,
    EmptyDataset,
    FoldCountExceedsRows,
    LengthMismatch,
    MissingColumn,
    NonNumericFeature,
)


@dataclass(frozen=True)
class Dataset:
    """A feature matrix with optional dense integer labels.

    ``label_mapping`` records the bijection raw label -> dense class id
    applied during ingestion (empty when labels were already dense or
    absent).
    """

    features: np.ndarray
    labels: np.ndarray | None
    num_classes: int
    column_names: list[str] = field(default_factory=list)
    label_mapping: dict = field(default_factory=dict)

    def __post_init__(self):
        self.features.flags.writeable = False
        if self.labels is not None:
            self.labels.flags.writeable = False

    @property
    def num_rows(self) -> int:
        return self.features.shape[0]

    @property
    def num_attrs(self) -> int:
        return self.features.shape[1]

    @classmethod
    def from_arrays(cls, features, labels=None, num_classes=None,
                    column_names=None) -> "Dataset":
        features = np.array(features, dtype=np.float64, copy=True)
        if features.ndim != 2 or features.shape[0] == 0 or features.shape[1] == 0:
            raise EmptyDataset("feature matrix must be non-empty and 2-D")
        if not np.all(np.isfinite(features)):
            raise NonNumericFeature("features contain NaN or Inf")
        if labels is not None:
            labels = np.asarray(labels, dtype=np.int64).copy()
            if labels.shape != (features.shape[0],):
                raise LengthMismatch("labels length != number of rows")
            if labels.min() < 0:
                raise NonNumericFeature("negative class label")
            if num_classes is None:
                num_classes = int(labels.max()) + 1
            if num_classes < int(labels.max()) + 1:
                raise EmptyDataset("num_classes does not cover max label")
        elif num_classes is None:
            num_classes = 0
        if column_names is None:
            column_names = [f"f{i}" for i in range(features.shape[1])]
        return cls(features, labels, int(num_classes), list(column_names), {})

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=np.int64)
        labels = None if self.labels is None else self.labels[rows].copy()
        return Dataset(self.features[rows].copy(), labels, self.num_classes,
                       self.column_names, self.label_mapping)


@dataclass(frozen=True)
class SplitSpec:
    """Parameters for a deterministic train/test partition."""

    seed: int
    fraction: float | None = None
    fold_count: int | None = None
    stratified: bool = True


@dataclass(frozen=True)
class ConstraintSample:
    """Per-row allowed-label sets plus the rows excluded from constraints."""

    pairs: tuple  # tuple of (row_index, frozenset of class ids)
    trimmed_rows: tuple = ()


def load_csv(path, label_column: str | None = None,
             num_classes: int | None = None) -> Dataset:
    """Load a header-bearing, comma-delimited CSV into a ``Dataset``.

    Feature columns must be numeric; any non-numeric or missing feature
    value is a hard error. Label values (numeric or string) are densely
    re-indexed to 0..K-1 with the mapping retained on the dataset.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDataset(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        label_idx = None
        if label_column is not None:
            if label_column not in header:
                raise MissingColumn(f"label column {label_column!r} not in header")
            label_idx = header.index(label_column)
        feature_idx = [i for i in range(len(header)) if i != label_idx]
        if not feature_idx:
            raise EmptyDataset("no feature columns")
        rows, raw_labels = [], []
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != len(header):
                raise NonNumericFeature(f"line {lineno}: expected {len(header)} fields")
            vals = []
            for i in feature_idx:
                cell = rec[i].strip()
                try:
                    v = float(cell)
                except ValueError:
                    raise NonNumericFeature(
                        f"line {lineno}, column {header[i]!r}: {cell!r}") from None
                if not np.isfinite(v):
                    raise NonNumericFeature(f"line {lineno}: non-finite value")
                vals.append(v)
            rows.append(vals)
            if label_idx is not None:
                raw_labels.append(rec[label_idx].strip())
    if not rows:
        raise EmptyDataset(f"{path}: no data rows")
    features = np.asarray(rows, dtype=np.float64)
    labels = None
    mapping: dict = {}
    k = 0 if num_classes is None else num_classes
    if label_idx is not None:
        try:
            keys = sorted(set(raw_labels), key=float)
        except ValueError:
            keys = sorted(set(raw_labels))
        mapping = {raw: dense for dense, raw in enumerate(keys)}
        labels = np.asarray([mapping[r] for r in raw_labels], dtype=np.int64)
        k = max(len(keys), 0 if num_classes is None else num_classes)
    names = [header[i] for i in feature_idx]
    ds = Dataset(features, labels, k, names, mapping)
    return ds


def split_indices(dataset: Dataset, spec: SplitSpec):
    """Partition row indices into (rest, held-out) per ``spec.fraction``.

    Stratified mode preserves per-class proportions within one row and
    requires at least one row of every class in each part.
    """
    if spec.fraction is None or not (0.0 < spec.fraction < 1.0):
        raise ClassTooSmall(f"invalid split fraction {spec.fraction!r}")
    m = dataset.num_rows
    rng = np.random.default_rng(spec.seed)
    if spec.stratified:
        if dataset.labels is None:
            raise ClassTooSmall("stratified split requires labels")
        test_parts, train_parts = [], []
        for c in range(dataset.num_classes):
            idx = np.flatnonzero(dataset.labels == c)
            if idx.size == 0:
                continue
            if idx.size < 2:
                raise ClassTooSmall(f"class {c} has {idx.size} row(s)")
            perm = rng.permutation(idx)
            n_test = int(round(spec.fraction * idx.size))
            n_test = min(max(n_test, 1), idx.size - 1)
            test_parts.append(perm[:n_test])
            train_parts.append(perm[n_test:])
        test = np.sort(np.concatenate(test_parts))
        train = np.sort(np.concatenate(train_parts))
    else:
        perm = rng.permutation(m)
        n_test = int(round(spec.fraction * m))
        n_test = min(max(n_test, 1), m - 1)
        test = np.sort(perm[:n_test])
        train = np.sort(perm[n_test:])
    return train, test


def split(dataset: Dataset, spec: SplitSpec):
    """Split a dataset into (rest, held-out) datasets per ``spec``."""
    train, test = split_indices(dataset, spec)
    return dataset.subset(train), dataset.subset(test)


def kfold(dataset: Dataset, k: int, seed: int, stratified: bool = True):
    """Deterministic k-fold partition; returns a list of (train_idx, test_idx)."""
    m = dataset.num_rows
    if k < 2 or k > m:
        raise FoldCountExceedsRows(f"k={k} invalid for {m} rows")
    rng = np.random.default_rng(seed)
    assignment = np.empty(m, dtype=np.int64)
    if stratified and dataset.labels is not None:
        offset = 0
        for c in range(dataset.num_classes):
            idx = np.flatnonzero(dataset.labels == c)
            if idx.size == 0:
                continue
            perm = rng.permutation(idx)
            # round-robin with a rolling offset so fold sizes stay balanced
            assignment[perm] = (np.arange(idx.size) + offset) % k
            offset = (offset + idx.size) % k
    else:
        perm = rng.permutation(m)
        assignment[perm] = np.arange(m) % k
    folds = []
    for f in range(k):
        test = np.flatnonzero(assignment == f)
        train = np.flatnonzero(assignment != f)
        folds.append((train, test))
    return folds


def accuracy(predictions, labels) -> float:
    """Plain 0-1 accuracy."""
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if predictions.shape != labels.shape or predictions.size == 0:
        raise LengthMismatch("prediction/label length mismatch")
    return float(np.mean(predictions == labels))
