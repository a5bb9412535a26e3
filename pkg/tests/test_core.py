import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crembo import Dataset, SplitSpec, kfold, load_csv, split, split_indices
from crembo.errors import (
    ClassTooSmall,
    EmptyDataset,
    FoldCountExceedsRows,
    MissingColumn,
    NonNumericFeature,
)
from conftest import write_csv


class TestLoadCsv:
    def test_iris_shape(self, iris_csv):
        ds = load_csv(iris_csv, "species")
        assert ds.num_rows == 150
        assert ds.num_attrs == 4
        assert ds.num_classes == 3

    def test_missing_label_column(self, iris_csv):
        with pytest.raises(MissingColumn):
            load_csv(iris_csv, "nope")

    def test_label_only_file_is_empty(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("label\n1\n")
        with pytest.raises(EmptyDataset):
            load_csv(path, "label")

    def test_dense_reindexing(self, tmp_path):
        path = tmp_path / "remap.csv"
        path.write_text("a,label\n1.0,2\n2.0,5\n3.0,9\n")
        ds = load_csv(path, "label")
        assert ds.labels.tolist() == [0, 1, 2]
        assert ds.label_mapping == {"2": 0, "5": 1, "9": 2}
        assert ds.num_classes == 3

    def test_non_numeric_feature_rejected(self, tmp_path):
        path = tmp_path / "nan.csv"
        path.write_text("a,b,label\n1.0,x,0\n")
        with pytest.raises(NonNumericFeature):
            load_csv(path, "label")

    def test_string_labels(self, tmp_path):
        path = tmp_path / "str.csv"
        path.write_text("a,label\n1.0,cat\n2.0,dog\n3.0,cat\n")
        ds = load_csv(path, "label")
        assert ds.num_classes == 2
        assert sorted(ds.label_mapping) == ["cat", "dog"]


class TestSplit:
    def test_partition(self):
        rng = np.random.default_rng(0)
        ds = Dataset.from_arrays(rng.normal(size=(100, 3)),
                                 rng.integers(0, 2, 100))
        train, test = split_indices(ds, SplitSpec(seed=7, fraction=0.15))
        assert len(test) == 15 and len(train) == 85
        assert len(np.intersect1d(train, test)) == 0
        assert len(np.union1d(train, test)) == 100

    def test_determinism(self):
        rng = np.random.default_rng(1)
        ds = Dataset.from_arrays(rng.normal(size=(60, 2)),
                                 rng.integers(0, 3, 60))
        spec = SplitSpec(seed=42, fraction=0.3)
        a = split_indices(ds, spec)
        b = split_indices(ds, spec)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_stratified_proportions(self):
        labels = np.array([0] * 90 + [1] * 10)
        ds = Dataset.from_arrays(np.arange(100.0).reshape(-1, 1), labels)
        train, test = split_indices(ds, SplitSpec(seed=3, fraction=0.5))
        counts = np.bincount(labels[test])
        assert abs(counts[0] - 45) <= 1 and abs(counts[1] - 5) <= 1

    def test_class_too_small(self):
        ds = Dataset.from_arrays(np.arange(4.0).reshape(-1, 1),
                                 [0, 0, 0, 1])
        with pytest.raises(ClassTooSmall):
            split_indices(ds, SplitSpec(seed=0, fraction=0.5))

    def test_split_returns_datasets(self):
        ds = Dataset.from_arrays(np.arange(20.0).reshape(-1, 1),
                                 [0, 1] * 10)
        rest, held = split(ds, SplitSpec(seed=0, fraction=0.2))
        assert rest.num_rows + held.num_rows == 20

    @given(seed=st.integers(0, 2 ** 32), frac=st.floats(0.1, 0.9))
    @settings(max_examples=25, deadline=None)
    def test_partition_property(self, seed, frac):
        ds = Dataset.from_arrays(np.arange(40.0).reshape(-1, 1),
                                 [0, 1, 2, 3] * 10)
        train, test = split_indices(ds, SplitSpec(seed=seed, fraction=frac))
        assert len(np.union1d(train, test)) == 40
        assert len(np.intersect1d(train, test)) == 0


class TestKfold:
    def test_equal_folds(self, iris):
        folds = kfold(iris, 10, seed=0)
        assert len(folds) == 10
        assert all(len(test) == 15 for _, test in folds)

    def test_fold_count_exceeds_rows(self, iris):
        with pytest.raises(FoldCountExceedsRows):
            kfold(iris, 151, seed=0)

    def test_disjoint_cover(self, iris):
        folds = kfold(iris, 7, seed=5)
        all_test = np.concatenate([test for _, test in folds])
        assert len(all_test) == 150
        assert len(np.unique(all_test)) == 150
        for train, test in folds:
            assert len(np.intersect1d(train, test)) == 0

    def test_determinism(self, iris):
        a = kfold(iris, 10, seed=9)
        b = kfold(iris, 10, seed=9)
        for (ta, sa), (tb, sb) in zip(a, b):
            assert np.array_equal(ta, tb) and np.array_equal(sa, sb)
