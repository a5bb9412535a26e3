import numpy as np
import pytest

from crembo import Dataset, MatrixOracleSource


def write_csv(path, features, labels=None, label_name="label", header=None):
    cols = header or [f"f{i}" for i in range(features.shape[1])]
    with open(path, "w", encoding="utf-8") as fh:
        names = list(cols) + ([label_name] if labels is not None else [])
        fh.write(",".join(names) + "\n")
        for i, row in enumerate(features):
            cells = [repr(float(v)) for v in row]
            if labels is not None:
                cells.append(str(labels[i]))
            fh.write(",".join(cells) + "\n")


@pytest.fixture(scope="session")
def iris() -> Dataset:
    from sklearn.datasets import load_iris
    d = load_iris()
    return Dataset.from_arrays(d.data, d.target)


@pytest.fixture(scope="session")
def breast() -> Dataset:
    from sklearn.datasets import load_breast_cancer
    d = load_breast_cancer()
    return Dataset.from_arrays(d.data, d.target)


@pytest.fixture(scope="session")
def iris_csv(tmp_path_factory, iris):
    path = tmp_path_factory.mktemp("data") / "iris.csv"
    write_csv(path, iris.features, iris.labels, label_name="species")
    return str(path)


def random_instance(seed, max_rows=6, max_classes=3):
    """A tiny unlabeled dataset with a random simplex oracle."""
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, max_rows + 1))
    k = int(rng.integers(2, max_classes + 1))
    x = np.round(rng.uniform(0.0, 1.0, size=(m, 1)), 3)
    matrix = rng.dirichlet(np.ones(k), size=m)
    return (Dataset.from_arrays(x, num_classes=k),
            MatrixOracleSource(matrix))
