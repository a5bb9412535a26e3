"""End-to-end acceptance checks.

Each test prints a single pass/fail line so the suite doubles as a
human-readable report (run with ``pytest -s tests/test_acceptance.py``).
"""

import math

import numpy as np
import pytest

from crembo import (
    ConstrainedTreeLearner,
    CremboConfig,
    Dataset,
    ExhaustiveLearner,
    ForestConfig,
    LearnerConfig,
    accuracy,
    breakdown_probe,
    build_constraints,
    check_constraints,
    crembo,
    empirical_depth,
    ensemble_vote_oracle,
    enumerate_hypotheses,
    generalization_experiment,
    memo,
    robustness_experiment,
    threshold_set,
    train_forest,
    trimmed_depth,
)
from crembo.errors import ConflictingDuplicate

from conftest import random_instance


def _report(number, title, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    suffix = f"  ({detail})" if detail else ""
    print(f"\n[{status}] criterion {number}: {title}{suffix}")
    assert ok, f"criterion {number} failed: {detail}"


def _brute_force_depth(dataset, oracle):
    best = -1.0
    for h in enumerate_hypotheses(dataset, oracle.num_classes, max_tree_depth=1):
        best = max(best, empirical_depth(h, oracle, dataset).overall)
    return best


def _heart_surrogate():
    """Noisy ordinal 5-class dataset standing in for the Heart table."""
    rng = np.random.default_rng(7)
    n, f, k = 300, 13, 5
    x = rng.normal(size=(n, f))
    z = (x[:, 0] + 0.8 * x[:, 1] + 0.6 * x[:, 2] + 0.4 * x[:, 3]
         + 1.5 * rng.normal(size=n))
    y = np.digitize(z, np.quantile(z, [0.45, 0.65, 0.8, 0.92]))
    noise = rng.random(n) < 0.2
    y = np.where(noise, rng.integers(0, k, n), y)
    return Dataset.from_arrays(x, y, num_classes=k)


class TestSearchOptimality:
    def test_criterion_1_memo_matches_brute_force(self):
        mismatches = 0
        for seed in range(100):
            ds, oracle = random_instance(seed)
            learner = ExhaustiveLearner(num_classes=oracle.num_classes)
            if memo(ds, oracle, learner).depth != _brute_force_depth(ds, oracle):
                mismatches += 1
        _report(1, "search depth equals brute-force maximum",
                mismatches == 0, f"{100 - mismatches}/100 instances exact")

    def test_criterion_2_learner_call_bound(self, iris):
        violations = 0
        for seed in range(100):
            ds, oracle = random_instance(seed)
            res = memo(ds, oracle, ExhaustiveLearner(num_classes=oracle.num_classes))
            bound = math.ceil(math.log2(len(threshold_set(oracle)))) + 1
            if res.learner_calls > bound:
                violations += 1
        forest = train_forest(iris, ForestConfig(tree_count=100, max_depth=12,
                                                 seed=0))
        oracle = ensemble_vote_oracle(forest, iris)
        learner = ConstrainedTreeLearner(LearnerConfig(max_depth=4),
                                         oracle=oracle, num_classes=3)
        calls = memo(iris, oracle, learner).learner_calls
        ok = violations == 0 and calls <= 8
        _report(2, "learner invocations within the logarithmic bound", ok,
                f"0 small-instance violations expected (got {violations}); "
                f"100-tree vote oracle used {calls} calls (<= 8)")

    def test_criterion_3_breakdown_bound(self):
        failures = 0
        for seed in range(50):
            ds, oracle = random_instance(seed)
            learner = ExhaustiveLearner(num_classes=oracle.num_classes)
            report = breakdown_probe(ds, oracle, learner, delta_step=0.01)
            bad = (not report.passed or
                   (report.empirical_breakdown is not None and
                    report.empirical_breakdown < report.bound - 1e-9))
            if bad:
                failures += 1
        _report(3, "perturbations below (depth - p*)/2 never flip the target",
                failures == 0, f"{50 - failures}/50 instances respected the bound")

    def test_criterion_4_reductions(self):
        mismatches = 0
        for seed in range(100):
            ds, oracle = random_instance(seed)
            learner = ExhaustiveLearner(num_classes=oracle.num_classes)
            plain = memo(ds, oracle, learner)
            labels = np.zeros(ds.num_rows, dtype=int)
            val = Dataset.from_arrays(ds.features, labels,
                                      num_classes=oracle.num_classes)
            wrapped = crembo(ds, val, oracle, learner,
                             CremboConfig(trim_grid=(0.0,)))
            same_model = (wrapped.model.to_json_dict()
                          == plain.model.to_json_dict()
                          and wrapped.depth == plain.depth)
            f = plain.model
            a = trimmed_depth(f, oracle, ds, 0.0)
            b = empirical_depth(f, oracle, ds)
            same_depth = (a.overall == b.overall and a.per_point == b.per_point
                          and a.trimmed_rows == ())
            if not (same_model and same_depth):
                mismatches += 1
        _report(4, "single-level sweep and zero trim reduce bit-identically",
                mismatches == 0, f"{100 - mismatches}/100 instances identical")

    def test_criterion_5_constraint_soundness(self):
        rng = np.random.default_rng(12345)
        checked = 0
        unsound = 0
        for seed in range(100):
            ds, oracle = random_instance(seed)
            k = oracle.num_classes
            d = float(rng.choice(threshold_set(oracle)))
            constraints = build_constraints(oracle, np.arange(ds.num_rows), d)
            for learner in (ExhaustiveLearner(num_classes=k),
                            ConstrainedTreeLearner(LearnerConfig(max_depth=3),
                                                   oracle=oracle,
                                                   num_classes=k)):
                try:
                    model = learner.learn(ds, constraints)
                except ConflictingDuplicate:
                    continue
                if model is None:
                    continue
                checked += 1
                if not check_constraints(model, ds, constraints):
                    unsound += 1
        _report(5, "every returned model satisfies its constraints",
                checked > 50 and unsound == 0,
                f"{checked - unsound}/{checked} returned models sound")


class TestQuantitativeReproduction:
    def test_criterion_6_iris_accuracy_and_win_rate(self, iris):
        report = generalization_experiment(iris, repeats=5, folds=10, seed=0)
        med = report.mean_accuracy["MED"]
        wr = report.win_rate
        in_band = abs(med - 0.9466) <= 0.05
        strictly_highest = (wr["MED"] > wr["BM"] and wr["MED"] > wr["ST"])
        _report(6, "iris compressed-tree accuracy and win rate",
                in_band and strictly_highest,
                f"MED accuracy {100 * med:.2f}% (target 94.66 +/- 5); win rates "
                f"BM {wr['BM']:.1f} / ST {wr['ST']:.1f} / MED {wr['MED']:.1f}")

    def test_criterion_7_breast_cancer_bands(self, breast):
        report = generalization_experiment(breast, repeats=2, folds=10, seed=0)
        accs = {n: report.mean_accuracy[n] for n in ("BM", "ST", "MED")}
        in_band = all(0.87 <= a <= 0.99 for a in accs.values())
        detail = ", ".join(f"{n} {100 * a:.2f}%" for n, a in accs.items())
        _report(7, "breast-cancer trees inside the 92-94 +/- 5 band",
                in_band, detail + " (band 87-99)")

    def test_criterion_8_robustness_direction(self):
        ds = _heart_surrogate()
        scores = robustness_experiment(ds, repeats=3, seed=0)
        ok = scores["MED"] > scores["BM"]
        _report(8, "fold-omission agreement favors the compressed median tree",
                ok, f"MED {100 * scores['MED']:.2f} vs BM {100 * scores['BM']:.2f}")
