"""Experiment protocols: cross-validated generalization with win rates,
fold-omission robustness scored by prediction agreement, and an oracle
perturbation probe for the breakdown bound."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .compression import CremboConfig, crembo
from .core import Dataset, SplitSpec, accuracy, kfold, split_indices
from .errors import InstanceTooLarge, LengthMismatch
from .learners import (
    ConstrainedTreeLearner,
    ForestConfig,
    LearnerConfig,
    train_forest,
    train_standard_tree,
)
from .memo import memo
from .oracle import MatrixOracleSource, ensemble_vote_oracle, matrix_oracle
from .seeding import derive_seed

TREE_MODELS = ("BM", "ST", "MED")


@dataclass
class FoldOutcome:
    fold_index: int
    accuracies: dict
    models: dict = field(default_factory=dict)


@dataclass
class ExperimentReport:
    mean_accuracy: dict
    win_rate: dict
    repeats: int
    seed_list: list
    fold_outcomes: list = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {"mean_accuracy": {k: float(v) for k, v in self.mean_accuracy.items()},
                "win_rate": {k: float(v) for k, v in self.win_rate.items()},
                "repeats": self.repeats,
                "seed_list": [int(s) for s in self.seed_list],
                "folds": [{"fold": o.fold_index, "accuracies": o.accuracies}
                          for o in self.fold_outcomes]}

    def to_table(self) -> str:
        names = list(self.mean_accuracy)
        lines = ["model     accuracy   win rate",
                 "-----     --------   --------"]
        for n in names:
            wr = self.win_rate.get(n)
            wr_s = f"{wr:8.2f}" if wr is not None else "       -"
            lines.append(f"{n:<9} {100 * self.mean_accuracy[n]:8.2f}   {wr_s}")
        return "\n".join(lines)


def agreement(preds_a, preds_b) -> float:
    """Fraction of positions where two prediction vectors coincide."""
    a = np.asarray(preds_a)
    b = np.asarray(preds_b)
    if a.shape != b.shape or a.size == 0:
        raise LengthMismatch("prediction vectors must have equal nonzero length")
    return float(np.mean(a == b))


def win_rates(rounds, names=TREE_MODELS) -> dict:
    """Percentage of rounds each model wins; k-way ties credit 1/k."""
    wins = {n: 0.0 for n in names}
    for accs in rounds:
        top = max(accs[n] for n in names)
        winners = [n for n in names if accs[n] == top]
        for n in winners:
            wins[n] += 1.0 / len(winners)
    return {n: 100.0 * wins[n] / len(rounds) for n in names}


def _train_trio(train_set, big_predict, tree_cfg, crembo_cfg, seed,
                oracle_for):
    """Train BM, ST, and MED on one training set.

    ``big_predict`` maps local train-set row indices to big-model
    predictions; ``oracle_for`` maps a local row-index subset to the
    belief oracle over those rows.
    """
    bm = train_standard_tree(train_set, tree_cfg)
    teacher = big_predict(np.arange(train_set.num_rows))
    st = train_standard_tree(train_set, tree_cfg, labels=teacher)
    spec = SplitSpec(seed=derive_seed(seed, 1), fraction=crembo_cfg.val_fraction,
                     stratified=True)
    sub_idx, val_idx = split_indices(train_set, spec)
    oracle = oracle_for(sub_idx)
    learner = ConstrainedTreeLearner(tree_cfg, oracle=oracle,
                                     num_classes=train_set.num_classes)
    med = crembo(train_set.subset(sub_idx), train_set.subset(val_idx),
                 oracle, learner, crembo_cfg).model
    return {"BM": bm, "ST": st, "MED": med}


def _big_model_for(dataset, train_idx, big_kind, forest_cfg, matrix_source, seed):
    """Return (predict_fn over local rows, oracle_for over local subsets,
    test predict fn over global rows)."""
    if big_kind == "forest":
        forest = train_forest(dataset.subset(train_idx),
                              ForestConfig(**{**forest_cfg.__dict__, "seed": seed}))

        def big_predict(local_rows):
            return forest.predict(dataset.features[train_idx[local_rows]])

        def oracle_for(local_rows):
            return ensemble_vote_oracle(forest,
                                        dataset.subset(train_idx[local_rows]))

        def predict_global(rows):
            return forest.predict(dataset.features[rows])
    elif big_kind == "matrix":
        oracle_full = matrix_source

        def big_predict(local_rows):
            return np.argmax(oracle_full.matrix[train_idx[local_rows]], axis=1)

        def oracle_for(local_rows):
            return oracle_full.restrict(train_idx[local_rows])

        def predict_global(rows):
            return np.argmax(oracle_full.matrix[rows], axis=1)
    else:
        raise ValueError(f"unknown big model kind {big_kind!r}")
    return big_predict, oracle_for, predict_global


def generalization_experiment(dataset: Dataset, big_kind: str = "forest", *,
                              repeats: int = 20, folds: int = 10, seed: int = 0,
                              forest_cfg: ForestConfig | None = None,
                              tree_cfg: LearnerConfig | None = None,
                              crembo_cfg: CremboConfig | None = None,
                              matrix_path=None, stratified: bool = True,
                              keep_models: bool = False) -> ExperimentReport:
    """K-fold CV: big model, benchmark/student/median trees per fold."""
    if repeats < 1:
        raise LengthMismatch("repeats must be >= 1")
    forest_cfg = forest_cfg or ForestConfig()
    tree_cfg = tree_cfg or LearnerConfig()
    crembo_cfg = crembo_cfg or CremboConfig()
    matrix_source = None
    if big_kind == "matrix":
        matrix_source = matrix_oracle(matrix_path, dataset)
    seed_list = [derive_seed(seed, r) for r in range(repeats)]
    outcomes = []
    rounds = []
    for r, rep_seed in enumerate(seed_list):
        for j, (train_idx, test_idx) in enumerate(
                kfold(dataset, folds, rep_seed, stratified=stratified)):
            fold_seed = derive_seed(rep_seed, j)
            big_predict, oracle_for, predict_global = _big_model_for(
                dataset, train_idx, big_kind, forest_cfg, matrix_source, fold_seed)
            trio = _train_trio(dataset.subset(train_idx), big_predict, tree_cfg,
                               crembo_cfg, fold_seed, oracle_for)
            accs = {"BIG": accuracy(predict_global(test_idx),
                                    dataset.labels[test_idx])}
            for name, model in trio.items():
                accs[name] = accuracy(model.predict(dataset.features[test_idx]),
                                      dataset.labels[test_idx])
            rounds.append(accs)
            outcomes.append(FoldOutcome(r * folds + j, accs,
                                        trio if keep_models else {}))
    mean_acc = {n: float(np.mean([a[n] for a in rounds]))
                for n in ("BIG",) + TREE_MODELS}
    return ExperimentReport(mean_acc, win_rates(rounds), repeats, seed_list,
                            outcomes)


def robustness_experiment(dataset: Dataset, big_kind: str = "forest", *,
                          repeats: int = 20, folds: int = 10, seed: int = 0,
                          test_fraction: float = 0.15,
                          forest_cfg: ForestConfig | None = None,
                          tree_cfg: LearnerConfig | None = None,
                          crembo_cfg: CremboConfig | None = None,
                          matrix_path=None) -> dict:
    """Fold-omission protocol: agreement of same-type trees across rounds.

    Per repeat: hold out a test split, then run ``folds`` rounds each
    omitting one training fold; the score per model type is the mean
    agreement on the test split over all unordered round pairs.
    """
    forest_cfg = forest_cfg or ForestConfig()
    tree_cfg = tree_cfg or LearnerConfig()
    crembo_cfg = crembo_cfg or CremboConfig()
    matrix_source = None
    if big_kind == "matrix":
        matrix_source = matrix_oracle(matrix_path, dataset)
    scores = {n: [] for n in TREE_MODELS}
    for r in range(repeats):
        rep_seed = derive_seed(seed, r)
        spec = SplitSpec(seed=derive_seed(rep_seed, 999), fraction=test_fraction,
                         stratified=True)
        pool_idx, test_idx = split_indices(dataset, spec)
        pool = dataset.subset(pool_idx)
        preds = {n: [] for n in TREE_MODELS}
        # algorithm seeds stay fixed across rounds so agreement measures
        # sensitivity to the omitted fold, not to reseeding
        round_seed = derive_seed(rep_seed, 13)
        for round_local, _ in kfold(pool, folds, derive_seed(rep_seed, 7)):
            train_idx = pool_idx[round_local]
            fold_seed = round_seed
            big_predict, oracle_for, _ = _big_model_for(
                dataset, train_idx, big_kind, forest_cfg, matrix_source, fold_seed)
            trio = _train_trio(dataset.subset(train_idx), big_predict, tree_cfg,
                               crembo_cfg, fold_seed, oracle_for)
            for name, model in trio.items():
                preds[name].append(model.predict(dataset.features[test_idx]))
        for name in TREE_MODELS:
            pairs = [agreement(a, b)
                     for a, b in combinations(preds[name], 2)]
            scores[name].append(float(np.mean(pairs)))
    return {n: float(np.mean(scores[n])) for n in TREE_MODELS}


@dataclass
class BreakdownProbeReport:
    depth: float
    p_star: float
    x_star: int
    y_star: int
    bound: float
    passed: bool
    empirical_breakdown: float | None
    tested_deltas: list = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {"depth": self.depth, "p_star": self.p_star,
                "x_star": self.x_star, "y_star": self.y_star,
                "bound": self.bound, "passed": self.passed,
                "empirical_breakdown": self.empirical_breakdown,
                "tested_deltas": self.tested_deltas}


def _shift_row(row, target, delta, raise_target):
    """Move up to ``delta`` of mass toward/away from ``target``, spreading
    the balance proportionally; every entry moves by at most ``delta``."""
    row = row.copy()
    p = row[target]
    if raise_target:
        inc = min(delta, 1.0 - p)
        if inc <= 0.0:
            return row
        rest = 1.0 - p
        others = np.arange(row.size) != target
        row[others] *= (rest - inc) / rest
        row[target] = p + inc
    else:
        dec = min(delta, p)
        if dec <= 0.0:
            return row
        rest = 1.0 - p
        others = np.arange(row.size) != target
        if rest > 0.0:
            row[others] *= (rest + dec) / rest
        else:
            row[others] += dec / (row.size - 1)
        row[target] = p - dec
    return row


def breakdown_probe(dataset: Dataset, oracle: MatrixOracleSource, learner, *,
                    delta_step: float = 0.01, max_delta: float = 0.6,
                    max_rows: int = 6, max_classes: int = 3) -> BreakdownProbeReport:
    """Empirically verify the breakdown lower bound (depth - p*) / 2.

    Builds adversarial oracle perturbations that push belief toward the
    globally least-supported prediction (x*, y*) and away from the
    incumbent model; perturbations below the bound must never make the
    search return a model predicting y* at x*.
    """
    if dataset.num_rows > max_rows or oracle.num_classes > max_classes:
        raise InstanceTooLarge("breakdown probe is for desk-scale instances")
    if not getattr(learner, "exact", False):
        raise InstanceTooLarge("breakdown probe requires an exact learner")
    base = memo(dataset, oracle, learner)
    d_hat = base.depth
    flat = int(np.argmin(oracle.matrix))  # lowest (row, class), ties lexicographic
    x_star, y_star = divmod(flat, oracle.num_classes)
    p_star = float(oracle.matrix[x_star, y_star])
    bound = (d_hat - p_star) / 2.0
    incumbent = base.model.predict(dataset.features)
    tested = []
    passed = True
    empirical = None
    n_steps = int(round(max_delta / delta_step))
    for step in range(1, n_steps + 1):
        delta = step * delta_step
        m2 = oracle.matrix.copy()
        m2[x_star] = _shift_row(m2[x_star], y_star, delta, raise_target=True)
        for i in range(dataset.num_rows):
            if i == x_star:
                continue
            m2[i] = _shift_row(m2[i], int(incumbent[i]), delta, raise_target=False)
        delta_eff = float(np.abs(m2 - oracle.matrix).max())
        perturbed = MatrixOracleSource(m2)
        result = memo(dataset, perturbed, learner)
        flipped = int(result.model.predict(
            dataset.features[x_star:x_star + 1])[0]) == y_star
        tested.append({"delta": delta_eff, "flipped": flipped})
        if flipped:
            if empirical is None:
                empirical = delta_eff
            if delta_eff < bound:
                passed = False
    return BreakdownProbeReport(d_hat, p_star, int(x_star), int(y_star),
                                bound, passed, empirical, tested)
