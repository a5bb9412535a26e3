"""The compression wrapper: sweep trim levels, run trimmed MEMO on the
training part, and pick the compressed model by validation accuracy.

Selection ties break toward the smaller trim level, then the larger
depth. The full per-level trace is kept for audit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Dataset, SplitSpec, accuracy, split_indices
from .errors import AllEpsilonInfeasible, LearnerAlwaysFails, UnlabeledDataset
from .learners import ConstrainedTreeLearner, ForestModel, LearnerConfig
from .memo import memo_trimmed
from .oracle import MatrixOracleSource, ensemble_vote_oracle, matrix_oracle


@dataclass
class CremboConfig:
    trim_grid: tuple = (0.0, 0.01, 0.02, 0.05, 0.1)
    val_fraction: float = 0.15
    seed: int = 0


@dataclass
class EpsilonOutcome:
    epsilon: float
    feasible: bool
    depth: float | None = None
    val_accuracy: float | None = None

    def to_json_dict(self) -> dict:
        return {"epsilon": self.epsilon, "feasible": self.feasible,
                "depth": self.depth, "val_accuracy": self.val_accuracy}


@dataclass
class CremboResult:
    model: object
    chosen_epsilon: float
    depth: float
    val_accuracy: float
    trace: list = field(default_factory=list)
    oracle_kind: str = ""

    def to_json_dict(self) -> dict:
        return {"model": self.model.to_json_dict(),
                "chosen_epsilon": float(self.chosen_epsilon),
                "depth": float(self.depth),
                "val_accuracy": float(self.val_accuracy),
                "oracle_kind": self.oracle_kind,
                "trace": [t.to_json_dict() for t in self.trace]}


def crembo(train_set: Dataset, val_set: Dataset, oracle: MatrixOracleSource,
           learner, cfg: CremboConfig | None = None) -> CremboResult:
    """Run trimmed MEMO per trim level and select by validation accuracy."""
    cfg = cfg or CremboConfig()
    if val_set.labels is None:
        raise UnlabeledDataset("validation set must be labeled")
    trace = []
    best = None  # (val_acc, -eps, depth, result)
    for eps in cfg.trim_grid:
        try:
            result = memo_trimmed(train_set, oracle, learner, eps)
        except LearnerAlwaysFails:
            trace.append(EpsilonOutcome(eps, False))
            continue
        val_acc = accuracy(result.model.predict(val_set.features), val_set.labels)
        trace.append(EpsilonOutcome(eps, True, result.depth, val_acc))
        key = (val_acc, -eps, result.depth)
        if best is None or key > best[0]:
            best = (key, eps, result)
    if best is None:
        raise AllEpsilonInfeasible("every trim level was infeasible")
    if getattr(learner, "exact", False):
        feasible_depths = [t.depth for t in trace if t.feasible]
        assert feasible_depths == sorted(feasible_depths), \
            "trimmed depth must be nondecreasing in the trim level"
    _, eps, result = best
    return CremboResult(result.model, eps, result.depth,
                        best[0][0], trace)


def compress(dataset: Dataset, big_model, crembo_cfg: CremboConfig | None = None,
             learner_cfg: LearnerConfig | None = None,
             normalize_matrix: bool = False) -> CremboResult:
    """End-to-end pipeline: oracle adapter, train/val split, crembo.

    ``big_model`` is either a trained ``ForestModel`` or a path to a
    probability-matrix CSV aligned with ``dataset``.
    """
    crembo_cfg = crembo_cfg or CremboConfig()
    learner_cfg = learner_cfg or LearnerConfig()
    if isinstance(big_model, ForestModel):
        full_oracle = None
        kind = "forest-vote"
    else:
        full_oracle = matrix_oracle(big_model, dataset, normalize=normalize_matrix)
        kind = "matrix"
    spec = SplitSpec(seed=crembo_cfg.seed, fraction=crembo_cfg.val_fraction,
                     stratified=dataset.labels is not None)
    train_idx, val_idx = split_indices(dataset, spec)
    train_set = dataset.subset(train_idx)
    val_set = dataset.subset(val_idx)
    if full_oracle is None:
        oracle = ensemble_vote_oracle(big_model, train_set)
    else:
        oracle = full_oracle.restrict(train_idx)
    learner = ConstrainedTreeLearner(learner_cfg, oracle=oracle,
                                     num_classes=oracle.num_classes)
    result = crembo(train_set, val_set, oracle, learner, crembo_cfg)
    result.oracle_kind = kind
    return result
