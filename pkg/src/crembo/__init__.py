"""Robust model compression via predicate depth.

Finds the deepest hypothesis in a compact class against a belief oracle
(binary search over oracle values + a constraint-consistent learner) and
wraps it with trimming and validation-based selection for compression of
ensembles or stored-probability models into small decision trees.
"""

from .compression import CremboConfig, CremboResult, compress, crembo
from .core import (
    ConstraintSample,
    Dataset,
    SplitSpec,
    accuracy,
    kfold,
    load_csv,
    split,
    split_indices,
)
from .depth import (
    DepthProfile,
    depth_at_point,
    empirical_depth,
    sample_depth,
    trimmed_depth,
)
from .evaluation import (
    BreakdownProbeReport,
    ExperimentReport,
    agreement,
    breakdown_probe,
    generalization_experiment,
    robustness_experiment,
    win_rates,
)
from .learners import (
    ConstrainedTreeLearner,
    ExhaustiveLearner,
    ForestConfig,
    ForestModel,
    LearnerConfig,
    TreeModel,
    check_constraints,
    describe_tree,
    enumerate_hypotheses,
    load_model,
    predict,
    train_forest,
    train_standard_tree,
)
from .memo import MemoResult, build_constraints, memo, memo_trimmed
from .oracle import (
    MatrixOracleSource,
    ensemble_vote_oracle,
    matrix_oracle,
    softmax,
    threshold_set,
)
from .seeding import derive_seed

__version__ = "0.1.0"
