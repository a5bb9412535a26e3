"""Native learners: standard Gini decision trees, a bootstrap random
forest, a greedy constrained-tree learner for allowed-label-set
consistency, and an exact exhaustive learner for small hypothesis
classes.

Trees route a row left when ``feature < threshold``. All training is
deterministic under a fixed seed; split ties break by (lower feature
index, lower threshold).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import ConstraintSample, Dataset
from .errors import (
    ConflictingDuplicate,
    EnumerationBudgetExceeded,
    FeatureDimensionMismatch,
    InstanceTooLarge,
    UnlabeledDataset,
)
from .seeding import derive_seed

_TIE_EPS = 1e-12


@dataclass
class LearnerConfig:
    """Settings for single-tree learners."""

    max_depth: int = 4
    min_leaf_size: int = 1
    class_weighting: str = "balanced"  # or "uniform"
    seed: int = 0


@dataclass
class ForestConfig:
    tree_count: int = 100
    max_depth: int = 12
    seed: int = 0
    class_weighting: str = "balanced"
    min_leaf_size: int = 1


@dataclass
class TreeNode:
    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    leaf_class: int = -1
    distribution: np.ndarray | None = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def to_dict(self) -> dict:
        if self.is_leaf:
            d = {"leaf": int(self.leaf_class)}
            if self.distribution is not None:
                d["dist"] = [float(v) for v in self.distribution]
            return d
        return {"feat": int(self.feature), "thr": float(self.threshold),
                "left": self.left.to_dict(), "right": self.right.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "TreeNode":
        if "leaf" in d:
            dist = np.asarray(d["dist"], dtype=np.float64) if "dist" in d else None
            return cls(leaf_class=int(d["leaf"]), distribution=dist)
        return cls(feature=int(d["feat"]), threshold=float(d["thr"]),
                   left=cls.from_dict(d["left"]), right=cls.from_dict(d["right"]))


def _node_depth(node: TreeNode) -> int:
    if node.is_leaf:
        return 0
    return 1 + max(_node_depth(node.left), _node_depth(node.right))


@dataclass
class TreeModel:
    """A single decision tree over a fixed feature space."""

    root: TreeNode
    num_classes: int
    num_attrs: int
    max_depth: int
    feature_names: list[str] = field(default_factory=list)

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.num_attrs:
            raise FeatureDimensionMismatch(
                f"model expects {self.num_attrs} attrs, got {x.shape[1]}")
        out = np.empty(x.shape[0], dtype=np.int64)
        self._route(self.root, x, np.arange(x.shape[0]), out)
        return out

    def _route(self, node, x, idx, out):
        if idx.size == 0:
            return
        if node.is_leaf:
            out[idx] = node.leaf_class
            return
        go = x[idx, node.feature] < node.threshold
        self._route(node.left, x, idx[go], out)
        self._route(node.right, x, idx[~go], out)

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        out = np.zeros((x.shape[0], self.num_classes))
        self._route_proba(self.root, x, np.arange(x.shape[0]), out)
        return out

    def _route_proba(self, node, x, idx, out):
        if idx.size == 0:
            return
        if node.is_leaf:
            if node.distribution is not None:
                out[idx] = node.distribution
            else:
                out[idx, node.leaf_class] = 1.0
            return
        go = x[idx, node.feature] < node.threshold
        self._route_proba(node.left, x, idx[go], out)
        self._route_proba(node.right, x, idx[~go], out)

    @property
    def depth(self) -> int:
        return _node_depth(self.root)

    def to_json_dict(self) -> dict:
        return {"kind": "tree", "num_classes": self.num_classes,
                "num_attrs": self.num_attrs, "max_depth": self.max_depth,
                "feature_names": list(self.feature_names),
                "root": self.root.to_dict()}

    @classmethod
    def from_json_dict(cls, d: dict) -> "TreeModel":
        return cls(TreeNode.from_dict(d["root"]), int(d["num_classes"]),
                   int(d["num_attrs"]), int(d["max_depth"]),
                   list(d.get("feature_names", [])))


@dataclass
class ForestModel:
    """Bagged ensemble of trees; predicts by majority hard vote."""

    trees: list
    num_classes: int
    num_attrs: int
    per_tree_seeds: list[int] = field(default_factory=list)
    config: dict = field(default_factory=dict)

    @property
    def tree_count(self) -> int:
        return len(self.trees)

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.num_attrs:
            raise FeatureDimensionMismatch(
                f"model expects {self.num_attrs} attrs, got {x.shape[1]}")
        counts = np.zeros((x.shape[0], self.num_classes))
        for tree in self.trees:
            counts[np.arange(x.shape[0]), tree.predict(x)] += 1.0
        # argmax resolves vote ties to the lowest class id
        return np.argmax(counts, axis=1)

    def to_json_dict(self) -> dict:
        return {"kind": "forest", "num_classes": self.num_classes,
                "num_attrs": self.num_attrs,
                "per_tree_seeds": [int(s) for s in self.per_tree_seeds],
                "config": dict(self.config),
                "trees": [t.to_json_dict() for t in self.trees]}

    @classmethod
    def from_json_dict(cls, d: dict) -> "ForestModel":
        trees = [TreeModel.from_json_dict(t) for t in d["trees"]]
        return cls(trees, int(d["num_classes"]), int(d["num_attrs"]),
                   list(d.get("per_tree_seeds", [])), dict(d.get("config", {})))


def load_model(d: dict):
    if d.get("kind") == "forest":
        return ForestModel.from_json_dict(d)
    return TreeModel.from_json_dict(d)


def predict(model, x: np.ndarray) -> np.ndarray:
    """Predict class ids for a batch of rows with a tree or forest."""
    return model.predict(x)


def class_weights(labels: np.ndarray, num_classes: int, mode: str) -> np.ndarray:
    """Per-class sample weights; balanced uses m / (K * m_c)."""
    counts = np.bincount(labels, minlength=num_classes).astype(np.float64)
    if mode == "uniform":
        return np.ones(num_classes)
    present = counts > 0
    w = np.zeros(num_classes)
    w[present] = labels.size / (num_classes * counts[present])
    return w


def _best_gini_split(x, y, w, rows, features, min_leaf):
    """Lowest weighted child Gini over midpoint thresholds, or None."""
    best = None
    ysub = y[rows]
    row_w = w[ysub]
    m = rows.size
    k = w.size
    for f in features:
        v = x[rows, f]
        order = np.argsort(v, kind="stable")
        sv = v[order]
        sy = ysub[order]
        sw = row_w[order]
        cand = np.flatnonzero(sv[:-1] != sv[1:])
        if min_leaf > 1:
            cand = cand[(cand + 1 >= min_leaf) & (m - cand - 1 >= min_leaf)]
        if cand.size == 0:
            continue
        cw = np.zeros((m, k))
        cw[np.arange(m), sy] = sw
        np.cumsum(cw, axis=0, out=cw)
        total = cw[-1]
        left = cw[cand]
        right = total - left
        wl = left.sum(axis=1)
        wr = right.sum(axis=1)
        score = (wl - (left ** 2).sum(axis=1) / wl
                 + wr - (right ** 2).sum(axis=1) / wr) / total.sum()
        j = int(np.argmin(score))
        if best is None or score[j] < best[0] - _TIE_EPS:
            thr = 0.5 * (sv[cand[j]] + sv[cand[j] + 1])
            best = (float(score[j]), int(f), float(thr))
    return best


def _weighted_leaf(y, w, rows, num_classes) -> TreeNode:
    wc = np.bincount(y[rows], weights=w[y[rows]], minlength=num_classes)
    dist = wc / wc.sum()
    return TreeNode(leaf_class=int(np.argmax(wc)), distribution=dist)


def _grow(x, y, w, rows, depth, cfg, num_classes, rng=None, n_sub=None):
    ysub = y[rows]
    if depth >= cfg.max_depth or rows.size < 2 * cfg.min_leaf_size \
            or np.all(ysub == ysub[0]):
        return _weighted_leaf(y, w, rows, num_classes)
    if rng is not None and n_sub is not None and n_sub < x.shape[1]:
        features = np.sort(rng.choice(x.shape[1], size=n_sub, replace=False))
    else:
        features = np.arange(x.shape[1])
    best = _best_gini_split(x, y, w, rows, features, cfg.min_leaf_size)
    if best is None:
        return _weighted_leaf(y, w, rows, num_classes)
    _, f, thr = best
    go = x[rows, f] < thr
    left = _grow(x, y, w, rows[go], depth + 1, cfg, num_classes, rng, n_sub)
    right = _grow(x, y, w, rows[~go], depth + 1, cfg, num_classes, rng, n_sub)
    return TreeNode(feature=f, threshold=thr, left=left, right=right)


def train_standard_tree(dataset: Dataset, cfg: LearnerConfig,
                        labels: np.ndarray | None = None) -> TreeModel:
    """Greedy recursive partitioning minimizing class-weighted Gini.

    ``labels`` overrides the dataset labels (used to fit on teacher
    predictions).
    """
    y = dataset.labels if labels is None else np.asarray(labels, dtype=np.int64)
    if y is None:
        raise UnlabeledDataset("tree training requires labels")
    k = max(dataset.num_classes, int(y.max()) + 1)
    w = class_weights(y, k, cfg.class_weighting)
    rows = np.arange(dataset.num_rows, dtype=np.int64)
    root = _grow(dataset.features, y, w, rows, 0, cfg, k)
    return TreeModel(root, k, dataset.num_attrs, cfg.max_depth,
                     list(dataset.column_names))


def train_forest(dataset: Dataset, cfg: ForestConfig) -> ForestModel:
    """Bootstrap-aggregated trees with sqrt-feature subsampling per split.

    Per-tree seeds derive from the master seed via the splitmix chain, so
    results are independent of any parallel schedule.
    """
    if dataset.labels is None:
        raise UnlabeledDataset("forest training requires labels")
    m = dataset.num_rows
    k = dataset.num_classes
    n_sub = max(1, math.ceil(math.sqrt(dataset.num_attrs)))
    tree_cfg = LearnerConfig(max_depth=cfg.max_depth,
                             min_leaf_size=cfg.min_leaf_size,
                             class_weighting=cfg.class_weighting)
    seeds = [derive_seed(cfg.seed, t) for t in range(cfg.tree_count)]
    trees = []
    for seed in seeds:
        rng = np.random.default_rng(seed)
        boot = rng.integers(0, m, size=m)
        y = dataset.labels[boot]
        w = class_weights(y, k, cfg.class_weighting)
        rows = np.arange(m, dtype=np.int64)
        root = _grow(dataset.features[boot], y, w, rows, 0, tree_cfg, k,
                     rng=rng, n_sub=n_sub)
        trees.append(TreeModel(root, k, dataset.num_attrs, cfg.max_depth,
                               list(dataset.column_names)))
    return ForestModel(trees, k, dataset.num_attrs, seeds,
                       {"tree_count": cfg.tree_count, "max_depth": cfg.max_depth,
                        "seed": cfg.seed, "class_weighting": cfg.class_weighting})


def check_constraints(model, dataset: Dataset, constraints: ConstraintSample) -> bool:
    """Independent checker: model prediction lies in every allowed set."""
    if not constraints.pairs:
        return True
    rows = np.asarray([r for r, _ in constraints.pairs], dtype=np.int64)
    preds = model.predict(dataset.features[rows])
    return all(int(p) in allowed
               for p, (_, allowed) in zip(preds, constraints.pairs))


def _masks_from_pairs(pairs, num_classes):
    if num_classes > 62:
        raise InstanceTooLarge("more than 62 classes not supported")
    rows = np.asarray([r for r, _ in pairs], dtype=np.int64)
    masks = np.asarray([sum(1 << c for c in allowed) for _, allowed in pairs],
                       dtype=np.int64)
    return rows, masks


def _check_duplicates(x, rows, masks):
    order = np.lexsort(x[rows].T)
    xs = x[rows][order]
    ms = masks[order]
    start = 0
    for i in range(1, rows.size + 1):
        if i == rows.size or not np.array_equal(xs[i], xs[start]):
            if i - start > 1 and np.bitwise_and.reduce(ms[start:i]) == 0:
                raise ConflictingDuplicate(
                    "identical feature vectors with incompatible label sets")
            start = i


class ConstrainedTreeLearner:
    """Greedy tree learner honoring per-row allowed-label sets.

    Splits maximize the number of rows landing in children whose
    allowed-set intersection is non-empty; ties break by Gini over each
    row's most probable allowed class (oracle-informed when available),
    then by (feature, threshold). Returned models are re-verified against
    every constraint; failure to find a consistent tree returns None.
    """

    exact = False

    def __init__(self, cfg: LearnerConfig | None = None, oracle=None,
                 num_classes: int | None = None, split_scoring: str = "soft"):
        self.cfg = cfg or LearnerConfig()
        self.oracle = oracle
        self.num_classes = num_classes
        # "soft" breaks ties by Gini of the mean oracle belief (stable under
        # small oracle perturbations); "hard" uses one-hot representative
        # labels. Without an oracle both degrade to "hard".
        self.split_scoring = split_scoring if oracle is not None else "hard"

    def learn(self, dataset: Dataset, constraints: ConstraintSample):
        k = self.num_classes or dataset.num_classes \
            or (self.oracle.num_classes if self.oracle is not None else 0)
        if k < 2:
            raise InstanceTooLarge("cannot infer class count")
        if not constraints.pairs:
            return TreeModel(TreeNode(leaf_class=0), k, dataset.num_attrs,
                             self.cfg.max_depth, list(dataset.column_names))
        rows, masks = _masks_from_pairs(constraints.pairs, k)
        if np.any(masks == 0):
            return None
        x = dataset.features
        _check_duplicates(x, rows, masks)
        rep = self._representative_labels(rows, masks, k)
        if self.split_scoring == "soft":
            score_rows = self.oracle.matrix[rows][:, :k]
        else:
            score_rows = np.zeros((rows.size, k))
            score_rows[np.arange(rows.size), rep] = 1.0
        idx = np.arange(rows.size)
        root = self._build(x, rows, masks, rep, score_rows, idx, 0, k)
        if root is None:
            return None
        model = TreeModel(root, k, dataset.num_attrs, self.cfg.max_depth,
                          list(dataset.column_names))
        if not check_constraints(model, dataset, constraints):
            return None
        return model

    def _representative_labels(self, rows, masks, k):
        bits = ((masks[:, None] >> np.arange(k)) & 1).astype(bool)
        if self.oracle is not None:
            probs = self.oracle.matrix[rows][:, :k]
            return np.argmax(np.where(bits, probs, -1.0), axis=1)
        return np.argmax(bits, axis=1)  # lowest allowed class

    def _leaf(self, inter, rows, idx, k):
        allowed = [c for c in range(k) if (inter >> c) & 1]
        if self.oracle is not None and len(allowed) > 1:
            sums = self.oracle.matrix[rows[idx]][:, allowed].sum(axis=0)
            label = allowed[int(np.argmax(sums))]
        else:
            label = allowed[0]
        return TreeNode(leaf_class=label)

    def _build(self, x, rows, masks, rep, score_rows, idx, depth, k):
        inter = int(np.bitwise_and.reduce(masks[idx]))
        pure = bool(np.all(rep[idx] == rep[idx][0]))
        if inter != 0 and (depth >= self.cfg.max_depth or pure
                           or idx.size < 2 * self.cfg.min_leaf_size):
            return self._leaf(inter, rows, idx, k)
        if depth >= self.cfg.max_depth:
            return None
        best = self._best_split(x, rows, masks, score_rows, idx, k)
        if best is None:
            return self._leaf(inter, rows, idx, k) if inter != 0 else None
        f, thr = best
        go = x[rows[idx], f] < thr
        left = self._build(x, rows, masks, rep, score_rows, idx[go], depth + 1, k)
        right = None
        if left is not None:
            right = self._build(x, rows, masks, rep, score_rows, idx[~go],
                                depth + 1, k)
        if left is None or right is None:
            return self._leaf(inter, rows, idx, k) if inter != 0 else None
        return TreeNode(feature=f, threshold=thr, left=left, right=right)

    def _best_split(self, x, rows, masks, score_rows, idx, k):
        m = idx.size
        best = None  # (score, gini, feature, threshold)
        for f in range(x.shape[1]):
            v = x[rows[idx], f]
            order = np.argsort(v, kind="stable")
            sv = v[order]
            cand = np.flatnonzero(sv[:-1] != sv[1:])
            if self.cfg.min_leaf_size > 1:
                cand = cand[(cand + 1 >= self.cfg.min_leaf_size)
                            & (m - cand - 1 >= self.cfg.min_leaf_size)]
            if cand.size == 0:
                continue
            sm = masks[idx][order]
            pre = np.bitwise_and.accumulate(sm)
            suf = np.bitwise_and.accumulate(sm[::-1])[::-1]
            n_left = cand + 1
            n_right = m - n_left
            score = (n_left * (pre[cand] != 0)
                     + n_right * (suf[cand + 1] != 0)).astype(np.float64)
            cnt = np.cumsum(score_rows[idx][order], axis=0)
            left = cnt[cand]
            right = cnt[-1] - left
            gini = (n_left - (left ** 2).sum(axis=1) / n_left
                    + n_right - (right ** 2).sum(axis=1) / n_right) / m
            j = int(np.lexsort((cand, gini, -score))[0])
            if best is None or score[j] > best[0] + _TIE_EPS \
                    or (abs(score[j] - best[0]) <= _TIE_EPS
                        and gini[j] < best[1] - _TIE_EPS):
                thr = 0.5 * (sv[cand[j]] + sv[cand[j] + 1])
                best = (float(score[j]), float(gini[j]), int(f), float(thr))
        if best is None:
            return None
        return best[2], best[3]


def candidate_thresholds(x: np.ndarray, feature: int) -> np.ndarray:
    """Midpoints between consecutive distinct sorted values of a column."""
    vals = np.unique(x[:, feature])
    return (vals[:-1] + vals[1:]) / 2.0


def enumerate_hypotheses(dataset: Dataset, num_classes: int,
                         max_tree_depth: int = 1, thresholds=None,
                         budget: int = 10 ** 6):
    """Enumerate constants, stumps, and (optionally) depth-2 trees.

    Order: constants by class id; stumps by (feature, threshold, left
    class, right class); then depth-2 trees. The same enumeration backs
    both the exact learner and brute-force depth maximization.
    """
    k = num_classes
    x = dataset.features
    if thresholds is None:
        thresholds = {f: candidate_thresholds(x, f) for f in range(x.shape[1])}
    n_thr = sum(len(t) for t in thresholds.values())
    n_stumps = n_thr * k * (k - 1)
    total = k + (n_stumps if max_tree_depth >= 1 else 0)
    if max_tree_depth >= 2:
        total += n_thr * (k + n_stumps) ** 2
    if total > budget:
        raise EnumerationBudgetExceeded(f"{total} candidates exceed budget {budget}")

    def make(root):
        return TreeModel(root, k, dataset.num_attrs, max_tree_depth)

    def subtrees():
        for c in range(k):
            yield TreeNode(leaf_class=c)
        for f in sorted(thresholds):
            for thr in thresholds[f]:
                for cl in range(k):
                    for cr in range(k):
                        if cl == cr:
                            continue
                        yield TreeNode(feature=f, threshold=float(thr),
                                       left=TreeNode(leaf_class=cl),
                                       right=TreeNode(leaf_class=cr))

    for c in range(k):
        yield make(TreeNode(leaf_class=c))
    if max_tree_depth >= 1:
        for f in sorted(thresholds):
            for thr in thresholds[f]:
                for cl in range(k):
                    for cr in range(k):
                        if cl == cr:
                            continue
                        yield make(TreeNode(feature=f, threshold=float(thr),
                                            left=TreeNode(leaf_class=cl),
                                            right=TreeNode(leaf_class=cr)))
    if max_tree_depth >= 2:
        for f in sorted(thresholds):
            for thr in thresholds[f]:
                for left in subtrees():
                    for right in subtrees():
                        yield make(TreeNode(feature=f, threshold=float(thr),
                                            left=left, right=right))


class ExhaustiveLearner:
    """Exact consistency oracle over an enumerable hypothesis class.

    Returns the first enumerated hypothesis satisfying every constraint,
    or None if the class contains no consistent member.
    """

    exact = True

    def __init__(self, max_tree_depth: int = 1, thresholds=None,
                 num_classes: int | None = None, budget: int = 10 ** 6):
        self.max_tree_depth = max_tree_depth
        self.thresholds = thresholds
        self.num_classes = num_classes
        self.budget = budget

    def learn(self, dataset: Dataset, constraints: ConstraintSample):
        k = self.num_classes or dataset.num_classes
        if k < 2:
            raise InstanceTooLarge("cannot infer class count")
        pairs = constraints.pairs
        rows = np.asarray([r for r, _ in pairs], dtype=np.int64)
        masks = np.asarray([sum(1 << c for c in allowed) for _, allowed in pairs],
                           dtype=np.int64) if pairs else np.zeros(0, dtype=np.int64)
        if pairs and np.any(masks == 0):
            return None
        xs = dataset.features[rows] if pairs else None
        for model in enumerate_hypotheses(dataset, k, self.max_tree_depth,
                                          self.thresholds, self.budget):
            if not pairs:
                return model
            preds = model.predict(xs)
            if np.all((masks >> preds) & 1):
                return model
        return None


def describe_tree(model: TreeModel) -> str:
    """Render a tree as indented if/else text."""
    names = model.feature_names or [f"f{i}" for i in range(model.num_attrs)]

    def walk(node, indent):
        pad = "  " * indent
        if node.is_leaf:
            return f"{pad}class {node.leaf_class}\n"
        return (f"{pad}if {names[node.feature]} < {node.threshold:.6g}:\n"
                + walk(node.left, indent + 1)
                + f"{pad}else:\n"
                + walk(node.right, indent + 1))

    return walk(model.root, 0)
