"""Binary decision trees on numeric features: shared induction plus the pruned C4.5-style tree."""

import logging
import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Any, Callable, Dict, Iterator, Optional, Tuple

import numpy as np

from app.errors import ValidationError
from app.ml.base import Classifier
from app.ml.dataset import Dataset

logger = logging.getLogger(__name__)

GAIN_RATIO = "gain_ratio"
INFO_GAIN = "info_gain"

_MIN_GAIN = 1e-12
# slack Weka's J48 grants the subtree before replacing it with a leaf
_PRUNE_SLACK = 0.1

FeatureSampler = Callable[[], np.ndarray]


@dataclass
class TreeNode:
    """A node holds the class counts of the instances that reached it."""

    distribution: np.ndarray
    feature: int = -1
    threshold: float = 0.0
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0

    @property
    def majority(self) -> int:
        return int(np.argmax(self.distribution))

    def make_leaf(self) -> None:
        self.feature, self.threshold, self.left, self.right = -1, 0.0, None, None

    def iter_nodes(self) -> Iterator["TreeNode"]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            if not node.is_leaf:
                stack.extend((node.right, node.left))

    def to_dict(self) -> Dict[str, Any]:
        document: Dict[str, Any] = {"distribution": self.distribution.tolist()}
        if not self.is_leaf:
            document.update(
                feature=self.feature,
                threshold=self.threshold,
                left=self.left.to_dict(),
                right=self.right.to_dict(),
            )
        return document

    @classmethod
    def from_dict(cls, document: Dict[str, Any]) -> "TreeNode":
        node = cls(distribution=np.asarray(document["distribution"], dtype=float))
        if "feature" in document:
            node.feature = int(document["feature"])
            node.threshold = float(document["threshold"])
            node.left = cls.from_dict(document["left"])
            node.right = cls.from_dict(document["right"])
        return node


def _plogp(counts: np.ndarray) -> np.ndarray:
    """c * log2(c) elementwise, with 0 * log2(0) = 0."""
    return counts * np.log2(np.maximum(counts, 1.0))


def _level_splits(
    X: np.ndarray,
    y: np.ndarray,
    rows: np.ndarray,
    slot: np.ndarray,
    counts: np.ndarray,
    allowed: np.ndarray,
    min_leaf: int,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Best information-gain cut of every (node, feature) pair on one tree level.

    `slot[i]` is the node holding training row `rows[i]`; `counts` has one row of
    class counts per node. Cuts sit midway between adjacent distinct values and
    leave at least `min_leaf` instances on each side; the earliest cut wins ties.
    Returns gains, gain ratios and thresholds, each shaped (nodes, features), with
    -inf gain where a node has no usable cut on a feature.
    """
    n_slots, n_classes = counts.shape
    n_features = X.shape[1]
    sizes = np.bincount(slot, minlength=n_slots)
    starts = np.concatenate(([0], np.cumsum(sizes)[:-1]))
    node_n = sizes.astype(float)
    parent = (_plogp(node_n) - _plogp(counts).sum(axis=1)) / node_n
    labels = y[rows]
    gains = np.full((n_slots, n_features), -np.inf)
    ratios = np.zeros((n_slots, n_features))
    thresholds = np.zeros((n_slots, n_features))

    for f in range(n_features):
        if not allowed[:, f].any():
            continue
        x = X[rows, f]
        # grouped by node, ascending value inside each node
        order = np.lexsort((x, slot))
        xs, ss = x[order], slot[order]
        cum = np.cumsum(labels[order][:, None] == np.arange(n_classes), axis=0, dtype=float)
        before_start = np.vstack((np.zeros((1, n_classes)), cum))[starts]
        left = cum - before_start[ss]
        n_left = (np.arange(xs.size) - starts[ss] + 1).astype(float)
        n_right = node_n[ss] - n_left
        right = counts[ss] - left
        following = np.append(xs[1:], np.inf)
        valid = (
            (n_left >= min_leaf) & (n_right >= min_leaf) & (xs < following) & allowed[ss, f]
        )
        children = (
            _plogp(n_left) - _plogp(left).sum(axis=1) + _plogp(n_right) - _plogp(right).sum(axis=1)
        ) / node_n[ss]
        gain = np.where(valid, parent[ss] - children, -np.inf)

        best = np.maximum.reduceat(gain, starts)
        hits = np.flatnonzero(gain == best[ss])
        _, first = np.unique(ss[hits], return_index=True)
        at = hits[first]

        g = gain[at]
        n_l = n_left[at]
        split_info = (_plogp(node_n) - _plogp(n_l) - _plogp(node_n - n_l)) / node_n
        midpoint = (xs[at] + following[at]) / 2.0
        gains[:, f] = np.where(g > _MIN_GAIN, g, -np.inf)
        ratios[:, f] = np.divide(
            g, split_info, out=np.zeros(n_slots), where=(split_info > 0) & (g > _MIN_GAIN)
        )
        thresholds[:, f] = np.where(midpoint >= following[at], xs[at], midpoint)
    return gains, ratios, thresholds


def choose_splits(gains: np.ndarray, ratios: np.ndarray, criterion: str) -> np.ndarray:
    """
    Feature chosen per node, -1 for none; the first feature wins ties.

    Gain ratio follows C4.5: only cuts whose gain reaches the node's mean gain
    compete on ratio.
    """
    candidate = gains > -np.inf
    if criterion == INFO_GAIN:
        score = gains
    else:
        n_candidates = np.maximum(candidate.sum(axis=1), 1)
        mean_gain = np.where(candidate, gains, 0.0).sum(axis=1) / n_candidates
        eligible = candidate & (gains >= mean_gain[:, None] - _MIN_GAIN)
        score = np.where(eligible, ratios, -np.inf)
    return np.where(candidate.any(axis=1), np.argmax(score, axis=1), -1)


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    min_leaf: int = 2,
    criterion: str = GAIN_RATIO,
    feature_sampler: Optional[FeatureSampler] = None,
) -> TreeNode:
    """
    Top-down induction, one level at a time. A node stays a leaf when it is
    pure, holds fewer than 2 * min_leaf instances, or no cut has positive gain.
    """
    if min_leaf < 1:
        raise ValidationError(f"min_leaf must be at least 1, got {min_leaf}")
    if criterion not in (GAIN_RATIO, INFO_GAIN):
        raise ValidationError(f"unknown split criterion {criterion!r}")
    n_features = X.shape[1]
    root = TreeNode(distribution=np.zeros(n_classes))
    nodes = [root]
    rows = np.arange(y.size)
    slot = np.zeros(y.size, dtype=int)

    while nodes:
        flat = slot * n_classes + y[rows]
        counts = np.bincount(flat, minlength=len(nodes) * n_classes)
        counts = counts.reshape(len(nodes), n_classes).astype(float)
        for node, distribution in zip(nodes, counts):
            node.distribution = distribution
        is_open = (np.count_nonzero(counts, axis=1) > 1) & (counts.sum(axis=1) >= 2 * min_leaf)
        if not is_open.any():
            break

        open_nodes = [node for node, flag in zip(nodes, is_open) if flag]
        keep = is_open[slot]
        rows, slot = rows[keep], (np.cumsum(is_open) - 1)[slot[keep]]
        counts = counts[is_open]

        allowed = np.zeros((len(open_nodes), n_features), dtype=bool)
        for i in range(len(open_nodes)):
            if feature_sampler is None:
                allowed[i] = True
            else:
                allowed[i, feature_sampler()] = True

        gains, ratios, thresholds = _level_splits(X, y, rows, slot, counts, allowed, min_leaf)
        feature = choose_splits(gains, ratios, criterion)
        threshold = thresholds[np.arange(feature.size), np.maximum(feature, 0)]

        nodes = []
        for node, f, t in zip(open_nodes, feature, threshold):
            if f < 0:
                continue
            node.feature, node.threshold = int(f), float(t)
            node.left = TreeNode(distribution=np.zeros(n_classes))
            node.right = TreeNode(distribution=np.zeros(n_classes))
            nodes.extend((node.left, node.right))

        splits = feature >= 0
        keep = splits[slot]
        rows, slot = rows[keep], slot[keep]
        goes_right = X[rows, feature[slot]] > threshold[slot]
        slot = 2 * (np.cumsum(splits) - 1)[slot] + goes_right
    return root


def predict_distributions(root: TreeNode, X: np.ndarray) -> np.ndarray:
    out = np.zeros((X.shape[0], root.distribution.size))
    stack = [(root, np.arange(X.shape[0]))]
    while stack:
        node, indices = stack.pop()
        if indices.size == 0:
            continue
        if node.is_leaf:
            out[indices] = node.distribution
            continue
        goes_left = X[indices, node.feature] <= node.threshold
        stack.append((node.left, indices[goes_left]))
        stack.append((node.right, indices[~goes_left]))
    return out


def count_errors(root: TreeNode, X: np.ndarray, y: np.ndarray) -> int:
    if y.size == 0:
        return 0
    predicted = np.argmax(predict_distributions(root, X), axis=1)
    return int(np.count_nonzero(predicted != y))


def added_errors(n: float, errors: float, confidence: float) -> float:
    """Upper-confidence correction on a leaf's observed error count."""
    if confidence > 0.5:
        raise ValidationError(f"confidence {confidence} must not exceed 0.5")
    if errors < 1:
        base = n * (1 - math.pow(confidence, 1.0 / n))
        if errors == 0:
            return base
        return base + errors * (added_errors(n, 1, confidence) - base)
    if errors + 0.5 >= n:
        return max(n - errors, 0.0)
    z = NormalDist().inv_cdf(1 - confidence)
    f = (errors + 0.5) / n
    r = (
        f
        + z * z / (2 * n)
        + z * math.sqrt(f / n - f * f / n + z * z / (4 * n * n))
    ) / (1 + z * z / n)
    return r * n - errors


def _leaf_estimate(node: TreeNode, confidence: float) -> float:
    n = float(node.distribution.sum())
    if n == 0:
        return 0.0
    errors = n - float(node.distribution.max())
    return errors + added_errors(n, errors, confidence)


def pessimistic_prune(node: TreeNode, confidence: float = 0.25) -> float:
    """Bottom-up subtree replacement; returns the node's estimated errors."""
    if node.is_leaf:
        return _leaf_estimate(node, confidence)
    subtree = pessimistic_prune(node.left, confidence) + pessimistic_prune(
        node.right, confidence
    )
    as_leaf = _leaf_estimate(node, confidence)
    if as_leaf <= subtree + _PRUNE_SLACK:
        node.make_leaf()
        return as_leaf
    return subtree


class TreeClassifier(Classifier):
    """Shared prediction and persistence for single-tree models."""

    def __init__(self):
        super().__init__()
        self.root: Optional[TreeNode] = None

    def predict_distribution(self, X) -> np.ndarray:
        X = self._check_query(X)
        return predict_distributions(self.root, X)

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_distribution(X), axis=1)

    def node_count(self) -> int:
        return sum(1 for _ in self.root.iter_nodes())

    def depth(self) -> int:
        def walk(node: TreeNode) -> int:
            return 0 if node.is_leaf else 1 + max(walk(node.left), walk(node.right))

        return walk(self.root)

    def state_dict(self) -> Dict[str, Any]:
        return {"root": self.root.to_dict()}

    def load_state(self, state: Dict[str, Any]) -> None:
        self.root = TreeNode.from_dict(state["root"])


class J48Classifier(TreeClassifier):
    tag = "j48"

    def __init__(self, min_leaf: int = 2, confidence: float = 0.25, prune: bool = True):
        super().__init__()
        if not 0 < confidence <= 0.5:
            raise ValidationError(f"confidence {confidence} outside (0, 0.5]")
        self.min_leaf = min_leaf
        self.confidence = confidence
        self.prune = prune

    def params(self) -> Dict[str, Any]:
        return {"min_leaf": self.min_leaf, "confidence": self.confidence, "prune": self.prune}

    def fit(self, dataset: Dataset) -> "J48Classifier":
        self._bind(dataset)
        self.root = grow_tree(
            dataset.X, dataset.y, dataset.n_classes, self.min_leaf, GAIN_RATIO
        )
        if self.prune:
            pessimistic_prune(self.root, self.confidence)
        logger.debug("j48: %d nodes, depth %d", self.node_count(), self.depth())
        return self


def train_j48(
    dataset: Dataset, min_leaf: int = 2, confidence: float = 0.25, prune: bool = True
) -> J48Classifier:
    return J48Classifier(min_leaf=min_leaf, confidence=confidence, prune=prune).fit(dataset)
