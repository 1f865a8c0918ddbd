import logging
from typing import Any, Dict, Tuple

import numpy as np

from app.errors import ValidationError
from app.ml.dataset import Dataset, stratified_assignment
from app.ml.trees import INFO_GAIN, TreeClassifier, TreeNode, grow_tree

logger = logging.getLogger(__name__)


def reduced_error_prune(node: TreeNode, X: np.ndarray, y: np.ndarray) -> int:
    """
    Collapse, bottom-up, every subtree that misclassifies at least as many
    prune-set instances as a leaf with its majority class would. Returns the
    prune-set errors of the node after pruning.
    """
    as_leaf = int(np.count_nonzero(y != node.majority))
    if node.is_leaf:
        return as_leaf
    goes_left = X[:, node.feature] <= node.threshold
    subtree = reduced_error_prune(node.left, X[goes_left], y[goes_left]) + reduced_error_prune(
        node.right, X[~goes_left], y[~goes_left]
    )
    if as_leaf <= subtree:
        node.make_leaf()
        return as_leaf
    return subtree


def backfit(node: TreeNode, X: np.ndarray, y: np.ndarray) -> None:
    """Add the prune-set class counts to every node they reach."""
    node.distribution = node.distribution + np.bincount(y, minlength=node.distribution.size)
    if node.is_leaf:
        return
    goes_left = X[:, node.feature] <= node.threshold
    backfit(node.left, X[goes_left], y[goes_left])
    backfit(node.right, X[~goes_left], y[~goes_left])


def split_grow_prune(y: np.ndarray, num_folds: int, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """One stratified fold is held out for pruning, the rest grows the tree."""
    assignment = stratified_assignment(y, num_folds, seed)
    return np.flatnonzero(assignment != 0), np.flatnonzero(assignment == 0)


def fit_reptree(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    grow_idx: np.ndarray,
    prune_idx: np.ndarray,
    min_leaf: int = 2,
) -> TreeNode:
    root = grow_tree(X[grow_idx], y[grow_idx], n_classes, min_leaf, INFO_GAIN)
    reduced_error_prune(root, X[prune_idx], y[prune_idx])
    backfit(root, X[prune_idx], y[prune_idx])
    return root


class REPTreeClassifier(TreeClassifier):
    tag = "reptree"

    def __init__(self, num_folds: int = 3, seed: int = 1, min_leaf: int = 2):
        super().__init__()
        if num_folds < 2:
            raise ValidationError(f"num_folds must be at least 2, got {num_folds}")
        self.num_folds = num_folds
        self.seed = seed
        self.min_leaf = min_leaf

    def params(self) -> Dict[str, Any]:
        return {"num_folds": self.num_folds, "seed": self.seed, "min_leaf": self.min_leaf}

    def fit(self, dataset: Dataset) -> "REPTreeClassifier":
        self._bind(dataset)
        if dataset.n_instances < max(3, self.num_folds):
            raise ValidationError(
                f"reduced-error pruning needs at least {max(3, self.num_folds)} instances"
            )
        grow_idx, prune_idx = split_grow_prune(dataset.y, self.num_folds, self.seed)
        self.root = fit_reptree(
            dataset.X, dataset.y, dataset.n_classes, grow_idx, prune_idx, self.min_leaf
        )
        logger.debug(
            "reptree: grew on %d, pruned on %d, %d nodes left",
            grow_idx.size,
            prune_idx.size,
            self.node_count(),
        )
        return self


def train_reptree(
    dataset: Dataset, num_folds: int = 3, seed: int = 1, min_leaf: int = 2
) -> REPTreeClassifier:
    return REPTreeClassifier(num_folds=num_folds, seed=seed, min_leaf=min_leaf).fit(dataset)
