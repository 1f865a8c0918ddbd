import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional

import numpy as np

from app.errors import ValidationError
from app.ml.base import Classifier
from app.ml.dataset import Dataset
from app.ml.trees import GAIN_RATIO, TreeNode, grow_tree, predict_distributions

logger = logging.getLogger(__name__)


def default_features_per_split(n_features: int) -> int:
    return int(math.floor(math.log2(n_features) + 1))


class RandomForestClassifier(Classifier):
    """
    Unpruned trees on bootstrap samples, each node choosing among a fresh
    random subset of features; prediction is a majority vote.

    Tree i draws from its own generator seeded by the i-th state of the master
    seed's SeedSequence, so results do not depend on `n_jobs`.
    """

    tag = "random_forest"

    def __init__(
        self,
        n_trees: int = 100,
        features_per_split: Optional[int] = None,
        seed: int = 1,
        bootstrap: bool = True,
        min_leaf: int = 1,
        n_jobs: int = 1,
    ):
        super().__init__()
        if n_trees < 1:
            raise ValidationError(f"n_trees must be at least 1, got {n_trees}")
        self.n_trees = n_trees
        self.features_per_split = features_per_split
        self.seed = seed
        self.bootstrap = bootstrap
        self.min_leaf = min_leaf
        self.n_jobs = n_jobs
        self.trees: List[TreeNode] = []

    def params(self) -> Dict[str, Any]:
        return {
            "n_trees": self.n_trees,
            "features_per_split": self.features_per_split,
            "seed": self.seed,
            "bootstrap": self.bootstrap,
            "min_leaf": self.min_leaf,
        }

    def _grow_one(self, dataset: Dataset, tree_seed: int, m: int) -> TreeNode:
        rng = np.random.default_rng(tree_seed)
        n, n_features = dataset.n_instances, dataset.n_features
        sample = rng.integers(0, n, size=n) if self.bootstrap else np.arange(n)

        def sampler() -> np.ndarray:
            return np.sort(rng.choice(n_features, size=m, replace=False))

        return grow_tree(
            dataset.X[sample],
            dataset.y[sample],
            dataset.n_classes,
            self.min_leaf,
            GAIN_RATIO,
            sampler,
        )

    def fit(self, dataset: Dataset) -> "RandomForestClassifier":
        self._bind(dataset)
        m = self.features_per_split or default_features_per_split(dataset.n_features)
        if not 1 <= m <= dataset.n_features:
            raise ValidationError(
                f"features_per_split {m} outside 1..{dataset.n_features}"
            )
        tree_seeds = np.random.SeedSequence(self.seed).generate_state(self.n_trees)
        if self.n_jobs > 1:
            with ThreadPoolExecutor(max_workers=self.n_jobs) as pool:
                self.trees = list(
                    pool.map(lambda s: self._grow_one(dataset, int(s), m), tree_seeds)
                )
        else:
            self.trees = [self._grow_one(dataset, int(s), m) for s in tree_seeds]
        logger.debug("random_forest: grew %d trees, %d features per split", self.n_trees, m)
        return self

    def vote_counts(self, X) -> np.ndarray:
        X = self._check_query(X)
        votes = np.zeros((X.shape[0], len(self.class_names)), dtype=int)
        rows = np.arange(X.shape[0])
        for tree in self.trees:
            winners = np.argmax(predict_distributions(tree, X), axis=1)
            np.add.at(votes, (rows, winners), 1)
        return votes

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.vote_counts(X), axis=1)

    def node_count(self) -> int:
        return sum(sum(1 for _ in tree.iter_nodes()) for tree in self.trees)

    def state_dict(self) -> Dict[str, Any]:
        return {"trees": [tree.to_dict() for tree in self.trees]}

    def load_state(self, state: Dict[str, Any]) -> None:
        self.trees = [TreeNode.from_dict(tree) for tree in state["trees"]]


def train_random_forest(
    dataset: Dataset,
    n_trees: int = 100,
    features_per_split: Optional[int] = None,
    seed: int = 1,
    **options,
) -> RandomForestClassifier:
    return RandomForestClassifier(
        n_trees=n_trees, features_per_split=features_per_split, seed=seed, **options
    ).fit(dataset)
