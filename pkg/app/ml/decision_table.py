import logging
from typing import Any, Dict, List, Tuple

import numpy as np

from app.errors import ValidationError
from app.ml.base import Classifier
from app.ml.dataset import Dataset

logger = logging.getLogger(__name__)

Subset = Tuple[int, ...]

_IMPROVEMENT = 1e-12


class DecisionTableClassifier(Classifier):
    """
    Lookup table over a selected feature subset.

    Features are cut into equal-width bins; the subset is chosen by best-first
    forward search on leave-one-out accuracy of the table. Rows matching no
    table entry get the training majority class.
    """

    tag = "decision_table"

    def __init__(self, bins: int = 10, stale_limit: int = 5):
        super().__init__()
        if bins < 1:
            raise ValidationError(f"bins must be at least 1, got {bins}")
        self.bins = bins
        self.stale_limit = stale_limit
        self.minimum = np.empty(0)
        self.width = np.empty(0)
        self.selected: Subset = ()
        self.table: Dict[Subset, np.ndarray] = {}
        self.majority = 0
        self.merit = 0.0

    def params(self) -> Dict[str, Any]:
        return {"bins": self.bins, "stale_limit": self.stale_limit}

    def discretize(self, X: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            scaled = np.where(self.width > 0, (X - self.minimum) / self.width, 0.0)
        return np.clip(np.floor(scaled), 0, self.bins - 1).astype(int)

    def loo_accuracy(self, binned: np.ndarray, y: np.ndarray, subset: Subset) -> float:
        """Leave-one-out accuracy of the table keyed on `subset`."""
        n_classes = len(self.class_names)
        n = y.size
        own = np.zeros((n, n_classes))
        own[np.arange(n), y] = 1.0
        global_counts = own.sum(axis=0)

        if subset:
            _, groups = np.unique(binned[:, list(subset)], axis=0, return_inverse=True)
            groups = groups.reshape(-1)
            group_counts = np.zeros((groups.max() + 1, n_classes))
            np.add.at(group_counts, groups, own)
            counts = group_counts[groups] - own
            alone = counts.sum(axis=1) == 0
            counts[alone] = global_counts - own[alone]
        else:
            counts = global_counts - own
        predicted = np.argmax(counts, axis=1)
        return float(np.mean(predicted == y))

    def search(self, binned: np.ndarray, y: np.ndarray) -> Tuple[Subset, float]:
        """
        Best-first forward selection.

        A subset replaces the incumbent only on strictly higher merit, so at equal
        merit the smaller subset is kept, then the one with lower feature indices.
        """
        n_features = binned.shape[1]
        best: Subset = ()
        best_merit = self.loo_accuracy(binned, y, best)
        frontier: List[Tuple[float, int, Subset]] = [(-best_merit, 0, best)]
        visited = {best}
        stale = 0
        while frontier and stale < self.stale_limit:
            frontier.sort()
            _, _, subset = frontier.pop(0)
            improved = False
            for feature in range(n_features):
                if feature in subset:
                    continue
                child = tuple(sorted(subset + (feature,)))
                if child in visited:
                    continue
                visited.add(child)
                merit = self.loo_accuracy(binned, y, child)
                frontier.append((-merit, len(child), child))
                if merit > best_merit + _IMPROVEMENT:
                    best, best_merit, improved = child, merit, True
            stale = 0 if improved else stale + 1
        return best, best_merit

    def fit(self, dataset: Dataset) -> "DecisionTableClassifier":
        self._bind(dataset)
        self.minimum = dataset.X.min(axis=0)
        self.width = (dataset.X.max(axis=0) - self.minimum) / self.bins
        binned = self.discretize(dataset.X)
        self.majority = int(np.argmax(dataset.class_counts()))
        self.selected, self.merit = self.search(binned, dataset.y)

        self.table = {}
        for key, label in zip(map(tuple, binned[:, list(self.selected)].tolist()), dataset.y):
            counts = self.table.setdefault(key, np.zeros(dataset.n_classes))
            counts[label] += 1
        logger.debug(
            "decision_table: features %s, %d rows, loo accuracy %.4f",
            self.selected,
            len(self.table),
            self.merit,
        )
        return self

    def predict(self, X) -> np.ndarray:
        binned = self.discretize(self._check_query(X))
        keys = map(tuple, binned[:, list(self.selected)].tolist())
        return np.array(
            [
                int(np.argmax(self.table[key])) if key in self.table else self.majority
                for key in keys
            ],
            dtype=int,
        )

    def state_dict(self) -> Dict[str, Any]:
        return {
            "minimum": self.minimum.tolist(),
            "width": self.width.tolist(),
            "selected": list(self.selected),
            "majority": self.majority,
            "merit": self.merit,
            "rows": [[list(key), counts.tolist()] for key, counts in self.table.items()],
        }

    def load_state(self, state: Dict[str, Any]) -> None:
        self.minimum = np.asarray(state["minimum"], dtype=float)
        self.width = np.asarray(state["width"], dtype=float)
        self.selected = tuple(state["selected"])
        self.majority = int(state["majority"])
        self.merit = float(state["merit"])
        self.table = {
            tuple(key): np.asarray(counts, dtype=float) for key, counts in state["rows"]
        }


def train_decision_table(dataset: Dataset, bins: int = 10) -> DecisionTableClassifier:
    return DecisionTableClassifier(bins=bins).fit(dataset)
