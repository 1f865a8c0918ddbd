from typing import Any, Dict

import numpy as np

from app.errors import ValidationError
from app.ml.base import Classifier
from app.ml.dataset import Dataset

# query rows per distance block
_BLOCK = 512


class KNNClassifier(Classifier):
    """Majority vote of the k nearest training points on min-max normalised features."""

    tag = "knn"

    def __init__(self, k_neighbors: int = 1):
        super().__init__()
        if k_neighbors < 1:
            raise ValidationError(f"k_neighbors must be at least 1, got {k_neighbors}")
        self.k_neighbors = k_neighbors
        self.minimum = np.empty(0)
        self.span = np.empty(0)
        self.points = np.empty((0, 0))
        self.labels = np.empty(0, dtype=int)

    def params(self) -> Dict[str, Any]:
        return {"k_neighbors": self.k_neighbors}

    def _normalize(self, X: np.ndarray) -> np.ndarray:
        return (X - self.minimum) / self.span

    def fit(self, dataset: Dataset) -> "KNNClassifier":
        self._bind(dataset)
        if self.k_neighbors > dataset.n_instances:
            raise ValidationError(
                f"k_neighbors {self.k_neighbors} exceeds {dataset.n_instances} instances"
            )
        self.minimum = dataset.X.min(axis=0)
        span = dataset.X.max(axis=0) - self.minimum
        self.span = np.where(span > 0, span, 1.0)
        self.points = self._normalize(dataset.X)
        self.labels = dataset.y.copy()
        return self

    def neighbors(self, X) -> np.ndarray:
        """Indices of the k nearest training points per query; equal distances keep index order."""
        queries = self._normalize(self._check_query(X))
        result = np.empty((queries.shape[0], self.k_neighbors), dtype=int)
        for start in range(0, queries.shape[0], _BLOCK):
            block = queries[start:start + _BLOCK]
            distances = ((block[:, None, :] - self.points[None, :, :]) ** 2).sum(axis=2)
            order = np.argsort(distances, axis=1, kind="stable")
            result[start:start + _BLOCK] = order[:, : self.k_neighbors]
        return result

    def predict(self, X) -> np.ndarray:
        nearest = self.neighbors(X)
        n_classes = len(self.class_names)
        return np.array(
            [np.argmax(np.bincount(self.labels[row], minlength=n_classes)) for row in nearest],
            dtype=int,
        )

    def state_dict(self) -> Dict[str, Any]:
        return {
            "minimum": self.minimum.tolist(),
            "span": self.span.tolist(),
            "points": self.points.tolist(),
            "labels": self.labels.tolist(),
        }

    def load_state(self, state: Dict[str, Any]) -> None:
        self.minimum = np.asarray(state["minimum"], dtype=float)
        self.span = np.asarray(state["span"], dtype=float)
        self.points = np.asarray(state["points"], dtype=float).reshape(-1, self.minimum.size)
        self.labels = np.asarray(state["labels"], dtype=int)


def train_knn(dataset: Dataset, k_neighbors: int = 1) -> KNNClassifier:
    return KNNClassifier(k_neighbors=k_neighbors).fit(dataset)
