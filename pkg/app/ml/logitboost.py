import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np

from app.errors import ValidationError
from app.ml.base import Classifier
from app.ml.dataset import Dataset

logger = logging.getLogger(__name__)

# working responses are clipped to +-Z_MAX
Z_MAX = 3.0
_MIN_WEIGHT = 1e-10


@dataclass(frozen=True)
class Stump:
    """Weighted least-squares regression stump: `left` when x <= threshold."""

    feature: int
    threshold: float
    left: float
    right: float

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        if self.feature < 0:
            return np.full(X.shape[0], self.left)
        return np.where(X[:, self.feature] <= self.threshold, self.left, self.right)

    def to_list(self) -> List[float]:
        return [self.feature, self.threshold, self.left, self.right]

    @classmethod
    def from_list(cls, values) -> "Stump":
        feature, threshold, left, right = values
        return cls(int(feature), float(threshold), float(left), float(right))


def fit_stump(
    X: np.ndarray,
    z: np.ndarray,
    w: np.ndarray,
    orders: Optional[List[np.ndarray]] = None,
) -> Stump:
    """
    Single-feature cut minimising the weighted squared error of z.

    The lowest feature, then the earliest cut, wins ties. `orders` holds the
    presorted row order of each feature.
    """
    total_w = w.sum()
    total_wz = (w * z).sum()
    best: Optional[Stump] = None
    best_sse = np.inf
    for feature in range(X.shape[1]):
        if orders is not None:
            order = orders[feature]
        else:
            order = np.argsort(X[:, feature], kind="stable")
        xs, ws, zs = X[order, feature], w[order], z[order]
        left_w = np.cumsum(ws)[:-1]
        left_wz = np.cumsum(ws * zs)[:-1]
        right_w = total_w - left_w
        right_wz = total_wz - left_wz
        valid = (xs[:-1] < xs[1:]) & (left_w > 0) & (right_w > 0)
        if not valid.any():
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            # weighted SSE minus the constant sum of w*z^2
            sse = np.where(valid, -(left_wz**2) / left_w - (right_wz**2) / right_w, np.inf)
        i = int(np.argmin(sse))
        if sse[i] < best_sse - 1e-12:
            best_sse = sse[i]
            threshold = (xs[i] + xs[i + 1]) / 2.0
            if threshold >= xs[i + 1]:
                threshold = xs[i]
            best = Stump(
                feature,
                float(threshold),
                float(left_wz[i] / left_w[i]),
                float(right_wz[i] / right_w[i]),
            )
    if best is None:
        mean = float(total_wz / total_w) if total_w > 0 else 0.0
        best = Stump(-1, 0.0, mean, mean)
    return best


def softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


class LogitBoostClassifier(Classifier):
    """
    Additive logistic regression, one regression stump per class per round.

    Each round's class outputs are centred and scaled by (J-1)/J before they
    join the additive scores.
    """

    tag = "logitboost"

    def __init__(self, iterations: int = 10):
        super().__init__()
        if iterations < 0:
            raise ValidationError(f"iterations must be non-negative, got {iterations}")
        self.iterations = iterations
        self.rounds: List[List[Stump]] = []

    def params(self) -> Dict[str, Any]:
        return {"iterations": self.iterations}

    def _round_scores(self, stumps: List[Stump], X: np.ndarray) -> np.ndarray:
        n_classes = len(stumps)
        raw = np.column_stack([stump.evaluate(X) for stump in stumps])
        return (n_classes - 1) / n_classes * (raw - raw.mean(axis=1, keepdims=True))

    def fit(self, dataset: Dataset) -> "LogitBoostClassifier":
        self._bind(dataset)
        if np.unique(dataset.y).size < 2:
            raise ValidationError("LogitBoost needs at least two classes")
        X, y = dataset.X, dataset.y
        n, n_classes = dataset.n_instances, dataset.n_classes
        targets = np.zeros((n, n_classes))
        targets[np.arange(n), y] = 1.0
        orders = [np.argsort(X[:, f], kind="stable") for f in range(X.shape[1])]

        scores = np.zeros((n, n_classes))
        probabilities = np.full((n, n_classes), 1.0 / n_classes)
        self.rounds = []
        for iteration in range(self.iterations):
            stumps = []
            for j in range(n_classes):
                p = probabilities[:, j]
                spread = p * (1 - p)
                with np.errstate(divide="ignore", invalid="ignore"):
                    z = np.where(spread > 0, (targets[:, j] - p) / spread, 0.0)
                z = np.clip(z, -Z_MAX, Z_MAX)
                w = np.maximum(spread, _MIN_WEIGHT)
                stumps.append(fit_stump(X, z, w, orders))
            self.rounds.append(stumps)
            scores += self._round_scores(stumps, X)
            probabilities = softmax(scores)
            logger.debug("logitboost round %d done", iteration + 1)
        return self

    def decision_scores(self, X, iterations: Optional[int] = None) -> np.ndarray:
        """Additive class scores after the first `iterations` rounds (all by default)."""
        X = self._check_query(X)
        scores = np.zeros((X.shape[0], len(self.class_names)))
        for stumps in self.rounds[: iterations if iterations is not None else len(self.rounds)]:
            scores += self._round_scores(stumps, X)
        return scores

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.decision_scores(X), axis=1)

    def state_dict(self) -> Dict[str, Any]:
        return {"rounds": [[stump.to_list() for stump in stumps] for stumps in self.rounds]}

    def load_state(self, state: Dict[str, Any]) -> None:
        self.rounds = [[Stump.from_list(values) for values in stumps] for stumps in state["rounds"]]


def train_logitboost(dataset: Dataset, iterations: int = 10) -> LogitBoostClassifier:
    return LogitBoostClassifier(iterations=iterations).fit(dataset)
