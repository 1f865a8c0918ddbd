from typing import Any, Dict, List, Tuple

import numpy as np

from app.errors import ValidationError
from app.ml.dataset import Dataset


class Classifier:
    """
    Common surface of every trained model.

    `fit` learns from a Dataset and returns self; `predict` maps a feature
    matrix to class indices. Fitted models are never mutated afterwards, so
    they can be shared between threads.
    """

    tag = ""

    def __init__(self):
        self.class_names: Tuple[str, ...] = ()
        self.feature_names: Tuple[str, ...] = ()

    def fit(self, dataset: Dataset) -> "Classifier":
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        raise NotImplementedError

    def params(self) -> Dict[str, Any]:
        return {}

    def state_dict(self) -> Dict[str, Any]:
        raise NotImplementedError

    def load_state(self, state: Dict[str, Any]) -> None:
        raise NotImplementedError

    def predict_labels(self, X) -> List[str]:
        return [self.class_names[i] for i in self.predict(X)]

    def _bind(self, dataset: Dataset) -> None:
        dataset.require_instances()
        self.class_names = dataset.class_names
        self.feature_names = dataset.feature_names

    def _check_query(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != len(self.feature_names):
            raise ValidationError(
                f"expected {len(self.feature_names)} features, got {X.shape[1]}"
            )
        return X
