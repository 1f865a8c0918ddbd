from itertools import combinations

import numpy as np

from app.ml.dataset import Dataset
from app.ml.decision_table import DecisionTableClassifier, train_decision_table


def predictive_dataset():
    """Feature 2 alone separates the classes; the others are noise."""
    rng = np.random.default_rng(0)
    X = rng.random((60, 5)) * 10
    labels = ["A"] * 36 + ["B"] * 24
    X[:36, 2] = [0.0, 1.0] * 18
    X[36:, 2] = [9.0, 10.0] * 12
    return Dataset.from_labels(X, labels, ("f0", "f1", "f2", "f3", "f4"))


class TestDecisionTable:

    def test_selects_predictive_feature(self):
        """Test the search keeps exactly the separating feature"""
        dataset = predictive_dataset()
        model = train_decision_table(dataset)
        assert model.selected == (2,)
        assert model.merit == 1.0

        binned = model.discretize(dataset.X)
        best = max(
            model.loo_accuracy(binned, dataset.y, subset)
            for size in range(6)
            for subset in combinations(range(5), size)
        )
        assert best <= model.merit

    def test_unmatched_query_gets_majority(self):
        """Test a row missing from the table falls back to the majority"""
        model = train_decision_table(predictive_dataset())
        query = np.full((1, 5), 5.0)
        assert model.predict_labels(query) == ["A"]
        assert model.predict_labels([[5.0, 5.0, 9.5, 5.0, 5.0]]) == ["B"]

    def test_useless_features_predict_majority(self):
        """Test constant features leave an empty subset and the majority class"""
        X = np.ones((5, 5))
        names = ("f0", "f1", "f2", "f3", "f4")
        dataset = Dataset.from_labels(X, ["A", "A", "A", "B", "B"], names)
        model = train_decision_table(dataset)
        assert model.selected == ()
        assert model.predict_labels(X) == ["A"] * 5

    def test_training_fit(self):
        """Test the table reproduces its training labels on separable data"""
        dataset = predictive_dataset()
        model = DecisionTableClassifier(bins=10).fit(dataset)
        assert (model.predict(dataset.X) == dataset.y).all()

    def test_equal_merit_keeps_smaller_subset(self):
        """Test duplicate separating features resolve to the first one alone"""
        column = np.array([0.0, 1.0] * 10 + [9.0, 10.0] * 10)
        dataset = Dataset.from_labels(
            np.column_stack((column, column, np.zeros(40))),
            ["A"] * 20 + ["B"] * 20,
            ("f0", "f1", "f2"),
        )
        model = train_decision_table(dataset)
        binned = model.discretize(dataset.X)
        assert model.loo_accuracy(binned, dataset.y, (0, 1)) == model.merit == 1.0
        assert model.loo_accuracy(binned, dataset.y, (1,)) == 1.0
        assert model.selected == (0,)
