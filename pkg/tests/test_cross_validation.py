import json

import numpy as np
import pytest

from app.errors import NotFoundError, ValidationError
from app.ml import registry
from app.ml.cross_validation import cross_validate, evaluate_algorithms
from app.ml.dataset import FEATURE_NAMES
from app.ml.metrics import rank_models
from app.ml.serialization import dumps, load_model, loads, model_to_dict, save_model
from app.ml.synthetic import disjoint_species_config, generate_labeled_dataset
from app.services.reporting import load_reports, render_reports

FAST_PARAMS = {"random_forest": {"n_trees": 10}}


@pytest.fixture(scope="module")
def separable():
    return generate_labeled_dataset(660, seed=1, species_config=disjoint_species_config())


@pytest.fixture(scope="module")
def small_separable():
    return generate_labeled_dataset(220, seed=2, species_config=disjoint_species_config())


class TestCrossValidation:

    def test_pooled_matrix_covers_every_instance(self, small_separable):
        """Test each instance is tested exactly once"""
        matrix = cross_validate("knn", small_separable, k=10, seed=1)
        assert matrix.total == small_separable.n_instances
        assert matrix.supports().tolist() == small_separable.class_counts().tolist()
        assert matrix.class_names == small_separable.class_names

    def test_deterministic(self, small_separable):
        """Test the same seed gives the same matrix"""
        first = cross_validate("rf", small_separable, k=5, seed=3, n_trees=8)
        second = cross_validate("rf", small_separable, k=5, seed=3, n_trees=8)
        assert np.array_equal(first.counts, second.counts)

    def test_separated_clusters_give_diagonal(self):
        """Test far-apart single-value classes are classified without error"""
        config = {
            name: {feature: (offset, offset) for feature in FEATURE_NAMES}
            for name, offset in (("koi", 1.0), ("rui", 50.0), ("katla", 100.0))
        }
        dataset = generate_labeled_dataset(60, seed=4, species_config=config)
        matrix = cross_validate("j48", dataset, k=5, seed=1)
        assert matrix.correct == matrix.total

    def test_bad_fold_count(self, small_separable):
        """Test fewer than two folds is rejected"""
        with pytest.raises(ValidationError):
            cross_validate("knn", small_separable, k=1)

    def test_accuracy_floor(self, separable):
        """Test all six algorithms reach 95% on disjoint species envelopes"""
        reports = evaluate_algorithms(list(registry.ALGORITHMS), separable, k=10, seed=1)
        assert [r.algorithm for r in reports] == list(registry.ALGORITHMS)
        for report in reports:
            assert report.total == 660
            assert report.accuracy >= 0.95, report.algorithm

    @pytest.mark.slow
    def test_forest_ranks_first_on_noisy_envelopes(self):
        """Test the random forest usually leads J48 and KNN on noisy data"""
        forest_not_worse, forest_first = 0, 0
        for seed in range(1, 11):
            dataset = generate_labeled_dataset(600, seed=seed, noise_fraction=0.25)
            reports = evaluate_algorithms(["rf", "j48", "knn"], dataset, seed=seed)
            accuracy = {r.algorithm: r.accuracy for r in reports}
            forest_not_worse += accuracy["random_forest"] >= accuracy["j48"]
            forest_first += rank_models(reports)[0].algorithm == "random_forest"
        assert forest_not_worse >= 7
        assert forest_first >= 6


class TestRegistry:

    def test_parse_all(self):
        """Test `all` names the six algorithms"""
        assert registry.parse_tags("all") == [
            "knn",
            "j48",
            "random_forest",
            "reptree",
            "decision_table",
            "logitboost",
        ]

    def test_aliases_and_duplicates(self):
        """Test aliases resolve and duplicates collapse in order"""
        assert registry.parse_tags("RF, knn,rf,,lb") == ["random_forest", "knn", "logitboost"]
        assert registry.resolve_tag(" dt ") == "decision_table"

    def test_unknown_tag(self):
        """Test unknown or missing tags are not found"""
        with pytest.raises(NotFoundError):
            registry.parse_tags("knn,svm")
        with pytest.raises(NotFoundError):
            registry.parse_tags(" , ")

    def test_unknown_parameter(self):
        """Test parameters an algorithm does not take are rejected"""
        with pytest.raises(NotFoundError):
            registry.make_classifier("knn", n_trees=3)

    def test_seed_only_reaches_seeded_algorithms(self):
        """Test the seed is passed where the constructor accepts it"""
        assert registry.make_classifier("reptree", seed=9).params()["seed"] == 9
        assert "seed" not in registry.make_classifier("knn", seed=9).params()


class TestSerialization:

    @pytest.mark.parametrize("tag", list(registry.ALGORITHMS))
    def test_reloaded_model_predicts_the_same(self, tag, small_separable, tmp_path):
        """Test a saved and reloaded model gives identical predictions"""
        model = registry.train(tag, small_separable, seed=1, **FAST_PARAMS.get(tag, {}))
        probes = np.random.default_rng(5).uniform(
            small_separable.X.min(axis=0),
            small_separable.X.max(axis=0),
            size=(1000, small_separable.n_features),
        )
        reloaded = load_model(save_model(model, tmp_path / f"{tag}.json"))
        assert reloaded.tag == tag
        assert reloaded.class_names == model.class_names
        assert np.array_equal(reloaded.predict(probes), model.predict(probes))
        assert dumps(loads(dumps(model))) == dumps(model)

    def test_document_header(self, small_separable):
        """Test the model document names its format and algorithm"""
        document = model_to_dict(registry.train("knn", small_separable))
        assert (document["format"], document["version"], document["algorithm"]) == (
            "pondwatch-model",
            1,
            "knn",
        )

    def test_rejects_foreign_documents(self):
        """Test other JSON and broken text are rejected"""
        with pytest.raises(ValidationError):
            loads(json.dumps({"format": "other"}))
        with pytest.raises(ValidationError):
            loads("{not json")


class TestReports:

    @pytest.fixture(scope="class")
    def reports(self):
        dataset = generate_labeled_dataset(220, seed=2, species_config=disjoint_species_config())
        return evaluate_algorithms(["knn", "j48"], dataset, k=5, seed=1)

    def test_json_round_trip(self, reports):
        """Test reports reload from their JSON rendering"""
        reloaded = load_reports(render_reports(reports, "json"))
        assert [r.model_dump() for r in reloaded] == [r.model_dump() for r in reports]
        document = json.loads(render_reports(reports, "json"))
        assert [entry["rank"] for entry in document["ranking"]] == [1, 2]

    def test_text_layout(self, reports):
        """Test the text rendering holds every section and the ranking"""
        text = render_reports(reports, "text")
        assert "=== knn: Stratified cross-validation ===" in text
        assert "=== Confusion Matrix ===" in text
        assert "Kappa statistic" in text
        assert "<-- classified as" in text
        assert "Rank  Algorithm" in text

    def test_csv_ranking(self, reports):
        """Test the CSV rendering lists one ranked row per algorithm"""
        lines = render_reports(reports, "csv").splitlines()
        assert lines[0] == "rank,algorithm,accuracy_pct,kappa_pct,avg_tp_rate_pct"
        assert len(lines) == 3
        assert lines[1].startswith("1,")

    def test_bad_inputs(self, reports):
        """Test unknown formats and foreign files are rejected"""
        with pytest.raises(ValidationError):
            render_reports(reports, "yaml")
        with pytest.raises(ValidationError):
            load_reports(json.dumps({"schema_version": 99, "reports": []}))
        with pytest.raises(ValidationError):
            load_reports("[]")
