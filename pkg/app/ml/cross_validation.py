import logging
import time
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np

from app.ml import registry
from app.ml.dataset import Dataset, stratified_folds
from app.ml.metrics import ConfusionMatrix, Report, build_report

logger = logging.getLogger(__name__)


def cross_validate(
    tag: str,
    dataset: Dataset,
    k: int = 10,
    seed: int = 1,
    **params: Any,
) -> ConfusionMatrix:
    """
    Stratified k-fold cross-validation pooled into one confusion matrix.

    The fold plan and every seeded trainer use `seed`.
    """
    tag = registry.resolve_tag(tag)
    plan = stratified_folds(dataset, k, seed)
    counts = np.zeros((dataset.n_classes, dataset.n_classes), dtype=np.int64)
    started = time.perf_counter()
    for fold in range(k):
        train_idx, test_idx = plan.train_indices(fold), plan.test_indices(fold)
        model = registry.train(tag, dataset.subset(train_idx), seed=seed, **params)
        predicted = model.predict(dataset.X[test_idx])
        np.add.at(counts, (dataset.y[test_idx], predicted), 1)
        logger.debug(
            "%s fold %d/%d: %d correct of %d",
            tag,
            fold + 1,
            k,
            int(np.count_nonzero(predicted == dataset.y[test_idx])),
            test_idx.size,
        )
    matrix = ConfusionMatrix(dataset.class_names, counts)
    logger.info(
        "%s: %d-fold CV accuracy %.4f in %.2fs",
        tag,
        k,
        matrix.correct / matrix.total,
        time.perf_counter() - started,
    )
    return matrix


def evaluate_algorithms(
    tags: Sequence[str],
    dataset: Dataset,
    k: int = 10,
    seed: int = 1,
    params: Optional[Mapping[str, Dict[str, Any]]] = None,
) -> List[Report]:
    params = params or {}
    reports = []
    for tag in tags:
        tag = registry.resolve_tag(tag)
        matrix = cross_validate(tag, dataset, k, seed, **params.get(tag, {}))
        reports.append(build_report(tag, matrix))
    return reports
