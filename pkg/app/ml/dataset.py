import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from app.errors import ValidationError
from app.schemas import Species

logger = logging.getLogger(__name__)

FEATURE_NAMES: Tuple[str, ...] = ("ph", "temperature", "turbidity", "conductivity", "depth")
LABEL_COLUMN = "species"
SPECIES_NAMES: Tuple[str, ...] = tuple(sorted(species.value for species in Species))


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Numeric feature matrix plus integer labels.

    `y` indexes into `class_names`, which are kept in sorted order so that
    "lowest class index" and "first class name" are the same tie rule.
    """

    X: np.ndarray
    y: np.ndarray
    feature_names: Tuple[str, ...] = FEATURE_NAMES
    class_names: Tuple[str, ...] = field(default=SPECIES_NAMES)

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=int)
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
            raise ValidationError(f"feature matrix {X.shape} does not match labels {y.shape}")
        if X.shape[1] != len(self.feature_names):
            raise ValidationError(
                f"{X.shape[1]} feature columns but {len(self.feature_names)} feature names"
            )
        if not np.isfinite(X).all():
            raise ValidationError("features must be finite")
        if list(self.class_names) != sorted(set(self.class_names)):
            raise ValidationError("class names must be unique and sorted")
        if y.size and (y.min() < 0 or y.max() >= len(self.class_names)):
            raise ValidationError("label index outside the declared class set")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @classmethod
    def from_labels(
        cls,
        X,
        labels: Iterable[str],
        feature_names: Sequence[str] = FEATURE_NAMES,
        class_names: Optional[Sequence[str]] = None,
    ) -> "Dataset":
        labels = [str(label) for label in labels]
        names = tuple(sorted(set(class_names if class_names is not None else labels)))
        index = {name: i for i, name in enumerate(names)}
        unknown = sorted(set(labels) - index.keys())
        if unknown:
            raise ValidationError(f"labels outside the class set: {', '.join(unknown)}")
        return cls(
            X=np.asarray(X, dtype=float),
            y=np.array([index[label] for label in labels], dtype=int),
            feature_names=tuple(feature_names),
            class_names=names,
        )

    @property
    def n_instances(self) -> int:
        return int(self.y.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.X.shape[1])

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    @property
    def labels(self):
        return [self.class_names[i] for i in self.y]

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.y, minlength=self.n_classes)

    def subset(self, indices) -> "Dataset":
        indices = np.asarray(indices, dtype=int)
        return Dataset(self.X[indices], self.y[indices], self.feature_names, self.class_names)

    def require_instances(self) -> None:
        if self.n_instances == 0:
            raise ValidationError("cannot train on an empty dataset")


@dataclass(frozen=True, eq=False)
class FoldPlan:
    k: int
    assignment: np.ndarray

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment != fold)

    def fold_sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.k)


def stratified_assignment(y: np.ndarray, k: int, seed: int) -> np.ndarray:
    """Seeded shuffle, stable sort by class, then deal positions round-robin."""
    y = np.asarray(y, dtype=int)
    rng = np.random.default_rng(seed)
    shuffled = rng.permutation(y.size)
    order = shuffled[np.argsort(y[shuffled], kind="stable")]
    assignment = np.empty(y.size, dtype=int)
    assignment[order] = np.arange(y.size) % k
    return assignment


def stratified_folds(dataset: Dataset, k: int = 10, seed: int = 0) -> FoldPlan:
    if k < 2:
        raise ValidationError(f"need at least 2 folds, got {k}")
    if k > dataset.n_instances:
        raise ValidationError(f"{k} folds requested for {dataset.n_instances} instances")
    return FoldPlan(k=k, assignment=stratified_assignment(dataset.y, k, seed))


def load_dataset_csv(source: Union[str, Path, io.IOBase]) -> Dataset:
    """Read `ph,temperature,turbidity,conductivity,depth,species` rows."""
    try:
        frame = pd.read_csv(source)
    except pd.errors.EmptyDataError as exc:
        raise ValidationError("dataset file is empty") from exc
    expected = list(FEATURE_NAMES) + [LABEL_COLUMN]
    if list(frame.columns) != expected:
        raise ValidationError(
            f"dataset header must be {','.join(expected)}, got {','.join(map(str, frame.columns))}"
        )
    if frame.empty:
        raise ValidationError("dataset file has no rows")
    labels = frame[LABEL_COLUMN].astype(str).str.strip().str.lower()
    unknown = sorted(set(labels) - set(SPECIES_NAMES))
    if unknown:
        raise ValidationError(f"unknown species: {', '.join(unknown)}")
    try:
        X = frame[list(FEATURE_NAMES)].to_numpy(dtype=float)
    except ValueError as exc:
        raise ValidationError(f"non-numeric feature value: {exc}") from exc
    dataset = Dataset.from_labels(X, labels)
    logger.info(
        "loaded %d instances of %d species", dataset.n_instances, dataset.n_classes
    )
    return dataset


def write_dataset_csv(dataset: Dataset, target: Union[str, Path, io.IOBase]) -> None:
    frame = pd.DataFrame(dataset.X, columns=list(dataset.feature_names))
    frame[LABEL_COLUMN] = dataset.labels
    frame.to_csv(target, index=False, lineterminator="\n")
