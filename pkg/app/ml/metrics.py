"""Confusion-matrix metrics, evaluation reports and model ranking."""

from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field

from app.errors import DomainError

REPORT_SCHEMA_VERSION = 1

ClassRef = Union[int, str]


class MetricValue(float):
    """A float that remembers whether its denominator was zero."""

    undefined: bool

    def __new__(cls, value: float, undefined: bool = False):
        obj = super().__new__(cls, value)
        obj.undefined = undefined
        return obj

    def __repr__(self) -> str:
        return f"MetricValue({float(self)!r}, undefined={self.undefined})"


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Rows are actual classes, columns predicted."""

    class_names: Tuple[str, ...]
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise DomainError(f"confusion matrix must be square, got shape {counts.shape}")
        if counts.shape[0] != len(self.class_names):
            raise DomainError("one class name per matrix row is required")
        if (counts < 0).any() or not np.array_equal(counts, np.round(counts)):
            raise DomainError("confusion matrix counts must be non-negative integers")
        object.__setattr__(self, "counts", counts.astype(np.int64))
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @classmethod
    def from_predictions(
        cls, class_names: Sequence[str], actual: Sequence[int], predicted: Sequence[int]
    ) -> "ConfusionMatrix":
        counts = np.zeros((len(class_names), len(class_names)), dtype=np.int64)
        np.add.at(counts, (np.asarray(actual, dtype=int), np.asarray(predicted, dtype=int)), 1)
        return cls(tuple(class_names), counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def correct(self) -> int:
        return int(np.trace(self.counts))

    def supports(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def class_index(self, cls: ClassRef) -> int:
        if isinstance(cls, (int, np.integer)) and not isinstance(cls, bool):
            if 0 <= cls < len(self.class_names):
                return int(cls)
        elif cls in self.class_names:
            return self.class_names.index(cls)
        raise DomainError(f"unknown class {cls!r}")

    def cells(self, cls: ClassRef) -> Tuple[int, int, int, int]:
        """TP, FP, FN, TN of one class against the rest."""
        i = self.class_index(cls)
        tp = int(self.counts[i, i])
        fp = int(self.counts[:, i].sum()) - tp
        fn = int(self.counts[i, :].sum()) - tp
        return tp, fp, fn, self.total - tp - fp - fn


def _ratio(numerator: int, denominator: int) -> MetricValue:
    if denominator == 0:
        return MetricValue(0.0, undefined=True)
    return MetricValue(numerator / denominator)


def _require_counts(cm: ConfusionMatrix) -> None:
    if cm.total <= 0:
        raise DomainError("metrics need a confusion matrix with at least one count")


def accuracy(cm: ConfusionMatrix) -> float:
    _require_counts(cm)
    return cm.correct / cm.total


def precision(cm: ConfusionMatrix, cls: ClassRef) -> MetricValue:
    _require_counts(cm)
    tp, fp, _, _ = cm.cells(cls)
    return _ratio(tp, tp + fp)


def recall(cm: ConfusionMatrix, cls: ClassRef) -> MetricValue:
    _require_counts(cm)
    tp, _, fn, _ = cm.cells(cls)
    return _ratio(tp, tp + fn)


def f1_from(p: float, r: float) -> MetricValue:
    undefined = getattr(p, "undefined", False) or getattr(r, "undefined", False)
    if p + r == 0:
        return MetricValue(0.0, undefined=undefined)
    return MetricValue(2 * p * r / (p + r), undefined=undefined)


def f1(cm: ConfusionMatrix, cls: ClassRef) -> MetricValue:
    return f1_from(precision(cm, cls), recall(cm, cls))


class Rates(NamedTuple):
    tp_rate: MetricValue
    fp_rate: MetricValue


def tp_fp_rates(cm: ConfusionMatrix, cls: ClassRef) -> Rates:
    _require_counts(cm)
    tp, fp, fn, tn = cm.cells(cls)
    return Rates(_ratio(tp, tp + fn), _ratio(fp, fp + tn))


def weighted_average(values: Sequence[float], supports: Sequence[float]) -> float:
    if len(values) != len(supports):
        raise DomainError(f"{len(values)} values but {len(supports)} supports")
    total = float(sum(supports))
    if total <= 0:
        raise DomainError("supports must sum to a positive total")
    return float(sum(float(v) * float(s) for v, s in zip(values, supports)) / total)


def macro_average(values: Sequence[float]) -> float:
    if len(values) == 0:
        raise DomainError("macro average of no values")
    return float(sum(float(v) for v in values) / len(values))


def kappa(cm: ConfusionMatrix) -> float:
    """Cohen's kappa; 0 when chance agreement is already perfect."""
    _require_counts(cm)
    total = cm.total
    chance = int(np.dot(cm.counts.sum(axis=1), cm.counts.sum(axis=0)))
    denominator = total * total - chance
    if denominator == 0:
        return 0.0
    return (total * cm.correct - chance) / denominator


# Reports


class ClassMetrics(BaseModel):
    class_name: str
    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    f1: float
    tp_rate: float
    fp_rate: float
    # names of the metrics above whose denominator was zero
    undefined: List[str] = []


class Report(BaseModel):
    schema_version: int = REPORT_SCHEMA_VERSION
    algorithm: str
    class_names: List[str]
    confusion_matrix: List[List[int]]
    total: int
    correct: int
    incorrect: int
    accuracy: float = Field(..., ge=0, le=1)
    kappa: float = Field(..., ge=-1, le=1)
    per_class: List[ClassMetrics]
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    weighted_tp_rate: float
    weighted_fp_rate: float
    macro_precision: float
    macro_recall: float
    macro_f1: float

    def confusion(self) -> ConfusionMatrix:
        return ConfusionMatrix(tuple(self.class_names), np.array(self.confusion_matrix))


class RankedModel(BaseModel):
    rank: int
    algorithm: str
    accuracy: float
    kappa: float
    avg_tp_rate: float


def class_metrics(cm: ConfusionMatrix, cls: ClassRef) -> ClassMetrics:
    tp, fp, fn, tn = cm.cells(cls)
    values: Dict[str, MetricValue] = {
        "precision": precision(cm, cls),
        "recall": recall(cm, cls),
    }
    values["f1"] = f1_from(values["precision"], values["recall"])
    values["tp_rate"], values["fp_rate"] = tp_fp_rates(cm, cls)
    return ClassMetrics(
        class_name=cm.class_names[cm.class_index(cls)],
        tp=tp,
        fp=fp,
        fn=fn,
        tn=tn,
        undefined=[name for name, value in values.items() if value.undefined],
        **{name: float(value) for name, value in values.items()},
    )


def build_report(algorithm: str, cm: ConfusionMatrix) -> Report:
    _require_counts(cm)
    per_class = [class_metrics(cm, i) for i in range(len(cm.class_names))]
    supports = cm.supports().tolist()

    def weighted(name: str) -> float:
        return weighted_average([getattr(m, name) for m in per_class], supports)

    def macro(name: str) -> float:
        return macro_average([getattr(m, name) for m in per_class])

    return Report(
        algorithm=algorithm,
        class_names=list(cm.class_names),
        confusion_matrix=cm.counts.tolist(),
        total=cm.total,
        correct=cm.correct,
        incorrect=cm.total - cm.correct,
        accuracy=accuracy(cm),
        kappa=kappa(cm),
        per_class=per_class,
        weighted_precision=weighted("precision"),
        weighted_recall=weighted("recall"),
        weighted_f1=weighted("f1"),
        weighted_tp_rate=weighted("tp_rate"),
        weighted_fp_rate=weighted("fp_rate"),
        macro_precision=macro("precision"),
        macro_recall=macro("recall"),
        macro_f1=macro("f1"),
    )


def rank_models(reports: Sequence[Report]) -> List[RankedModel]:
    """Best first: accuracy, then kappa, then weighted TP rate, then tag."""
    ordered = sorted(
        reports,
        key=lambda r: (-r.accuracy, -r.kappa, -r.weighted_tp_rate, r.algorithm),
    )
    return [
        RankedModel(
            rank=position,
            algorithm=report.algorithm,
            accuracy=report.accuracy,
            kappa=report.kappa,
            avg_tp_rate=report.weighted_tp_rate,
        )
        for position, report in enumerate(ordered, start=1)
    ]
