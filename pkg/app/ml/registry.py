import inspect
from typing import Any, Dict, List, Optional, Type

from app.errors import NotFoundError
from app.ml.base import Classifier
from app.ml.dataset import Dataset
from app.ml.decision_table import DecisionTableClassifier
from app.ml.forest import RandomForestClassifier
from app.ml.knn import KNNClassifier
from app.ml.logitboost import LogitBoostClassifier
from app.ml.reptree import REPTreeClassifier
from app.ml.trees import J48Classifier

ALGORITHMS: Dict[str, Type[Classifier]] = {
    cls.tag: cls
    for cls in (
        KNNClassifier,
        J48Classifier,
        RandomForestClassifier,
        REPTreeClassifier,
        DecisionTableClassifier,
        LogitBoostClassifier,
    )
}

ALIASES = {"rf": "random_forest", "dt": "decision_table", "lb": "logitboost"}


def valid_tags() -> List[str]:
    return sorted(ALGORITHMS) + sorted(ALIASES)


def resolve_tag(tag: str) -> str:
    tag = tag.strip().lower()
    tag = ALIASES.get(tag, tag)
    if tag not in ALGORITHMS:
        raise NotFoundError(
            f"unknown algorithm {tag!r}; valid tags: {', '.join(valid_tags())}"
        )
    return tag


def parse_tags(text: str) -> List[str]:
    """`all` or a comma-separated list; duplicates collapse, order is kept."""
    if text.strip().lower() == "all":
        return list(ALGORITHMS)
    tags: List[str] = []
    for part in text.split(","):
        if part.strip():
            tag = resolve_tag(part)
            if tag not in tags:
                tags.append(tag)
    if not tags:
        raise NotFoundError(f"no algorithm named; valid tags: {', '.join(valid_tags())}")
    return tags


def make_classifier(tag: str, seed: Optional[int] = None, **params: Any) -> Classifier:
    """
    Build an unfitted classifier. `seed` is only passed to algorithms that
    take one; unknown parameters are an error.
    """
    cls = ALGORITHMS[resolve_tag(tag)]
    accepted = inspect.signature(cls.__init__).parameters
    if seed is not None and "seed" in accepted:
        params.setdefault("seed", seed)
    unknown = sorted(set(params) - set(accepted))
    if unknown:
        raise NotFoundError(f"{cls.tag} takes no parameter {', '.join(unknown)}")
    return cls(**params)


def train(tag: str, dataset: Dataset, seed: Optional[int] = None, **params: Any) -> Classifier:
    return make_classifier(tag, seed=seed, **params).fit(dataset)
