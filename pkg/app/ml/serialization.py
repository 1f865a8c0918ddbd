import json
from pathlib import Path
from typing import Any, Dict, Union

from app.errors import ValidationError
from app.ml import registry
from app.ml.base import Classifier

MODEL_FORMAT = "pondwatch-model"
MODEL_FORMAT_VERSION = 1


def model_to_dict(model: Classifier) -> Dict[str, Any]:
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_FORMAT_VERSION,
        "algorithm": model.tag,
        "params": model.params(),
        "class_names": list(model.class_names),
        "feature_names": list(model.feature_names),
        "state": model.state_dict(),
    }


def model_from_dict(document: Dict[str, Any]) -> Classifier:
    if document.get("format") != MODEL_FORMAT:
        raise ValidationError("not a pondwatch model file")
    if document.get("version") != MODEL_FORMAT_VERSION:
        raise ValidationError(f"unsupported model format version {document.get('version')}")
    model = registry.make_classifier(document["algorithm"], **document["params"])
    model.class_names = tuple(document["class_names"])
    model.feature_names = tuple(document["feature_names"])
    model.load_state(document["state"])
    return model


def dumps(model: Classifier) -> str:
    return json.dumps(model_to_dict(model), sort_keys=True)


def loads(text: Union[str, bytes]) -> Classifier:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"model file is not valid JSON: {exc}") from exc
    return model_from_dict(document)


def save_model(model: Classifier, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(dumps(model) + "\n", encoding="utf-8")
    return path


def load_model(path: Union[str, Path]) -> Classifier:
    return loads(Path(path).read_text(encoding="utf-8"))
