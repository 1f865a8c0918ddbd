"""
Labelled training data drawn from per-species water-parameter envelopes.

Only the temperature envelopes of rui, koi, silvercarp and karpio are field
guidance; every other envelope is a synthetic default and is listed in
SYNTHETIC_ENVELOPES.
"""

import logging
from typing import Dict, FrozenSet, Mapping, Optional, Tuple

import numpy as np

from app.errors import ValidationError
from app.ml.dataset import FEATURE_NAMES, SPECIES_NAMES, Dataset

logger = logging.getLogger(__name__)

Envelope = Tuple[float, float]
SpeciesConfig = Mapping[str, Mapping[str, Envelope]]

PUBLISHED_TEMPERATURES: Dict[str, Envelope] = {
    "rui": (20.0, 26.0),
    "koi": (15.0, 25.0),
    "silvercarp": (18.0, 30.0),
    "karpio": (20.0, 25.0),
}

# ph, turbidity, conductivity, depth for every species; temperature for the rest
_DEFAULT_OTHER: Dict[str, Dict[str, Envelope]] = {
    "karpio": {
        "ph": (6.5, 8.0),
        "turbidity": (2.0, 6.0),
        "conductivity": (950.0, 1300.0),
        "depth": (1.0, 2.5),
    },
    "katla": {
        "ph": (7.0, 8.5),
        "temperature": (25.0, 32.0),
        "turbidity": (3.0, 8.0),
        "conductivity": (1000.0, 1500.0),
        "depth": (1.5, 3.0),
    },
    "koi": {
        "ph": (6.8, 8.2),
        "turbidity": (1.0, 4.0),
        "conductivity": (900.0, 1200.0),
        "depth": (1.0, 2.0),
    },
    "magur": {
        "ph": (6.0, 7.5),
        "temperature": (24.0, 30.0),
        "turbidity": (5.0, 10.0),
        "conductivity": (1200.0, 1800.0),
        "depth": (0.8, 1.8),
    },
    "pangas": {
        "ph": (6.5, 7.8),
        "temperature": (26.0, 32.0),
        "turbidity": (4.0, 9.0),
        "conductivity": (1300.0, 1800.0),
        "depth": (1.5, 3.5),
    },
    "prawn": {
        "ph": (7.0, 8.5),
        "temperature": (26.0, 31.0),
        "turbidity": (2.0, 5.0),
        "conductivity": (1400.0, 1825.0),
        "depth": (0.8, 1.5),
    },
    "rui": {
        "ph": (6.7, 8.3),
        "turbidity": (3.0, 7.0),
        "conductivity": (1000.0, 1400.0),
        "depth": (2.0, 4.0),
    },
    "shrimp": {
        "ph": (7.5, 8.5),
        "temperature": (27.0, 32.0),
        "turbidity": (1.0, 4.0),
        "conductivity": (1500.0, 1825.0),
        "depth": (1.0, 2.0),
    },
    "silvercarp": {
        "ph": (6.5, 8.5),
        "turbidity": (4.0, 10.0),
        "conductivity": (1100.0, 1600.0),
        "depth": (2.5, 5.0),
    },
    "sing": {
        "ph": (6.0, 7.2),
        "temperature": (24.0, 30.0),
        "turbidity": (6.0, 10.0),
        "conductivity": (900.0, 1300.0),
        "depth": (0.6, 1.5),
    },
    "tilapia": {
        "ph": (6.0, 9.0),
        "temperature": (22.0, 30.0),
        "turbidity": (2.0, 8.0),
        "conductivity": (970.0, 1700.0),
        "depth": (1.0, 3.0),
    },
}

SYNTHETIC_ENVELOPES: FrozenSet[Tuple[str, str]] = frozenset(
    (species, feature)
    for species in SPECIES_NAMES
    for feature in FEATURE_NAMES
    if not (feature == "temperature" and species in PUBLISHED_TEMPERATURES)
)

# per feature: slot multiplier, slot offset, base, envelope width, slot step
_DISJOINT_LAYOUT: Dict[str, Tuple[int, int, float, float, float]] = {
    "ph": (1, 0, 4.0, 0.4, 0.6),
    "temperature": (3, 5, 10.0, 1.2, 1.8),
    "turbidity": (4, 3, 1.0, 0.5, 0.75),
    "conductivity": (5, 7, 900.0, 60.0, 90.0),
    "depth": (9, 9, 0.5, 0.3, 0.45),
}


def default_species_config() -> Dict[str, Dict[str, Envelope]]:
    config = {species: dict(envelopes) for species, envelopes in _DEFAULT_OTHER.items()}
    for species, envelope in PUBLISHED_TEMPERATURES.items():
        config[species]["temperature"] = envelope
    return {species: {f: config[species][f] for f in FEATURE_NAMES} for species in sorted(config)}


def disjoint_species_config() -> Dict[str, Dict[str, Envelope]]:
    """
    Envelopes that never overlap between species on any single feature.

    Species i takes slot (a * i + b) mod 11 on each feature; a differs per
    feature so neighbours on one axis are far apart on the others.
    """
    n = len(SPECIES_NAMES)
    config: Dict[str, Dict[str, Envelope]] = {}
    for i, species in enumerate(SPECIES_NAMES):
        config[species] = {}
        for feature in FEATURE_NAMES:
            a, b, base, width, step = _DISJOINT_LAYOUT[feature]
            lo = base + ((a * i + b) % n) * step
            config[species][feature] = (round(lo, 10), round(lo + width, 10))
    return config


def generate_labeled_dataset(
    n: int,
    seed: int,
    species_config: Optional[SpeciesConfig] = None,
    noise_fraction: float = 0.0,
) -> Dataset:
    """
    Draw species uniformly, then each feature uniformly within the species'
    envelope, plus Gaussian noise with sigma = noise_fraction * envelope width.
    """
    if n < 1:
        raise ValidationError(f"need at least one instance, got {n}")
    if noise_fraction < 0:
        raise ValidationError(f"noise fraction must be non-negative, got {noise_fraction}")
    config = default_species_config() if species_config is None else species_config
    if not config:
        raise ValidationError("species config is empty")
    class_names = tuple(sorted(config))
    for species in class_names:
        missing = [f for f in FEATURE_NAMES if f not in config[species]]
        if missing:
            raise ValidationError(f"{species} lacks envelopes for {', '.join(missing)}")

    rng = np.random.default_rng(seed)
    y = rng.integers(0, len(class_names), size=n)
    X = np.empty((n, len(FEATURE_NAMES)))
    for column, feature in enumerate(FEATURE_NAMES):
        lo = np.array([config[s][feature][0] for s in class_names])[y]
        hi = np.array([config[s][feature][1] for s in class_names])[y]
        if (lo > hi).any():
            raise ValidationError(f"an envelope for {feature} has lo > hi")
        X[:, column] = lo + (hi - lo) * rng.random(n)
        if noise_fraction > 0:
            X[:, column] += rng.normal(0.0, 1.0, size=n) * noise_fraction * (hi - lo)

    logger.debug("generated %d instances over %d species (seed %d)", n, len(class_names), seed)
    return Dataset(X=X, y=y, feature_names=FEATURE_NAMES, class_names=class_names)
