"""pondwatch: pond water-quality telemetry, suitability verdicts and species classifiers."""

__version__ = "1.0.0"
