import logging
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from app.errors import DomainError, NotFoundError, ValidationError
from app.schemas import (
    Observation,
    OxygenStatus,
    Parameter,
    ParameterStatus,
    PhZone,
    PondVerdict,
    ReadingSummary,
    SuitabilityConfig,
)
from app.services import fixtures

logger = logging.getLogger(__name__)

# verdict columns, in report order
VERDICT_PARAMETERS = (
    Parameter.PH,
    Parameter.TEMPERATURE,
    Parameter.TURBIDITY,
    Parameter.DEPTH,
    Parameter.CONDUCTIVITY,
)
RECORDED_ONLY = (Parameter.DO, Parameter.BOD, Parameter.COD)

_FRACTION_EPS = 1e-12


class SuitabilityEvaluator:
    @staticmethod
    def classify_ph(ph: float) -> PhZone:
        """Map a pH reading to its fish survival zone."""
        if not 0.0 <= ph <= 14.0:
            raise DomainError(f"pH {ph} outside 0..14")
        if ph < 4.0 or ph > 11.0:
            return PhZone.DEATH
        if 6.5 <= ph <= 8.5:
            return PhZone.IDEAL
        if ph <= 5.0:
            return PhZone.NO_REPRODUCTION
        if ph <= 10.0:
            return PhZone.SLOW_GROWTH
        return PhZone.CRITICAL

    @staticmethod
    def classify_do(do_mg_l: float) -> OxygenStatus:
        if do_mg_l < 0:
            raise DomainError(f"dissolved oxygen cannot be negative: {do_mg_l}")
        if do_mg_l >= 5.0:
            return OxygenStatus.HEALTHY
        if do_mg_l >= 4.0:
            return OxygenStatus.HAZARDOUS
        if do_mg_l >= 2.0:
            return OxygenStatus.EMERGENCY_AERATION
        return OxygenStatus.CRITICAL

    @staticmethod
    def summarize_readings(samples: Sequence[float]) -> ReadingSummary:
        if len(samples) == 0:
            raise ValidationError("cannot summarize an empty sample list")
        values = np.asarray(samples, dtype=float)
        return ReadingSummary(
            count=int(values.size),
            min=float(values.min()),
            max=float(values.max()),
            median=float(np.median(values)),
            mean=float(values.mean()),
        )

    @staticmethod
    def check_parameter(
        parameter: Parameter,
        samples: Sequence[float],
        threshold: float = 0.70,
        config: Optional[SuitabilityConfig] = None,
    ) -> ParameterStatus:
        """
        Judge one parameter's samples against its ideal range.

        Passes when at least `threshold` of the samples lie inside the range
        (inclusive) and the median does too.
        """
        if len(samples) == 0:
            raise ValidationError(f"no samples for {Parameter(parameter).value}")
        if not 0 < threshold <= 1:
            raise ValidationError(f"threshold {threshold} outside (0, 1]")
        config = config or SuitabilityConfig()
        ideal = config.range_for(Parameter(parameter))
        if ideal is None:
            raise NotFoundError(f"no ideal range for {Parameter(parameter).value}")

        values = np.asarray(samples, dtype=float)
        inside = (values >= ideal.lo) & (values <= ideal.hi)
        fraction = float(inside.sum()) / values.size
        median = float(np.median(values))
        passed = fraction >= threshold - _FRACTION_EPS and ideal.contains(median)
        return ParameterStatus(
            parameter=parameter,
            sample_count=int(values.size),
            in_range_fraction=fraction,
            median=median,
            observed_range=(float(values.min()), float(values.max())),
            passed=passed,
        )

    @staticmethod
    def check_depth(
        depth_range_m: Tuple[float, float], config: Optional[SuitabilityConfig] = None
    ) -> ParameterStatus:
        """Static depth passes only when the whole range sits inside the ideal band."""
        config = config or SuitabilityConfig()
        ideal = config.range_for(Parameter.DEPTH)
        lo, hi = depth_range_m
        if lo > hi:
            raise ValidationError(f"depth range {lo}-{hi} is reversed")
        inside = ideal.contains(lo) and ideal.contains(hi)
        return ParameterStatus(
            parameter=Parameter.DEPTH,
            sample_count=2,
            in_range_fraction=1.0 if inside else 0.0,
            median=(lo + hi) / 2,
            observed_range=(lo, hi),
            passed=inside,
        )

    @staticmethod
    def evaluate_pond(
        pond_id: int,
        samples: Mapping[Parameter, Sequence[float]],
        depth_range_m: Optional[Tuple[float, float]] = None,
        config: Optional[SuitabilityConfig] = None,
    ) -> PondVerdict:
        config = config or SuitabilityConfig()
        samples = {Parameter(k): list(v) for k, v in samples.items() if len(v) > 0}
        if depth_range_m is None and Parameter.DEPTH in samples:
            depths = samples[Parameter.DEPTH]
            depth_range_m = (min(depths), max(depths))
        if not samples and depth_range_m is None:
            raise ValidationError(f"no readings for pond {pond_id}")

        statuses: List[ParameterStatus] = []
        for parameter in VERDICT_PARAMETERS:
            if parameter == Parameter.DEPTH:
                if depth_range_m is not None and config.range_for(parameter) is not None:
                    statuses.append(SuitabilityEvaluator.check_depth(depth_range_m, config))
            elif parameter in samples and config.range_for(parameter) is not None:
                statuses.append(
                    SuitabilityEvaluator.check_parameter(
                        parameter, samples[parameter], config.threshold, config
                    )
                )
        if not statuses:
            raise ValidationError(f"no verdict parameters for pond {pond_id}")

        observations = [
            Observation(
                parameter=parameter,
                summary=SuitabilityEvaluator.summarize_readings(samples[parameter]),
                oxygen_status=SuitabilityEvaluator.classify_do(
                    float(np.median(samples[parameter]))
                )
                if parameter == Parameter.DO
                else None,
            )
            for parameter in RECORDED_ONLY
            if parameter in samples
        ]

        failing = [status for status in statuses if not status.passed]
        recommended = not failing
        remarks = (
            "Recommended"
            if recommended
            else "Not Recommended: "
            + "; ".join(SuitabilityEvaluator._remark(s, config) for s in failing)
        )
        logger.info("pond %s verdict: %s", pond_id, remarks)
        return PondVerdict(
            pond_id=pond_id,
            statuses=statuses,
            observations=observations,
            recommended=recommended,
            remarks=remarks,
        )

    @staticmethod
    def _remark(status: ParameterStatus, config: SuitabilityConfig) -> str:
        ideal = config.range_for(status.parameter)
        lo, hi = status.observed_range
        if status.median > ideal.hi:
            direction = "above"
        elif status.median < ideal.lo:
            direction = "below"
        else:
            direction = "outside"
        return (
            f"{status.parameter.value} {lo:g}-{hi:g} {direction} "
            f"ideal range {ideal.lo:g}-{ideal.hi:g}"
        )


def evaluate_fixture_ponds(
    config: Optional[SuitabilityConfig] = None,
) -> Dict[int, PondVerdict]:
    """Verdicts for the five surveyed ponds from the embedded measurements."""
    return {
        pond_id: SuitabilityEvaluator.evaluate_pond(
            pond_id,
            fixtures.fixture_samples(pond_id),
            fixtures.depth_range(pond_id),
            config,
        )
        for pond_id in fixtures.POND_IDS
    }
