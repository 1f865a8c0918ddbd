"""Deterministic models of the pond sensors and a seeded pond-stream generator."""

import logging
import math
from typing import Dict, Iterator, List, Mapping, Optional

import numpy as np

from app.errors import DomainError
from app.schemas import (
    Parameter,
    PondProfile,
    ReadingSample,
    SensorSpec,
    TurbidityCalibration,
    UltrasonicModel,
)

logger = logging.getLogger(__name__)

TURBIDITY_MAX_VOLTS = 4.5
DEFAULT_CONDUCTIVITY_COEFF = 0.02
DEFAULT_TEMPERATURE_BITS = 12
DEPTH_SENSOR_CLEARANCE_M = 0.5

DEFAULT_SENSOR_SPECS: Dict[Parameter, SensorSpec] = {
    Parameter.PH: SensorSpec(
        parameter=Parameter.PH, min=0.0, max=14.0, resolution=0.01, noise_sigma=0.05
    ),
    Parameter.TEMPERATURE: SensorSpec(
        parameter=Parameter.TEMPERATURE,
        min=-55.0,
        max=125.0,
        resolution=0.0625,
        noise_sigma=0.1,
    ),
    Parameter.TURBIDITY: SensorSpec(
        parameter=Parameter.TURBIDITY,
        min=0.0,
        max=3000.0,
        resolution=0.01,
        noise_sigma=0.01,
    ),
    Parameter.CONDUCTIVITY: SensorSpec(
        parameter=Parameter.CONDUCTIVITY,
        min=0.0,
        max=10000.0,
        resolution=0.01,
        noise_sigma=5.0,
    ),
    Parameter.DEPTH: SensorSpec(
        parameter=Parameter.DEPTH, min=0.0, max=10.0, resolution=0.01, noise_sigma=0.01
    ),
}

STREAM_ORDER = (
    Parameter.PH,
    Parameter.TEMPERATURE,
    Parameter.TURBIDITY,
    Parameter.CONDUCTIVITY,
    Parameter.DEPTH,
)


def snap(value: float, step: float) -> float:
    """Round to the nearest multiple of step, halves away from zero."""
    steps = math.floor(abs(value) / step + 0.5)
    return round(math.copysign(steps * step, value), 10) + 0.0


def ultrasonic_distance(travel_time_s: float, model: UltrasonicModel) -> float:
    """Distance to the echoing surface: half the round trip times the speed of sound."""
    if travel_time_s < 0:
        raise DomainError(f"travel time must be non-negative, got {travel_time_s}")
    return travel_time_s / 2 * model.speed_of_sound_m_s


def depth_from_echo(travel_time_s: float, model: UltrasonicModel) -> float:
    distance = ultrasonic_distance(travel_time_s, model)
    if distance > model.sensor_height_m:
        raise DomainError(
            f"echo distance {distance:.3f} m exceeds mount height "
            f"{model.sensor_height_m} m"
        )
    return model.sensor_height_m - distance


def echo_time_for_depth(depth_m: float, model: UltrasonicModel) -> float:
    return 2 * (model.sensor_height_m - depth_m) / model.speed_of_sound_m_s


def conductivity_from_temperature(
    base_cond_25C_uS_cm: float,
    temp_C: float,
    coeff_per_C: float = DEFAULT_CONDUCTIVITY_COEFF,
) -> float:
    """Linear temperature compensation of conductivity about 25 °C."""
    if base_cond_25C_uS_cm <= 0:
        raise DomainError("reference conductivity must be positive")
    if not 0 < coeff_per_C <= 0.04:
        raise DomainError(f"coefficient {coeff_per_C} outside (0, 0.04]")
    return base_cond_25C_uS_cm * (1 + coeff_per_C * (temp_C - 25.0))


def quantize_temperature(temp_C: float, resolution_bits: int = DEFAULT_TEMPERATURE_BITS) -> float:
    """Snap a temperature to the DS18B20 grid: 0.5 °C at 9 bits down to 0.0625 °C at 12."""
    if not 9 <= resolution_bits <= 12:
        raise DomainError(f"resolution must be 9..12 bits, got {resolution_bits}")
    if not -55.0 <= temp_C <= 125.0:
        raise DomainError(f"temperature {temp_C} outside -55..125 °C")
    return snap(temp_C, 2.0 ** -(resolution_bits - 8))


def turbidity_from_voltage(
    volts: float, calibration: Optional[TurbidityCalibration] = None
) -> float:
    calibration = calibration or TurbidityCalibration()
    if not 0.0 <= volts <= TURBIDITY_MAX_VOLTS:
        raise DomainError(f"turbidity voltage {volts} outside 0..{TURBIDITY_MAX_VOLTS} V")
    span = calibration.v_clear - calibration.v_opaque
    ntu = calibration.ntu_max * (calibration.v_clear - volts) / span
    return min(max(ntu, 0.0), calibration.ntu_max)


def voltage_for_turbidity(
    ntu: float, calibration: Optional[TurbidityCalibration] = None
) -> float:
    calibration = calibration or TurbidityCalibration()
    span = calibration.v_clear - calibration.v_opaque
    return calibration.v_clear - ntu / calibration.ntu_max * span


class PondStream:
    """Seeded generator of one pond's readings; one instance per consumer thread."""

    def __init__(
        self,
        profile: PondProfile,
        duration_s: int,
        interval_s: int,
        seed: int,
        sensor_specs: Optional[Mapping[Parameter, SensorSpec]] = None,
        calibration: Optional[TurbidityCalibration] = None,
        conductivity_coeff: float = DEFAULT_CONDUCTIVITY_COEFF,
        speed_of_sound_m_s: float = 340.0,
    ):
        if duration_s <= 0 or interval_s <= 0:
            raise DomainError("duration and interval must be positive")
        self.profile = profile
        self.duration_s = duration_s
        self.interval_s = interval_s
        self.seed = seed
        self.specs = {**DEFAULT_SENSOR_SPECS, **(sensor_specs or {})}
        self.calibration = calibration or TurbidityCalibration()
        self.conductivity_coeff = conductivity_coeff
        self.ultrasonic = UltrasonicModel(
            speed_of_sound_m_s=speed_of_sound_m_s,
            sensor_height_m=profile.depth_range_m[1] + DEPTH_SENSOR_CLEARANCE_M,
        )
        self.parameters = [p for p in STREAM_ORDER if p in profile.envelopes]

    def _band(self, parameter: Parameter):
        spec = self.specs[parameter]
        lo, hi = self.profile.envelopes[parameter]
        margin = 3 * spec.noise_sigma
        return max(lo - margin, spec.min), min(hi + margin, spec.max)

    def _finish(self, parameter: Parameter, value: float) -> float:
        lo, hi = self._band(parameter)
        value = min(max(value, lo), hi)
        if parameter == Parameter.TEMPERATURE:
            return quantize_temperature(value, DEFAULT_TEMPERATURE_BITS)
        return snap(value, self.specs[parameter].resolution)

    def _draw(self, rng: np.random.Generator, parameter: Parameter) -> float:
        lo, hi = self.profile.envelopes[parameter]
        return float(rng.uniform(lo, hi)) if hi > lo else float(lo)

    def _noise(self, rng: np.random.Generator, parameter: Parameter) -> float:
        sigma = self.specs[parameter].noise_sigma
        return float(rng.normal(0.0, sigma)) if sigma > 0 else 0.0

    def _tick(self, rng: np.random.Generator) -> Dict[Parameter, float]:
        values: Dict[Parameter, float] = {}
        for parameter in self.parameters:
            raw = self._draw(rng, parameter)
            if parameter == Parameter.TURBIDITY:
                volts = voltage_for_turbidity(max(raw, 0.0), self.calibration)
                raw = turbidity_from_voltage(min(volts, TURBIDITY_MAX_VOLTS), self.calibration)
            elif parameter == Parameter.CONDUCTIVITY and Parameter.TEMPERATURE in values:
                # envelope is read at the profile's mean temperature
                t_lo, t_hi = self.profile.envelopes[Parameter.TEMPERATURE]
                t_mid = (t_lo + t_hi) / 2
                reference = raw / (1 + self.conductivity_coeff * (t_mid - 25.0))
                raw = conductivity_from_temperature(
                    reference, values[Parameter.TEMPERATURE], self.conductivity_coeff
                )
            elif parameter == Parameter.DEPTH:
                echo = echo_time_for_depth(raw, self.ultrasonic)
                raw = depth_from_echo(echo, self.ultrasonic)
            values[parameter] = self._finish(parameter, raw + self._noise(rng, parameter))
        return values

    def __iter__(self) -> Iterator[ReadingSample]:
        rng = np.random.default_rng(self.seed)
        for timestamp in range(0, self.duration_s, self.interval_s):
            for parameter, value in self._tick(rng).items():
                yield ReadingSample(
                    timestamp=timestamp,
                    pond_id=self.profile.pond_id,
                    parameter=parameter,
                    value=value,
                )


def simulate_pond_stream(
    profile: PondProfile, duration_s: int, interval_s: int, seed: int, **options
) -> List[ReadingSample]:
    samples = list(PondStream(profile, duration_s, interval_s, seed, **options))
    logger.debug(
        "simulated pond %s: %d samples over %d s", profile.pond_id, len(samples), duration_s
    )
    return samples
