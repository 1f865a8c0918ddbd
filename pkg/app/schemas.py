import math
from datetime import datetime
from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class Parameter(str, Enum):
    PH = "pH"
    TEMPERATURE = "temperature_C"
    TURBIDITY = "turbidity_NTU"
    CONDUCTIVITY = "conductivity_uS_cm"
    DEPTH = "depth_m"
    DO = "DO_mg_l"
    BOD = "BOD_mg_l"
    COD = "COD_mg_l"


class PhZone(str, Enum):
    DEATH = "Death"
    NO_REPRODUCTION = "NoReproduction"
    SLOW_GROWTH = "SlowGrowth"
    CRITICAL = "Critical"
    IDEAL = "Ideal"


class OxygenStatus(str, Enum):
    HEALTHY = "Healthy"
    HAZARDOUS = "Hazardous"
    EMERGENCY_AERATION = "EmergencyAeration"
    CRITICAL = "Critical"


class Species(str, Enum):
    KATLA = "katla"
    SING = "sing"
    PRAWN = "prawn"
    RUI = "rui"
    KOI = "koi"
    PANGAS = "pangas"
    TILAPIA = "tilapia"
    SILVERCARP = "silvercarp"
    KARPIO = "karpio"
    MAGUR = "magur"
    SHRIMP = "shrimp"


# Sensor layer


class ReadingSample(BaseModel):
    model_config = ConfigDict(frozen=True)

    timestamp: int = Field(..., ge=0)
    pond_id: int = Field(..., ge=1, le=5)
    parameter: Parameter
    value: float

    @field_validator("value")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("reading value must be finite")
        return value


class SensorSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    parameter: Parameter
    min: float
    max: float
    resolution: float = Field(..., gt=0)
    noise_sigma: float = Field(0.0, ge=0)

    @model_validator(mode="after")
    def _ordered(self):
        if not self.min < self.max:
            raise ValueError("sensor min must be below max")
        return self


class UltrasonicModel(BaseModel):
    model_config = ConfigDict(frozen=True)

    speed_of_sound_m_s: float = Field(340.0, gt=0)
    sensor_height_m: float = Field(2.0, gt=0)


class TurbidityCalibration(BaseModel):
    model_config = ConfigDict(frozen=True)

    v_clear: float = 4.2
    v_opaque: float = 2.5
    ntu_max: float = Field(3000.0, gt=0)

    @model_validator(mode="after")
    def _anchors(self):
        if not self.v_opaque < self.v_clear:
            raise ValueError("v_opaque must be below v_clear")
        return self


class PondProfile(BaseModel):
    model_config = ConfigDict(frozen=True)

    pond_id: int = Field(..., ge=1, le=5)
    length_m: float = Field(..., gt=0)
    width_m: float = Field(..., gt=0)
    depth_range_m: Tuple[float, float]
    envelopes: Dict[Parameter, Tuple[float, float]]
    session_start: Optional[datetime] = None

    @model_validator(mode="after")
    def _envelopes_ordered(self):
        lo, hi = self.depth_range_m
        if lo > hi:
            raise ValueError("depth range lo must not exceed hi")
        for parameter, (lo, hi) in self.envelopes.items():
            if lo > hi:
                raise ValueError(f"envelope for {parameter.value} has lo > hi")
        return self


# Water quality verdicts


class IdealRange(BaseModel):
    model_config = ConfigDict(frozen=True)

    parameter: Parameter
    lo: float
    hi: float

    @model_validator(mode="after")
    def _ordered(self):
        if not self.lo < self.hi:
            raise ValueError("ideal range lo must be below hi")
        return self

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi


DEFAULT_IDEAL_RANGES: List[IdealRange] = [
    IdealRange(parameter=Parameter.PH, lo=6.5, hi=8.5),
    IdealRange(parameter=Parameter.TEMPERATURE, lo=16.0, hi=24.0),
    IdealRange(parameter=Parameter.TURBIDITY, lo=0.0, hi=10.0),
    IdealRange(parameter=Parameter.CONDUCTIVITY, lo=970.0, hi=1825.0),
    IdealRange(parameter=Parameter.DEPTH, lo=1.0, hi=5.0),
]


class SuitabilityConfig(BaseModel):
    threshold: float = Field(0.70, gt=0, le=1)
    ranges: List[IdealRange] = Field(default_factory=lambda: list(DEFAULT_IDEAL_RANGES))

    def range_for(self, parameter: Parameter) -> Optional[IdealRange]:
        for ideal in self.ranges:
            if ideal.parameter == parameter:
                return ideal
        return None


class ReadingSummary(BaseModel):
    count: int
    min: float
    max: float
    median: float
    mean: float


class ParameterStatus(BaseModel):
    parameter: Parameter
    sample_count: int
    in_range_fraction: float = Field(..., ge=0, le=1)
    median: float
    observed_range: Tuple[float, float]
    passed: bool = Field(..., alias="pass")

    model_config = ConfigDict(populate_by_name=True)


class Observation(BaseModel):
    """A recorded-only parameter (DO, BOD, COD) that never affects the verdict."""

    parameter: Parameter
    summary: ReadingSummary
    oxygen_status: Optional[OxygenStatus] = None


class PondVerdict(BaseModel):
    pond_id: int
    statuses: List[ParameterStatus]
    observations: List[Observation] = []
    recommended: bool
    remarks: str


# Telemetry channels


class ChannelCreate(BaseModel):
    name: str = Field(..., min_length=1, max_length=255)
    field_labels: List[str] = Field(..., min_length=1, max_length=8)


class ChannelResponse(BaseModel):
    id: int
    name: str
    field_labels: List[str]
    created_at: datetime
    last_entry_id: Optional[int] = None


class ChannelCreated(ChannelResponse):
    write_key: str


class FeedEntrySchema(BaseModel):
    model_config = ConfigDict(frozen=True)

    entry_id: int = Field(..., ge=1)
    created_at: datetime
    # keyed by 1-based field index; only the exposed fields are present
    field_values: Dict[int, Optional[float]]


class FeedQuery(BaseModel):
    results: int = Field(100, ge=1, le=8000)
    start: Optional[datetime] = None
    end: Optional[datetime] = None
    field: Optional[int] = Field(None, ge=1, le=8)
    warmup: Optional[int] = Field(None, ge=0)


class FeedPage(BaseModel):
    channel: ChannelResponse
    field_indices: List[int]
    entries: List[FeedEntrySchema]
