"""Field measurements from the five surveyed ponds, shipped with the package.

Every table holds 20 stabilised samples per pond in recording order. Depth was
measured with sticks, so it is carried as a static range per pond.
"""

import io
from datetime import datetime, timezone
from typing import Dict, List, Tuple

import pandas as pd

from app.errors import NotFoundError
from app.schemas import Parameter, PondProfile

POND_IDS = (1, 2, 3, 4, 5)

FIXTURE_TABLES: Dict[Parameter, Dict[int, Tuple[float, ...]]] = {
    Parameter.PH: {
        1: (7.67, 8.39, 8.24, 8.26, 8.23, 8.31, 8.38, 7.84, 6.7, 6.02,
            8.16, 8.23, 7.96, 7.79, 7.88, 7.84, 8.18, 8.16, 8.32, 8.23),
        2: (8.65, 8.66, 8.74, 8.57, 8.62, 8.69, 8.73, 8.63, 8.66, 8.75,
            8.77, 8.78, 8.81, 8.79, 8.87, 8.8, 8.78, 8.8, 8.79, 8.79),
        3: (6.02, 6.01, 6.0, 6.09, 6.93, 6.42, 6.48, 7.0, 7.27, 7.24,
            7.11, 7.6, 7.83, 7.75, 7.5, 7.07, 6.99, 6.87, 6.68, 6.95),
        4: (8.3, 8.15, 8.09, 7.99, 7.92, 7.96, 7.87, 7.7, 7.54, 7.5,
            7.43, 7.42, 7.26, 6.95, 6.78, 6.92, 6.87, 6.51, 7.02, 6.8),
        5: (3.84, 3.9, 3.91, 3.89, 3.88, 3.92, 3.91, 3.89, 3.9, 3.93,
            3.92, 3.86, 3.87, 3.86, 3.9, 3.89, 3.86, 3.85, 3.92, 3.95),
    },
    Parameter.TEMPERATURE: {
        1: (17.62, 17.5, 17.56, 17.75, 17.56, 17.69, 17.69, 17.56, 17.5, 17.62,
            17.62, 17.56, 17.62, 17.75, 17.75, 17.69, 17.69, 17.75, 17.56, 17.56),
        2: (17.75, 17.87, 17.94, 17.87, 17.81, 17.94, 17.81, 17.94, 17.94, 18.0,
            17.94, 18.0, 17.94, 18.0, 18.0, 17.81, 17.87, 18.0, 17.94, 17.94),
        3: (21.0, 21.0, 21.0, 21.06, 21.0, 20.94, 21.0, 21.0, 21.06, 21.0,
            21.06, 20.94, 20.87, 21.06, 20.87, 20.87, 21.06, 21.06, 21.0, 21.06),
        4: (21.44, 21.5, 21.37, 21.44, 21.5, 21.37, 21.25, 21.31, 21.12, 21.25,
            21.19, 21.12, 21.25, 21.19, 21.25, 21.06, 21.19, 21.19, 21.25, 21.25),
        5: (21.06, 21.09, 21.12, 21.06, 21.12, 21.19, 21.19, 21.12, 21.19, 21.06,
            21.25, 21.12, 21.06, 21.25, 21.06, 21.12, 21.19, 21.0, 21.19, 21.12),
    },
    Parameter.CONDUCTIVITY: {
        1: (995.88, 989.1, 992.49, 1003.23, 992.49, 999.83, 999.83, 992.49, 989.1, 995.88,
            995.62, 992.49, 995.88, 1003.23, 1003.23, 999.83, 999.83, 1003.23, 992.49, 992.49),
        2: (1003.23, 1010.01, 1013.97, 1010.01, 1006.62, 1013.97, 1006.62, 1013.97, 1013.97, 1017.36,
            1013.97, 1017.36, 1013.97, 1017.36, 1017.36, 1006.62, 1010.01, 1017.36, 1013.97, 1013.97),
        3: (1186.92, 1186.92, 1186.92, 1190.32, 1186.92, 1183.53, 1186.92, 1186.92, 1190.32, 1186.92,
            1190.32, 1183.53, 1179.57, 1190.32, 1179.57, 1189.57, 1190.32, 1190.32, 1186.92, 1190.32),
        4: (1211.79, 1215.18, 1207.83, 1211.79, 1215.18, 1207.83, 1201.05, 1204.44, 1193.7, 1201.05,
            1197.66, 1193.7, 1201.05, 1197.66, 1201.05, 1190.31, 1197.66, 1197.66, 1201.05, 1201.05),
        5: (1190.31, 1192.01, 1193.7, 1190.31, 1193.7, 1197.66, 1197.66, 1193.7, 1197.66, 1190.31,
            1201.05, 1193.7, 1190.31, 1201.05, 1190.31, 1193.7, 1197.66, 1186.92, 1197.66, 1193.7),
    },
    Parameter.TURBIDITY: {
        1: (3.56, 3.56, 3.55, 3.55, 3.55, 3.56, 3.56, 3.57, 3.56, 3.57,
            3.55, 3.55, 3.56, 3.56, 3.55, 3.55, 3.56, 3.56, 3.56, 3.56),
        2: (3.44, 3.45, 3.41, 3.46, 3.47, 3.48, 3.45, 3.46, 3.44, 3.47,
            3.47, 3.48, 3.43, 3.46, 3.46, 3.48, 3.48, 3.49, 3.5, 3.5),
        3: (3.48, 3.49, 3.48, 3.48, 3.47, 3.47, 3.46, 3.46, 3.45, 3.44,
            3.45, 3.45, 3.43, 3.41, 3.37, 3.36, 3.35, 3.33, 3.32, 3.31),
        4: (3.62, 3.62, 3.62, 3.61, 3.61, 3.61, 3.61, 3.6, 3.6, 3.6,
            3.61, 3.61, 3.62, 3.62, 3.62, 3.6, 3.6, 3.61, 3.61, 3.61),
        5: (3.56, 3.56, 3.56, 3.56, 3.57, 3.57, 3.57, 3.57, 3.57, 3.56,
            3.56, 3.56, 3.56, 3.57, 3.57, 3.57, 3.56, 3.56, 3.58, 3.58),
    },
}

# (length m, width m, depth range m)
POND_DIMENSIONS: Dict[int, Tuple[float, float, Tuple[float, float]]] = {
    1: (26.0, 17.0, (1.0, 2.0)),
    2: (52.0, 30.0, (1.0, 2.0)),
    3: (105.0, 35.0, (1.0, 2.0)),
    4: (156.0, 80.0, (2.0, 4.0)),
    5: (40.0, 20.0, (1.0, 3.0)),
}

# start of each pond's pH recording session
POND_SESSIONS: Dict[int, datetime] = {
    1: datetime(2020, 12, 20, 20, 50, tzinfo=timezone.utc),
    2: datetime(2020, 12, 21, 11, 18, tzinfo=timezone.utc),
    3: datetime(2020, 12, 20, 14, 0, tzinfo=timezone.utc),
    4: datetime(2020, 12, 20, 18, 0, tzinfo=timezone.utc),
    5: datetime(2020, 12, 22, 14, 30, tzinfo=timezone.utc),
}

# single laboratory measurements, mg/L; recorded only
LAB_MEASUREMENTS: Dict[int, Dict[Parameter, float]] = {
    1: {Parameter.DO: 6.79, Parameter.BOD: 7.0, Parameter.COD: 12.0},
}


def _check_pond(pond_id: int) -> None:
    if pond_id not in POND_IDS:
        raise NotFoundError(f"no fixture data for pond {pond_id}")


def load_fixture(pond_id: int, parameter: Parameter) -> List[float]:
    """Return the 20 recorded values for one pond and parameter, in order."""
    table = FIXTURE_TABLES.get(Parameter(parameter))
    if table is None or pond_id not in table:
        raise NotFoundError(
            f"no fixture table for pond {pond_id}, parameter {Parameter(parameter).value}"
        )
    return list(table[pond_id])


def fixture_samples(pond_id: int) -> Dict[Parameter, List[float]]:
    _check_pond(pond_id)
    samples = {parameter: load_fixture(pond_id, parameter) for parameter in FIXTURE_TABLES}
    for parameter, value in LAB_MEASUREMENTS.get(pond_id, {}).items():
        samples[parameter] = [value]
    return samples


def depth_range(pond_id: int) -> Tuple[float, float]:
    _check_pond(pond_id)
    return POND_DIMENSIONS[pond_id][2]


def builtin_profile(pond_id: int) -> PondProfile:
    """Pond dimensions plus the observed min/max envelope of every fixture table."""
    _check_pond(pond_id)
    length, width, depths = POND_DIMENSIONS[pond_id]
    envelopes = {
        parameter: (min(table[pond_id]), max(table[pond_id]))
        for parameter, table in FIXTURE_TABLES.items()
    }
    envelopes[Parameter.DEPTH] = depths
    return PondProfile(
        pond_id=pond_id,
        length_m=length,
        width_m=width,
        depth_range_m=depths,
        envelopes=envelopes,
        session_start=POND_SESSIONS[pond_id],
    )


def fixtures_frame() -> pd.DataFrame:
    rows = [
        {
            "pond_id": pond_id,
            "parameter": parameter.value,
            "sample_index": index,
            "value": value,
        }
        for parameter, table in FIXTURE_TABLES.items()
        for pond_id in POND_IDS
        for index, value in enumerate(table[pond_id])
    ]
    return pd.DataFrame(rows, columns=["pond_id", "parameter", "sample_index", "value"])


def export_fixtures_csv() -> str:
    buffer = io.StringIO()
    fixtures_frame().to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()
