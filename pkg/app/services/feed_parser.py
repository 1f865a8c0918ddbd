import io
import json
import logging
import re
import xml.etree.ElementTree as ET
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Union

import pandas as pd

from app.errors import ValidationError
from app.schemas import FeedEntrySchema, Parameter

logger = logging.getLogger(__name__)

# field order of the monitoring channel; field5 only exists on pond channels
FIELD_PARAMETERS: Dict[int, Parameter] = {
    1: Parameter.TURBIDITY,
    2: Parameter.TEMPERATURE,
    3: Parameter.PH,
    4: Parameter.DEPTH,
    5: Parameter.CONDUCTIVITY,
}

LABEL_PARAMETERS: Dict[str, Parameter] = {
    "turbidity": Parameter.TURBIDITY,
    "temperature": Parameter.TEMPERATURE,
    "ph": Parameter.PH,
    "depth": Parameter.DEPTH,
    "conductivity": Parameter.CONDUCTIVITY,
    "do": Parameter.DO,
    "bod": Parameter.BOD,
    "cod": Parameter.COD,
}

_FIELD_COLUMN = re.compile(r"^field([1-8])$")


def _parse_timestamp(text: str) -> datetime:
    return datetime.fromisoformat(str(text).replace("Z", "+00:00"))


def _optional_float(value) -> Optional[float]:
    if value is None or value == "" or (isinstance(value, float) and pd.isna(value)):
        return None
    return float(value)


class FeedParser:
    @staticmethod
    def read_csv(source: Union[str, Path, io.IOBase]) -> List[FeedEntrySchema]:
        """
        Parse a feed CSV (`created_at,entry_id,field1..fieldN`) into entries.
        """
        try:
            frame = pd.read_csv(source, dtype={"created_at": str}, float_precision="round_trip")
        except pd.errors.EmptyDataError as exc:
            raise ValidationError("feed file is empty") from exc
        except pd.errors.ParserError as exc:
            raise ValidationError(f"feed file is not valid CSV: {exc}") from exc

        missing = {"created_at", "entry_id"} - set(frame.columns)
        if missing:
            raise ValidationError(f"feed file lacks columns: {', '.join(sorted(missing))}")
        field_columns = {
            int(match.group(1)): column
            for column in frame.columns
            if (match := _FIELD_COLUMN.match(str(column)))
        }
        if not field_columns:
            raise ValidationError("feed file has no field columns")

        entries = [
            FeedEntrySchema(
                entry_id=int(record["entry_id"]),
                created_at=_parse_timestamp(record["created_at"]),
                field_values={
                    index: _optional_float(record[column])
                    for index, column in sorted(field_columns.items())
                },
            )
            for record in frame.to_dict("records")
        ]
        logger.debug("parsed %d feed rows with fields %s", len(entries), sorted(field_columns))
        return entries

    @staticmethod
    def read_json(payload: Union[str, bytes]) -> List[FeedEntrySchema]:
        try:
            document = json.loads(payload)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"feed document is not valid JSON: {exc}") from exc
        entries = []
        for row in document.get("feeds", []):
            entries.append(
                FeedEntrySchema(
                    entry_id=int(row["entry_id"]),
                    created_at=_parse_timestamp(row["created_at"]),
                    field_values={
                        int(match.group(1)): _optional_float(value)
                        for key, value in row.items()
                        if (match := _FIELD_COLUMN.match(key))
                    },
                )
            )
        return entries

    @staticmethod
    def read_xml(payload: Union[str, bytes], field_indices: Sequence[int]) -> List[FeedEntrySchema]:
        """XML omits absent fields, so the caller names the exported field indices."""
        try:
            root = ET.fromstring(payload)
        except ET.ParseError as exc:
            raise ValidationError(f"feed document is not valid XML: {exc}") from exc
        entries = []
        for feed in root.iter("feed"):
            entries.append(
                FeedEntrySchema(
                    entry_id=int(feed.findtext("entry-id")),
                    created_at=_parse_timestamp(feed.findtext("created-at")),
                    field_values={
                        index: _optional_float(feed.findtext(f"field{index}"))
                        for index in field_indices
                    },
                )
            )
        return entries

    @staticmethod
    def channel_field_parameters(document: Mapping) -> Dict[int, Parameter]:
        """Map field indices to parameters using the labels of a JSON feed's channel block."""
        mapping: Dict[int, Parameter] = {}
        for key, label in document.get("channel", {}).items():
            match = _FIELD_COLUMN.match(key)
            if match and str(label).strip().lower() in LABEL_PARAMETERS:
                mapping[int(match.group(1))] = LABEL_PARAMETERS[str(label).strip().lower()]
        return mapping or dict(FIELD_PARAMETERS)

    @staticmethod
    def samples_from_feed(
        entries: Sequence[FeedEntrySchema],
        field_parameters: Optional[Mapping[int, Parameter]] = None,
    ) -> Dict[Parameter, List[float]]:
        field_parameters = field_parameters or FIELD_PARAMETERS
        samples: Dict[Parameter, List[float]] = {}
        for entry in entries:
            for index, value in entry.field_values.items():
                parameter = field_parameters.get(index)
                if parameter is not None and value is not None:
                    samples.setdefault(parameter, []).append(value)
        if not samples:
            raise ValidationError("feed carries no readings")
        return samples
