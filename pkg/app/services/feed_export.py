import io
import json
import xml.etree.ElementTree as ET
from datetime import datetime
from typing import Any, Dict, List

import pandas as pd

from app.errors import ValidationError
from app.schemas import FeedPage

EXPORT_FORMATS = ("csv", "json", "xml")

MEDIA_TYPES = {
    "csv": "text/csv; charset=utf-8",
    "json": "application/json",
    "xml": "application/xml",
}


def format_timestamp(moment: datetime) -> str:
    return moment.strftime("%Y-%m-%dT%H:%M:%SZ")


class FeedExporter:
    """Serialize a feed page; every format carries the same values."""

    @staticmethod
    def export(page: FeedPage, fmt: str) -> bytes:
        fmt = fmt.lower()
        if fmt == "csv":
            return FeedExporter.to_csv(page).encode("utf-8")
        if fmt == "json":
            return FeedExporter.to_json(page).encode("utf-8")
        if fmt == "xml":
            return FeedExporter.to_xml(page)
        raise ValidationError(
            f"unknown export format {fmt!r}; expected one of {', '.join(EXPORT_FORMATS)}"
        )

    @staticmethod
    def feed_rows(page: FeedPage) -> List[Dict[str, Any]]:
        rows = []
        for entry in page.entries:
            row: Dict[str, Any] = {
                "created_at": format_timestamp(entry.created_at),
                "entry_id": entry.entry_id,
            }
            for index in page.field_indices:
                row[f"field{index}"] = entry.field_values.get(index)
            rows.append(row)
        return rows

    @staticmethod
    def to_csv(page: FeedPage) -> str:
        columns = ["created_at", "entry_id"] + [f"field{i}" for i in page.field_indices]
        frame = pd.DataFrame(FeedExporter.feed_rows(page), columns=columns)
        buffer = io.StringIO()
        frame.to_csv(buffer, index=False, lineterminator="\n")
        return buffer.getvalue()

    @staticmethod
    def channel_document(page: FeedPage) -> Dict[str, Any]:
        channel = page.channel
        document: Dict[str, Any] = {
            "id": channel.id,
            "name": channel.name,
            "created_at": format_timestamp(channel.created_at),
            "last_entry_id": channel.last_entry_id,
        }
        for index in page.field_indices:
            document[f"field{index}"] = channel.field_labels[index - 1]
        return document

    @staticmethod
    def to_json(page: FeedPage) -> str:
        return json.dumps(
            {
                "channel": FeedExporter.channel_document(page),
                "feeds": FeedExporter.feed_rows(page),
            }
        )

    @staticmethod
    def to_xml(page: FeedPage) -> bytes:
        root = ET.Element("channel")
        for key, value in FeedExporter.channel_document(page).items():
            if value is not None:
                ET.SubElement(root, key.replace("_", "-")).text = str(value)
        feeds = ET.SubElement(root, "feeds", {"type": "array"})
        for row in FeedExporter.feed_rows(page):
            feed = ET.SubElement(feeds, "feed")
            for key, value in row.items():
                # absent fields are omitted
                if value is not None:
                    ET.SubElement(feed, key.replace("_", "-")).text = (
                        repr(value) if isinstance(value, float) else str(value)
                    )
        return ET.tostring(root, encoding="utf-8", xml_declaration=True)
