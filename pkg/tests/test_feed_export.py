import io
import json
from datetime import datetime, timedelta, timezone

import pytest

from app.errors import ValidationError
from app.schemas import ChannelResponse, FeedEntrySchema, FeedPage, Parameter
from app.services.channel_store import DEFAULT_FIELD_LABELS, stabilization_filter
from app.services.feed_export import FeedExporter
from app.services.feed_parser import FeedParser

T0 = datetime(2020, 12, 20, 20, 50, tzinfo=timezone.utc)


def make_page(entries, field_indices=(1, 2, 3, 4)):
    channel = ChannelResponse(
        id=1,
        name="Fish Farm Monitoring System",
        field_labels=DEFAULT_FIELD_LABELS,
        created_at=T0,
        last_entry_id=entries[-1].entry_id if entries else None,
    )
    return FeedPage(channel=channel, field_indices=list(field_indices), entries=entries)


def entry(entry_id, seconds, **fields):
    values = {index: fields.get(f"field{index}") for index in (1, 2, 3, 4)}
    return FeedEntrySchema(
        entry_id=entry_id, created_at=T0 + timedelta(seconds=seconds), field_values=values
    )


class TestFeedExporter:

    def test_csv_single_entry(self):
        """Test one sparse entry serializes with empty absent fields"""
        text = FeedExporter.to_csv(make_page([entry(1, 0, field1=3.56)]))
        assert text.splitlines() == [
            "created_at,entry_id,field1,field2,field3,field4",
            "2020-12-20T20:50:00Z,1,3.56,,,",
        ]

    def test_csv_empty_feed(self):
        """Test an empty feed is just the header"""
        header = "created_at,entry_id,field1,field2,field3,field4\n"
        assert FeedExporter.to_csv(make_page([])) == header

    def test_formats_agree(self):
        """Test CSV, JSON and XML carry the same values"""
        entries = [
            entry(1, 0, field1=3.56, field3=7.67),
            entry(2, 60, field1=3.57, field2=17.5, field3=8.39, field4=1.25),
            entry(3, 120, field2=17.5625),
        ]
        page = make_page(entries)
        from_csv = FeedParser.read_csv(io.StringIO(FeedExporter.to_csv(page)))
        from_json = FeedParser.read_json(FeedExporter.to_json(page))
        from_xml = FeedParser.read_xml(FeedExporter.to_xml(page), page.field_indices)
        assert from_csv == from_json == from_xml == entries

    def test_json_channel_block(self):
        """Test the JSON channel block names each exported field"""
        document = json.loads(FeedExporter.to_json(make_page([entry(1, 0, field1=1.0)])))
        assert document["channel"]["field3"] == "PH"
        assert document["channel"]["last_entry_id"] == 1
        assert document["feeds"][0]["field2"] is None

    def test_xml_omits_absent_fields(self):
        """Test XML feeds have no element for absent values"""
        payload = FeedExporter.to_xml(make_page([entry(1, 0, field1=3.56)]))
        assert payload.startswith(b"<?xml")
        assert b"<field1>3.56</field1>" in payload
        assert b"<field2>" not in payload.split(b"<feeds")[1]

    def test_single_field_projection(self):
        """Test a projected page exports one field column"""
        page = make_page(
            [
                FeedEntrySchema(entry_id=1, created_at=T0, field_values={3: 7.67}),
            ],
            field_indices=(3,),
        )
        assert FeedExporter.to_csv(page).splitlines()[0] == "created_at,entry_id,field3"

    def test_unknown_format(self):
        """Test an unknown export format is rejected"""
        with pytest.raises(ValidationError):
            FeedExporter.export(make_page([]), "yaml")


class TestFeedParser:

    def test_samples_by_parameter(self):
        """Test the default field map turns feeds into parameter samples"""
        entries = [entry(1, 0, field1=3.56, field3=7.67), entry(2, 60, field3=8.0)]
        samples = FeedParser.samples_from_feed(entries)
        assert samples == {Parameter.TURBIDITY: [3.56], Parameter.PH: [7.67, 8.0]}

    def test_labels_override_field_order(self):
        """Test channel labels decide which field holds which parameter"""
        document = {"channel": {"field1": "pH", "field2": "DO"}, "feeds": []}
        mapping = FeedParser.channel_field_parameters(document)
        assert mapping == {1: Parameter.PH, 2: Parameter.DO}

    def test_empty_csv(self):
        """Test an empty feed file is a validation error"""
        with pytest.raises(ValidationError):
            FeedParser.read_csv(io.StringIO(""))

    def test_csv_without_fields(self):
        """Test a feed file needs at least one field column"""
        with pytest.raises(ValidationError):
            FeedParser.read_csv(io.StringIO("created_at,entry_id\n2020-12-20T20:50:00Z,1\n"))

    def test_feed_without_readings(self):
        """Test a feed whose fields are all empty has no samples"""
        with pytest.raises(ValidationError):
            FeedParser.samples_from_feed([entry(1, 0)])


class TestStabilizationFilter:

    def test_warmup_boundary_is_inclusive(self):
        """Test entries at t0 + warmup and later survive"""
        entries = [entry(i + 1, 60 * i) for i in range(5)]
        kept = stabilization_filter(entries, 180)
        assert [e.entry_id for e in kept] == [4, 5]

    def test_step_60_over_600_seconds(self):
        """Test exactly the entries with t >= 180 survive"""
        entries = [entry(i + 1, 60 * i) for i in range(11)]
        kept = stabilization_filter(entries, 180)
        assert [(e.created_at - T0).total_seconds() for e in kept] == [
            180.0 + 60 * i for i in range(8)
        ]

    def test_idempotent_with_fixed_origin(self):
        """Test a second pass from the same origin drops nothing more"""
        entries = [entry(i + 1, 60 * i) for i in range(11)]
        once = stabilization_filter(entries, 180, origin=T0)
        assert stabilization_filter(once, 180, origin=T0) == once
        assert once == stabilization_filter(entries, 180)

    def test_identity_and_empty(self):
        """Test zero warmup is the identity and empty input stays empty"""
        entries = [entry(1, 0), entry(2, 60)]
        assert stabilization_filter(entries, 0) == entries
        assert stabilization_filter([], 180) == []
