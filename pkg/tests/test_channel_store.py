from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timedelta, timezone

import pytest

from app.database import make_engine, make_session_factory
from app.errors import AuthenticationError, NotFoundError, ValidationError
from app.schemas import FeedQuery
from app.services.channel_store import ChannelStore, stabilization_filter

T0 = datetime(2020, 12, 20, 20, 50, tzinfo=timezone.utc)


@pytest.fixture
def engine(settings):
    engine = make_engine(settings)
    yield engine
    engine.dispose()


@pytest.fixture
def store(engine):
    return ChannelStore(make_session_factory(engine))


class TestChannels:

    def test_create_channel(self, store):
        """Test a new channel gets its labels and a write key"""
        created = store.create_channel(
            "Fish Farm Monitoring System", ["Turbidity", "Temperature", "PH", "Depth"]
        )
        assert len(created.field_labels) == 4
        assert len(created.write_key) == 16
        assert created.last_entry_id is None

    def test_default_labels(self, store):
        """Test omitted labels fall back to the monitoring fields"""
        assert store.create_channel("pond").field_labels == [
            "Turbidity",
            "Temperature",
            "PH",
            "Depth",
        ]

    def test_label_limits(self, store):
        """Test channels need 1 to 8 labels"""
        with pytest.raises(ValidationError):
            store.create_channel("x", [f"f{i}" for i in range(9)])
        with pytest.raises(ValidationError):
            store.create_channel("x", [])

    def test_distinct_ids(self, store):
        """Test two creates give two channels"""
        first = store.create_channel("a")
        second = store.create_channel("b")
        assert first.id != second.id
        assert first.write_key != second.write_key
        assert [c.id for c in store.list_channels()] == [first.id, second.id]

    def test_unknown_channel(self, store):
        """Test reading a missing channel is not found"""
        with pytest.raises(NotFoundError):
            store.get_channel(99)
        with pytest.raises(NotFoundError):
            store.read_feed(99)


class TestWrites:

    def test_first_write_is_entry_one(self, store):
        """Test the entry counter starts at 1 and absent fields stay absent"""
        channel = store.create_channel("pond")
        assert store.write_update(channel.write_key, {1: 3.56, 3: 7.67}, T0) == 1
        page = store.read_feed(channel.id)
        assert page.entries[0].field_values == {1: 3.56, 2: None, 3: 7.67, 4: None}
        assert page.entries[0].created_at == T0

    def test_rejected_writes(self, store):
        """Test bad keys, empty updates and foreign fields are refused"""
        channel = store.create_channel("pond")
        with pytest.raises(AuthenticationError):
            store.write_update("WRONG", {1: 1.0})
        with pytest.raises(ValidationError):
            store.write_update(channel.write_key, {})
        with pytest.raises(ValidationError):
            store.write_update(channel.write_key, {5: 1.0})
        with pytest.raises(ValidationError):
            store.write_update(channel.write_key, {1: float("nan")})
        assert store.read_feed(channel.id).entries == []

    def test_concurrent_writes_are_dense(self, store):
        """Test 100 concurrent writes get ids 1..100"""
        channel = store.create_channel("pond")
        with ThreadPoolExecutor(max_workers=8) as pool:
            ids = list(
                pool.map(
                    lambda i: store.write_update(channel.write_key, {1: float(i)}), range(100)
                )
            )
        assert sorted(ids) == list(range(1, 101))
        page = store.read_feed(channel.id, FeedQuery(results=8000))
        assert [e.entry_id for e in page.entries] == list(range(1, 101))
        assert sorted(e.field_values[1] for e in page.entries) == [float(i) for i in range(100)]

    def test_restart_keeps_entries(self, settings, engine, store):
        """Test a reopened store reads back every entry and keeps counting"""
        channel = store.create_channel("pond")
        for i in range(100):
            store.write_update(channel.write_key, {2: 17.5 + i}, T0 + timedelta(seconds=i))
        engine.dispose()

        reopened_engine = make_engine(settings)
        try:
            reopened = ChannelStore(make_session_factory(reopened_engine))
            page = reopened.read_feed(channel.id, FeedQuery(results=8000))
            assert len(page.entries) == 100
            assert page.channel.last_entry_id == 100
            assert reopened.write_update(channel.write_key, {2: 1.0}) == 101
        finally:
            reopened_engine.dispose()


class TestReads:

    @pytest.fixture
    def filled(self, store):
        channel = store.create_channel("pond")
        for i in range(3):
            store.write_update(
                channel.write_key, {1: 3.5 + i, 3: 7.0 + i}, T0 + timedelta(minutes=i)
            )
        return channel

    def test_results_tail(self, store, filled):
        """Test results=1 returns only the newest entry"""
        page = store.read_feed(filled.id, FeedQuery(results=1))
        assert [e.entry_id for e in page.entries] == [3]
        assert store.last_entry(filled.id).entry_id == 3

    def test_field_projection(self, store, filled):
        """Test a field query exposes only that field"""
        page = store.read_feed(filled.id, FeedQuery(field=3))
        assert page.field_indices == [3]
        assert [e.field_values for e in page.entries] == [{3: 7.0}, {3: 8.0}, {3: 9.0}]
        with pytest.raises(ValidationError):
            store.read_feed(filled.id, FeedQuery(field=5))

    def test_time_window(self, store, filled):
        """Test start and end bound the window inclusively"""
        query = FeedQuery(start=T0 + timedelta(minutes=1), end=T0 + timedelta(minutes=2))
        assert [e.entry_id for e in store.read_feed(filled.id, query).entries] == [2, 3]

    def test_warmup_filter(self, store, filled):
        """Test the read-time warm-up drops early entries"""
        page = store.read_feed(filled.id, FeedQuery(warmup=60))
        assert [e.entry_id for e in page.entries] == [2, 3]

    def test_warmup_counts_from_first_reading(self, store, filled):
        """Test a window starting after the warm-up keeps every row in it"""
        windowed = FeedQuery(start=T0 + timedelta(minutes=1), warmup=60)
        page = store.read_feed(filled.id, windowed)
        assert [e.entry_id for e in page.entries] == [2, 3]
        assert stabilization_filter(page.entries, 60, origin=T0) == page.entries

        partial = FeedQuery(start=T0 + timedelta(minutes=1), warmup=90)
        assert [e.entry_id for e in store.read_feed(filled.id, partial).entries] == [3]

    def test_empty_channel(self, store):
        """Test an empty channel reads as an empty feed"""
        channel = store.create_channel("pond")
        assert store.read_feed(channel.id).entries == []
        assert store.last_entry(channel.id) is None
