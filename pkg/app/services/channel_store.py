import logging
import math
import secrets
import threading
from datetime import datetime, timedelta, timezone
from typing import Dict, List, Mapping, Optional, Sequence, TypeVar

from sqlalchemy import func, select
from sqlalchemy.orm import Session, sessionmaker

from app.errors import AuthenticationError, NotFoundError, ValidationError
from app.models import MAX_FIELDS, Channel, FeedEntry
from app.schemas import (
    ChannelCreated,
    ChannelResponse,
    FeedEntrySchema,
    FeedPage,
    FeedQuery,
)

logger = logging.getLogger(__name__)

DEFAULT_FIELD_LABELS = ["Turbidity", "Temperature", "PH", "Depth"]
POND_FIELD_LABELS = DEFAULT_FIELD_LABELS + ["Conductivity"]
DEFAULT_WARMUP_S = 180

Entry = TypeVar("Entry")


def to_utc_second(moment: datetime) -> datetime:
    """Aware UTC datetime truncated to whole seconds; naive input is taken as UTC."""
    if moment.tzinfo is None:
        moment = moment.replace(tzinfo=timezone.utc)
    return moment.astimezone(timezone.utc).replace(microsecond=0)


def _naive(moment: datetime) -> datetime:
    return to_utc_second(moment).replace(tzinfo=None)


def stabilization_filter(
    entries: Sequence[Entry],
    warmup_s: int = DEFAULT_WARMUP_S,
    origin: Optional[datetime] = None,
) -> List[Entry]:
    """
    Drop entries recorded before the circuit settled: the first warmup_s seconds.

    The clock starts at `origin`, or at the first entry when no origin is given.
    With a fixed origin the filter is idempotent.
    """
    if not entries:
        return []
    start = origin if origin is not None else entries[0].created_at
    cutoff = start + timedelta(seconds=warmup_s)
    return [entry for entry in entries if entry.created_at >= cutoff]


class ChannelStore:
    """
    Channels and their append-only feeds.

    Writes to one channel go through that channel's lock, so entry ids stay
    dense under concurrent writers. The last entry id of every channel is
    cached in memory and rebuilt from the database when the store opens.
    """

    def __init__(self, session_factory: sessionmaker):
        self._sessions = session_factory
        self._guard = threading.Lock()
        self._locks: Dict[int, threading.Lock] = {}
        self._last_ids: Dict[int, int] = {}
        self._rebuild_index()

    def _rebuild_index(self) -> None:
        with self._sessions() as db:
            rows = db.execute(
                select(FeedEntry.channel_id, func.max(FeedEntry.entry_id)).group_by(
                    FeedEntry.channel_id
                )
            ).all()
        self._last_ids = {channel_id: last for channel_id, last in rows}

    def _lock_for(self, channel_id: int) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(channel_id, threading.Lock())

    def _channel_response(self, channel: Channel) -> ChannelResponse:
        return ChannelResponse(
            id=channel.id,
            name=channel.name,
            field_labels=list(channel.field_labels),
            created_at=to_utc_second(channel.created_at),
            last_entry_id=self._last_ids.get(channel.id),
        )

    @staticmethod
    def _get(db: Session, channel_id: int) -> Channel:
        channel = db.get(Channel, channel_id)
        if channel is None:
            raise NotFoundError(f"channel {channel_id} not found")
        return channel

    def create_channel(
        self, name: str, field_labels: Optional[Sequence[str]] = None
    ) -> ChannelCreated:
        labels = list(DEFAULT_FIELD_LABELS if field_labels is None else field_labels)
        if not 1 <= len(labels) <= MAX_FIELDS:
            raise ValidationError(f"a channel needs 1 to {MAX_FIELDS} field labels")
        if not name:
            raise ValidationError("channel name must not be empty")

        with self._sessions() as db:
            channel = Channel(
                name=name,
                field_labels=labels,
                write_key=secrets.token_hex(8).upper(),
                created_at=_naive(datetime.now(timezone.utc)),
            )
            db.add(channel)
            db.commit()
            db.refresh(channel)
            logger.info("created channel %s (%r, %d fields)", channel.id, name, len(labels))
            return ChannelCreated(
                **self._channel_response(channel).model_dump(), write_key=channel.write_key
            )

    def list_channels(self) -> List[ChannelResponse]:
        with self._sessions() as db:
            channels = db.scalars(select(Channel).order_by(Channel.id)).all()
            return [self._channel_response(channel) for channel in channels]

    def get_channel(self, channel_id: int) -> ChannelResponse:
        with self._sessions() as db:
            return self._channel_response(self._get(db, channel_id))

    def write_update(
        self,
        write_key: str,
        field_values: Mapping[int, float],
        timestamp: Optional[datetime] = None,
    ) -> int:
        """Append one entry and return its entry id."""
        with self._sessions() as db:
            channel = db.scalars(
                select(Channel).where(Channel.write_key == write_key)
            ).first()
            if channel is None:
                logger.warning("rejected write: unknown write key")
                raise AuthenticationError("unknown write key")
            channel_id, field_count = channel.id, len(channel.field_labels)

        if not field_values:
            raise ValidationError("an update needs at least one field value")
        values: Dict[int, float] = {}
        for index, value in field_values.items():
            if not 1 <= int(index) <= field_count:
                raise ValidationError(
                    f"field{index} is outside channel {channel_id}'s {field_count} fields"
                )
            value = float(value)
            if not math.isfinite(value):
                raise ValidationError(f"field{index} value must be finite")
            values[int(index)] = value

        created_at = _naive(timestamp or datetime.now(timezone.utc))
        with self._lock_for(channel_id):
            entry_id = self._last_ids.get(channel_id, 0) + 1
            with self._sessions() as db:
                db.add(
                    FeedEntry(
                        channel_id=channel_id,
                        entry_id=entry_id,
                        created_at=created_at,
                        **{f"field{index}": value for index, value in values.items()},
                    )
                )
                db.commit()
            self._last_ids[channel_id] = entry_id
        return entry_id

    def read_feed(self, channel_id: int, query: Optional[FeedQuery] = None) -> FeedPage:
        query = query or FeedQuery()
        with self._sessions() as db:
            channel = self._get(db, channel_id)
            field_count = len(channel.field_labels)
            if query.field is not None and query.field > field_count:
                raise ValidationError(f"channel {channel_id} has no field{query.field}")
            fields = [query.field] if query.field else list(range(1, field_count + 1))

            statement = select(FeedEntry).where(FeedEntry.channel_id == channel_id)
            if query.start is not None:
                statement = statement.where(FeedEntry.created_at >= _naive(query.start))
            if query.end is not None:
                statement = statement.where(FeedEntry.created_at <= _naive(query.end))
            rows = db.scalars(statement.order_by(FeedEntry.entry_id)).all()

            entries = [
                FeedEntrySchema(
                    entry_id=row.entry_id,
                    created_at=to_utc_second(row.created_at),
                    field_values={index: getattr(row, f"field{index}") for index in fields},
                )
                for row in rows
            ]
            if query.warmup and entries:
                # the warm-up clock starts at the channel's first reading, not the window's
                first_seen = db.scalar(
                    select(func.min(FeedEntry.created_at)).where(
                        FeedEntry.channel_id == channel_id
                    )
                )
                entries = stabilization_filter(
                    entries, query.warmup, origin=to_utc_second(first_seen)
                )
            return FeedPage(
                channel=self._channel_response(channel),
                field_indices=fields,
                entries=entries[-query.results:],
            )

    def last_entry(self, channel_id: int) -> Optional[FeedEntrySchema]:
        page = self.read_feed(channel_id, FeedQuery(results=1))
        return page.entries[-1] if page.entries else None
