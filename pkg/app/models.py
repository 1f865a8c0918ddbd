from sqlalchemy import (
    JSON,
    Column,
    DateTime,
    Float,
    ForeignKey,
    Integer,
    String,
    UniqueConstraint,
)

from app.database import Base

MAX_FIELDS = 8


class Channel(Base):
    __tablename__ = "channels"

    id = Column(Integer, primary_key=True, index=True)
    name = Column(String(255), nullable=False)
    field_labels = Column(JSON, nullable=False)  # ordered, 1..8 labels
    write_key = Column(String(64), unique=True, index=True, nullable=False)
    created_at = Column(DateTime, nullable=False)  # naive UTC


class FeedEntry(Base):
    """One appended row of a channel feed; rows are never updated."""

    __tablename__ = "feed_entries"
    __table_args__ = (UniqueConstraint("channel_id", "entry_id"),)

    id = Column(Integer, primary_key=True)
    channel_id = Column(Integer, ForeignKey("channels.id"), index=True, nullable=False)
    entry_id = Column(Integer, nullable=False)
    created_at = Column(DateTime, nullable=False, index=True)  # naive UTC, whole seconds
    field1 = Column(Float)
    field2 = Column(Float)
    field3 = Column(Float)
    field4 = Column(Float)
    field5 = Column(Float)
    field6 = Column(Float)
    field7 = Column(Float)
    field8 = Column(Float)
