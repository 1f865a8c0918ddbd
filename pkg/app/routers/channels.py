from datetime import datetime
from typing import List, Optional

from fastapi import APIRouter, Depends, HTTPException, Query, status
from fastapi.responses import Response

from app.errors import NotFoundError, ValidationError
from app.routers import get_store
from app.schemas import (
    ChannelCreate,
    ChannelCreated,
    ChannelResponse,
    FeedEntrySchema,
    FeedQuery,
)
from app.services.channel_store import ChannelStore
from app.services.feed_export import EXPORT_FORMATS, MEDIA_TYPES, FeedExporter

router = APIRouter(prefix="/channels", tags=["channels"])

MAX_RESULTS = 8000


@router.post("", response_model=ChannelCreated)
def create_channel(channel_data: ChannelCreate, store: ChannelStore = Depends(get_store)):
    """Create a channel; the write key is only returned here"""

    try:
        return store.create_channel(channel_data.name, channel_data.field_labels)
    except ValidationError as exc:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(exc))


@router.get("", response_model=List[ChannelResponse])
def list_channels(store: ChannelStore = Depends(get_store)):
    """List all channels"""

    return store.list_channels()


@router.get("/{channel_id}", response_model=ChannelResponse)
def get_channel(channel_id: int, store: ChannelStore = Depends(get_store)):
    """Get a channel's metadata"""

    try:
        return store.get_channel(channel_id)
    except NotFoundError:
        raise HTTPException(
            status_code=status.HTTP_404_NOT_FOUND, detail="Channel not found"
        )


@router.get("/{channel_id}/feeds/last.json", response_model=Optional[FeedEntrySchema])
def get_last_entry(channel_id: int, store: ChannelStore = Depends(get_store)):
    """Get the newest entry of a channel, or null when the feed is empty"""

    try:
        return store.last_entry(channel_id)
    except NotFoundError:
        raise HTTPException(
            status_code=status.HTTP_404_NOT_FOUND, detail="Channel not found"
        )


def _export(
    store: ChannelStore,
    channel_id: int,
    fmt: str,
    results: int,
    start: Optional[datetime],
    end: Optional[datetime],
    warmup: Optional[int],
    field: Optional[int] = None,
) -> Response:
    fmt = fmt.lower()
    if fmt not in EXPORT_FORMATS:
        raise HTTPException(
            status_code=status.HTTP_400_BAD_REQUEST,
            detail=f"Unsupported format: {fmt}",
        )
    try:
        query = FeedQuery(
            results=min(results, MAX_RESULTS),
            start=start,
            end=end,
            field=field,
            warmup=warmup,
        )
        page = store.read_feed(channel_id, query)
    except NotFoundError:
        raise HTTPException(
            status_code=status.HTTP_404_NOT_FOUND, detail="Channel not found"
        )
    except (ValidationError, ValueError) as exc:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(exc))

    return Response(content=FeedExporter.export(page, fmt), media_type=MEDIA_TYPES[fmt])


@router.get("/{channel_id}/feeds.{fmt}")
def export_feed(
    channel_id: int,
    fmt: str,
    results: int = Query(100, ge=1),
    start: Optional[datetime] = None,
    end: Optional[datetime] = None,
    warmup: Optional[int] = Query(None, ge=0),
    store: ChannelStore = Depends(get_store),
):
    """Export the most recent entries of a channel as CSV, JSON or XML"""

    return _export(store, channel_id, fmt, results, start, end, warmup)


@router.get("/{channel_id}/fields/{field}.{fmt}")
def export_field(
    channel_id: int,
    field: int,
    fmt: str,
    results: int = Query(100, ge=1),
    start: Optional[datetime] = None,
    end: Optional[datetime] = None,
    warmup: Optional[int] = Query(None, ge=0),
    store: ChannelStore = Depends(get_store),
):
    """Export a single field of a channel"""

    return _export(store, channel_id, fmt, results, start, end, warmup, field)
