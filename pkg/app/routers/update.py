import logging
from datetime import datetime
from typing import Dict

from fastapi import APIRouter, Depends, Request, status
from fastapi.responses import PlainTextResponse
from starlette.concurrency import run_in_threadpool

from app.errors import AuthenticationError, ValidationError
from app.models import MAX_FIELDS
from app.routers import get_store
from app.services.channel_store import ChannelStore

logger = logging.getLogger(__name__)

router = APIRouter(tags=["update"])

_FORM_TYPES = ("application/x-www-form-urlencoded", "multipart/form-data")


def _failure(status_code: int) -> PlainTextResponse:
    return PlainTextResponse("0", status_code=status_code)


@router.api_route("/update", methods=["GET", "POST"], response_class=PlainTextResponse)
async def write_update(request: Request, store: ChannelStore = Depends(get_store)):
    """Append one feed entry; answers the new entry id, or "0" on failure"""

    params: Dict[str, str] = dict(request.query_params)
    if request.headers.get("content-type", "").startswith(_FORM_TYPES):
        form = await request.form()
        params.update({key: str(value) for key, value in form.items()})

    api_key = params.get("api_key")
    if not api_key:
        logger.warning("rejected write: missing api_key")
        return _failure(status.HTTP_401_UNAUTHORIZED)

    try:
        field_values = {
            index: float(params[f"field{index}"])
            for index in range(1, MAX_FIELDS + 1)
            if params.get(f"field{index}", "") != ""
        }
        timestamp = (
            datetime.fromisoformat(params["created_at"].replace("Z", "+00:00"))
            if params.get("created_at")
            else None
        )
    except ValueError as exc:
        logger.warning("rejected write: %s", exc)
        return _failure(status.HTTP_400_BAD_REQUEST)

    try:
        entry_id = await run_in_threadpool(
            store.write_update, api_key, field_values, timestamp
        )
    except AuthenticationError:
        return _failure(status.HTTP_401_UNAUTHORIZED)
    except ValidationError as exc:
        logger.warning("rejected write: %s", exc)
        return _failure(status.HTTP_400_BAD_REQUEST)

    return PlainTextResponse(str(entry_id))
