from fastapi import Request

from app.services.channel_store import ChannelStore


def get_store(request: Request) -> ChannelStore:
    return request.app.state.store
