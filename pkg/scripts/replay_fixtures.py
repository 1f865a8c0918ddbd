#!/usr/bin/env python3
"""Post the surveyed pond tables to a running service, one channel per pond.
Usage: python scripts/replay_fixtures.py --interval 150
Then: pondwatch verdict --channel-url http://localhost:8000/channels/<id>/feeds.json --pond <n>
"""
import argparse
import os
from datetime import timedelta

import requests

from app.services import fixtures
from app.services.channel_store import POND_FIELD_LABELS
from app.services.feed_export import format_timestamp
from app.services.feed_parser import FIELD_PARAMETERS

BASE_URL = os.environ.get("APP_URL", "http://localhost:8000")


def create_channel(pond_id):
    r = requests.post(
        f"{BASE_URL}/channels",
        json={"name": f"pond-{pond_id}", "field_labels": POND_FIELD_LABELS},
    )
    r.raise_for_status()
    return r.json()


def replay_pond(pond_id, interval):
    channel = create_channel(pond_id)
    samples = fixtures.fixture_samples(pond_id)
    start = fixtures.POND_SESSIONS[pond_id]
    count = max(len(values) for values in samples.values())
    for i in range(count):
        data = {
            "api_key": channel["write_key"],
            "created_at": format_timestamp(start + timedelta(seconds=i * interval)),
        }
        for index, parameter in FIELD_PARAMETERS.items():
            values = samples.get(parameter, [])
            if i < len(values):
                data[f"field{index}"] = repr(values[i])
        r = requests.post(f"{BASE_URL}/update", data=data)
        r.raise_for_status()
    return channel["id"], count


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--interval", type=int, default=150, help="seconds between readings")
    args = parser.parse_args()

    for pond_id in fixtures.POND_IDS:
        channel_id, count = replay_pond(pond_id, args.interval)
        print(f"Pond {pond_id}: {count} entries -> {BASE_URL}/channels/{channel_id}/feeds.json")


if __name__ == "__main__":
    main()
