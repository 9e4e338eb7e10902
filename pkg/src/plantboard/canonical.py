"""Canonical JSON and timestamp helpers shared by every module.

Canonical serialization is byte-stable: sorted keys, no whitespace, raw
UTF-8, sets emitted as sorted arrays, timestamps as RFC 3339 strings with
microsecond precision and a trailing Z.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from typing import Any

UTC = timezone.utc


def canonical_dumps(value: Any) -> str:
    """Serialize to the byte-stable canonical JSON form."""
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def format_timestamp(moment: datetime) -> str:
    """RFC 3339 with microseconds and Z suffix; input must be timezone-aware."""
    if moment.tzinfo is None:
        raise ValueError("timestamps must be timezone-aware")
    return moment.astimezone(UTC).isoformat(timespec="microseconds").replace("+00:00", "Z")


def parse_timestamp(raw: str) -> datetime:
    """Parse an RFC 3339 timestamp into an aware UTC datetime."""
    if not isinstance(raw, str) or not raw:
        raise ValueError(f"expected RFC 3339 timestamp, got {raw!r}")
    text = raw[:-1] + "+00:00" if raw.endswith("Z") else raw
    parsed = datetime.fromisoformat(text)
    if parsed.tzinfo is None:
        raise ValueError(f"timestamp must carry an offset: {raw!r}")
    return parsed.astimezone(UTC)


def utc_now() -> datetime:
    return datetime.now(UTC)


def sorted_list(values) -> list:
    """Sets and other unordered collections serialize as sorted arrays."""
    return sorted(values)
