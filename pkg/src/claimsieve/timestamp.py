"""UTC timestamps that honor SOURCE_DATE_EPOCH for reproducible runs."""

from __future__ import annotations

import os
from datetime import datetime, timezone


def utc_timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        return datetime.fromtimestamp(int(epoch), tz=timezone.utc).isoformat()
    return datetime.now(tz=timezone.utc).isoformat()
