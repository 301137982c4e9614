"""Append-only persistence: one JSON frame per line, one file per stream.

No database; the four log files are the system of record and double as
human-inspectable golden transcripts.  Sequence numbers are implicit line
numbers, so recovery after a crash is just "keep every complete line and
drop a torn tail".
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import IO

from farmchat.errors import BadRange, CorruptFile, IoFailure, SchemaMismatch
from farmchat.protocol import dumps_canonical

log = logging.getLogger(__name__)


class Stream(Enum):
    SESSIONS = "sessions"
    TELEMETRY = "telemetry"
    TRANSCRIPT = "transcript"
    AUDIT = "audit"

    @property
    def filename(self) -> str:
        return f"{self.value}.log"


@dataclass(frozen=True)
class Record:
    stream: Stream
    seq: int
    body: dict


# Every stream's body carries a ts so time-range queries work uniformly.
_REQUIRED_KEYS = {
    Stream.SESSIONS: ("ts", "user_id", "active"),
    Stream.TELEMETRY: ("ts", "air_temp", "rel_humidity", "soil_moisture", "light"),
    Stream.TRANSCRIPT: ("ts", "frame"),
    Stream.AUDIT: ("ts", "user_id", "target", "desired", "changed"),
}


def validate_body(stream: Stream, body: dict) -> None:
    if not isinstance(body, dict):
        raise SchemaMismatch(f"{stream.value} body must be an object")
    for key in _REQUIRED_KEYS[stream]:
        if key not in body:
            raise SchemaMismatch(f"{stream.value} body is missing '{key}'")


class Store:
    """Single-writer append log over ``data_dir`` with in-memory indexes.

    ``recover()`` runs on construction: complete records are loaded, a torn
    trailing line is dropped with a warning, and a malformed line anywhere
    else raises CorruptFile.
    """

    def __init__(self, data_dir: str | Path, durable: bool = True):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._durable = durable
        self._records: dict[Stream, list[Record]] = {s: [] for s in Stream}
        self._handles: dict[Stream, IO[str]] = {}
        self.recover()

    def path(self, stream: Stream) -> Path:
        return self.data_dir / stream.filename

    def recover(self) -> dict[Stream, int]:
        """Rebuild in-memory indexes from disk; returns records kept per stream."""
        counts: dict[Stream, int] = {}
        for stream in Stream:
            records: list[Record] = []
            path = self.path(stream)
            if path.exists():
                raw_lines = path.read_text(encoding="utf-8").split("\n")
                if raw_lines and raw_lines[-1] == "":
                    raw_lines.pop()
                for i, line in enumerate(raw_lines):
                    body = None
                    try:
                        body = json.loads(line)
                    except json.JSONDecodeError:
                        pass
                    if not isinstance(body, dict):
                        if i == len(raw_lines) - 1:
                            log.warning(
                                "%s: dropping torn trailing record at line %d", path, i + 1
                            )
                            break
                        raise CorruptFile(f"{path}: malformed record at line {i + 1}")
                    records.append(Record(stream=stream, seq=i + 1, body=body))
            self._records[stream] = records
            counts[stream] = len(records)
        return counts

    def last_seq(self, stream: Stream) -> int:
        return len(self._records[stream])

    def _handle(self, stream: Stream) -> IO[str]:
        handle = self._handles.get(stream)
        if handle is None:
            handle = open(self.path(stream), "a", encoding="utf-8")
            self._handles[stream] = handle
        return handle

    def append(self, stream: Stream, body: dict) -> int:
        """Write one record; durable before returning the new seq."""
        validate_body(stream, body)
        line = dumps_canonical(body)
        try:
            handle = self._handle(stream)
            handle.write(line + "\n")
            handle.flush()
            if self._durable:
                os.fsync(handle.fileno())
        except OSError as exc:
            raise IoFailure(f"append to {stream.value} failed: {exc}") from exc
        seq = self.last_seq(stream) + 1
        self._records[stream].append(Record(stream=stream, seq=seq, body=body))
        return seq

    def query(self, stream: Stream, from_ts: int, to_ts: int) -> list[Record]:
        """Records with ts in the closed interval [from_ts, to_ts], seq order."""
        if from_ts > to_ts:
            raise BadRange(f"from_ts {from_ts} exceeds to_ts {to_ts}")
        return [r for r in self._records[stream] if from_ts <= r.body.get("ts", 0) <= to_ts]

    def all_records(self, stream: Stream) -> list[Record]:
        return list(self._records[stream])

    def close(self) -> None:
        for handle in self._handles.values():
            handle.close()
        self._handles.clear()

    def __enter__(self) -> "Store":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
