"""Wires store, orchestrator and gateway together; runs replay scripts.

A replay script is a header frame followed by one timed event per line::

    {"seed":42,"days":3,"start_users":["u1"], ...config keys...}
    {"at_tick":0,"event":{"type":"postback","event_id":"e1","user_id":"u1","ts":0,"action":"TOGGLE_SESSION"}}

Events at tick t are handled after t ticks have run, so a command at tick
t shows up in the snapshot of tick t+1.  Identical scripts and seeds give
byte-identical logs.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass
from pathlib import Path

from farmchat.config import AppConfig, load_app_config
from farmchat.errors import ParseError
from farmchat.gateway import Gateway
from farmchat.orchestrator import Orchestrator
from farmchat.protocol import (
    InboundEvent,
    OutboundMessage,
    decode_event,
    dumps_canonical,
    message_frame,
)
from farmchat.store import Store, Stream

log = logging.getLogger(__name__)


class Service:
    """One running chatbot instance. All entry points share one lock, so
    events are serialized with each other and with the tick loop."""

    def __init__(self, config: AppConfig, data_dir: str | Path, durable: bool = True):
        self.config = config
        self.store = Store(data_dir, durable=durable)
        self.orchestrator = Orchestrator(config, self.store)
        self.gateway = Gateway(
            handler=self.orchestrator.handle_event,
            recorder=self._record_outbound,
            allow_users=config.allow_users,
        )
        self.orchestrator.attach_gateway(self.gateway)
        self._lock = threading.RLock()

    def _record_outbound(self, msg: OutboundMessage) -> None:
        self.store.append(
            Stream.TRANSCRIPT,
            {"ts": self.orchestrator.clock.now, "frame": message_frame(msg)},
        )

    def handle_event(self, ev: InboundEvent) -> list[OutboundMessage]:
        with self._lock:
            return self.gateway.route_event(ev)

    def handle_raw_frame(self, raw: bytes | str) -> list[OutboundMessage]:
        ev = decode_event(raw)
        return self.handle_event(ev)

    def tick(self) -> None:
        with self._lock:
            self.orchestrator.tick()

    def poll(self, user_id: str) -> list[OutboundMessage]:
        with self._lock:
            return self.gateway.poll(user_id)

    def close(self) -> None:
        self.store.close()


@dataclass
class ReplayScript:
    header: dict
    events: list[tuple[int, InboundEvent]]

    @property
    def days(self) -> int:
        return int(self.header.get("days", 1))

    @property
    def start_users(self) -> list[str]:
        return list(self.header.get("start_users", []))


def load_replay_script(path: str | Path) -> ReplayScript:
    """Parse and validate a script file (header line, then timed events)."""
    lines = [
        line for line in Path(path).read_text(encoding="utf-8").splitlines() if line.strip()
    ]
    if not lines:
        raise ParseError(f"{path}: script is empty", index=0)
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: bad header: {exc}", index=1) from exc
    if not isinstance(header, dict) or "seed" not in header:
        raise ParseError(f"{path}: header must be an object with a 'seed'", index=1)

    events: list[tuple[int, InboundEvent]] = []
    last_tick = 0
    seen_event_ids: set[str] = set()
    last_ts_per_user: dict[str, int] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            entry = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: line {lineno}: {exc}", index=lineno) from exc
        if not isinstance(entry, dict) or "at_tick" not in entry or "event" not in entry:
            raise ParseError(
                f"{path}: line {lineno}: expected {{'at_tick':N,'event':{{...}}}}", index=lineno
            )
        at_tick = entry["at_tick"]
        if not isinstance(at_tick, int) or at_tick < 0:
            raise ParseError(f"{path}: line {lineno}: at_tick must be >= 0", index=lineno)
        if at_tick < last_tick:
            raise ParseError(f"{path}: line {lineno}: at_tick decreases", index=lineno)
        last_tick = at_tick
        ev = decode_event(json.dumps(entry["event"]))
        if ev.event_id in seen_event_ids:
            raise ParseError(f"{path}: line {lineno}: duplicate event_id '{ev.event_id}'", index=lineno)
        seen_event_ids.add(ev.event_id)
        if ev.ts < last_ts_per_user.get(ev.user_id, 0):
            raise ParseError(
                f"{path}: line {lineno}: ts decreases for user '{ev.user_id}'", index=lineno
            )
        last_ts_per_user[ev.user_id] = ev.ts
        events.append((at_tick, ev))
    return ReplayScript(header=header, events=events)


def config_from_script(script: ReplayScript, base_config: str | Path | None = None) -> AppConfig:
    """Header keys override the optional base config file."""
    overrides = {
        k: v for k, v in script.header.items() if k not in ("days", "start_users")
    }
    return load_app_config(base_config, overrides=overrides)


def run_replay(
    script: ReplayScript,
    data_dir: str | Path,
    base_config: str | Path | None = None,
    durable: bool = True,
) -> list[dict]:
    """Run the orchestrator over the scripted timeline.

    Returns the outbound transcript as frame dicts in emission order (the
    same order the store's transcript stream records them).
    """
    config = config_from_script(script, base_config)
    service = Service(config, data_dir, durable=durable)
    try:
        for user_id in script.start_users:
            service.orchestrator.activate_user(user_id)

        total_ticks = script.days * config.sim.ticks_per_day
        pending = list(script.events)
        for tick_index in range(total_ticks):
            while pending and pending[0][0] <= tick_index:
                _, ev = pending.pop(0)
                service.handle_event(ev)
            service.tick()
        for _, ev in pending:  # events scheduled at or past the final tick
            service.handle_event(ev)
        return [r.body["frame"] for r in service.store.all_records(Stream.TRANSCRIPT)]
    finally:
        service.close()


def write_transcript(frames: list[dict], out_path: str | Path) -> None:
    with open(out_path, "w", encoding="utf-8") as f:
        for frame in frames:
            f.write(dumps_canonical(frame) + "\n")
