"""Wire frames spoken between chat clients and the service.

One frame per line, canonical JSON: fixed key order, no extra whitespace,
non-ASCII characters kept raw (UTF-8).  Canonical encoding makes whole
transcripts byte-comparable, which is what the replay/golden-file tests
rely on.

Inbound frames (client -> service)::

    {"type":"message","event_id":S,"user_id":S,"ts":N,"text":S}
    {"type":"postback","event_id":S,"user_id":S,"ts":N,"action":S}

Outbound frames (service -> client)::

    {"type":"text","user_id":S,"text":S}
    {"type":"video","user_id":S,"url":S}
    {"type":"card","user_id":S,"card":{"title":S,"fields":[{"label":S,"value":S},...]}}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

from farmchat.errors import (
    InvariantViolation,
    MalformedFrame,
    MissingField,
    UnknownAction,
    UnknownEventType,
)


class EventKind(Enum):
    TEXT = "message"
    POSTBACK = "postback"


class MenuAction(Enum):
    """Rich-menu taps a client can send as postbacks. Closed enumeration."""

    TOGGLE_SESSION = "TOGGLE_SESSION"
    SHOW_MAIN = "SHOW_MAIN"
    SHOW_DRIP = "SHOW_DRIP"
    SHOW_MIST = "SHOW_MIST"
    SHOW_MONITOR = "SHOW_MONITOR"
    DRIP_ON = "DRIP_ON"
    DRIP_OFF = "DRIP_OFF"
    MIST_ON = "MIST_ON"
    MIST_OFF = "MIST_OFF"


class MessageKind(Enum):
    TEXT = "text"
    VIDEO = "video"
    CARD = "card"


@dataclass(frozen=True)
class InboundEvent:
    """A single decoded client event: free text or a menu postback."""

    event_id: str
    user_id: str
    ts: int
    kind: EventKind
    text: str | None = None
    action: MenuAction | None = None


@dataclass(frozen=True)
class Card:
    title: str
    fields: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class OutboundMessage:
    user_id: str
    kind: MessageKind
    text: str | None = None
    url: str | None = None
    card: Card | None = None


def text_message(user_id: str, text: str) -> OutboundMessage:
    return OutboundMessage(user_id=user_id, kind=MessageKind.TEXT, text=text)


def video_message(user_id: str, url: str) -> OutboundMessage:
    return OutboundMessage(user_id=user_id, kind=MessageKind.VIDEO, url=url)


def card_message(user_id: str, title: str, fields: list[tuple[str, str]]) -> OutboundMessage:
    return OutboundMessage(
        user_id=user_id, kind=MessageKind.CARD, card=Card(title=title, fields=tuple(fields))
    )


def dumps_canonical(obj: dict) -> str:
    """Serialize with no extra whitespace and insertion key order preserved."""
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False)


def _loads(raw: bytes | str) -> dict:
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedFrame(f"frame is not valid UTF-8: {exc}", field="frame") from exc
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise MalformedFrame(f"frame is not valid JSON: {exc}", field="frame") from exc
    if not isinstance(obj, dict):
        raise MalformedFrame("frame must be a JSON object", field="frame")
    return obj


def _require(obj: dict, key: str, typ: type) -> object:
    if key not in obj:
        raise MissingField(f"missing required field '{key}'", field=key)
    value = obj[key]
    # bool is an int subclass; never acceptable where an int is required
    if not isinstance(value, typ) or (typ is int and isinstance(value, bool)):
        raise MalformedFrame(f"field '{key}' must be {typ.__name__}", field=key)
    return value


def decode_event(raw: bytes | str) -> InboundEvent:
    """Decode one inbound frame; strict about unknown keys and enum values."""
    obj = _loads(raw)
    frame_type = _require(obj, "type", str)
    if frame_type not in (EventKind.TEXT.value, EventKind.POSTBACK.value):
        raise UnknownEventType(f"unknown event type '{frame_type}'", field="type")
    kind = EventKind(frame_type)

    event_id = _require(obj, "event_id", str)
    user_id = _require(obj, "user_id", str)
    ts = _require(obj, "ts", int)

    allowed = {"type", "event_id", "user_id", "ts"}
    allowed.add("text" if kind is EventKind.TEXT else "action")
    for key in obj:
        if key not in allowed:
            raise MalformedFrame(f"unexpected field '{key}' for {frame_type} frame", field=key)

    if kind is EventKind.TEXT:
        text = _require(obj, "text", str)
        return InboundEvent(event_id=event_id, user_id=user_id, ts=ts, kind=kind, text=text)

    action_name = _require(obj, "action", str)
    try:
        action = MenuAction(action_name)
    except ValueError:
        raise UnknownAction(f"unknown action '{action_name}'", field="action") from None
    return InboundEvent(event_id=event_id, user_id=user_id, ts=ts, kind=kind, action=action)


def validate_event(ev: InboundEvent) -> None:
    if ev.kind is EventKind.TEXT:
        if ev.text is None or ev.action is not None:
            raise InvariantViolation("TEXT event must carry text and no action")
    else:
        if ev.action is None or ev.text is not None:
            raise InvariantViolation("POSTBACK event must carry an action and no text")
    if ev.ts < 0:
        raise InvariantViolation("event ts must be non-negative")


def encode_event(ev: InboundEvent) -> bytes:
    """Encode an inbound event as its canonical frame."""
    validate_event(ev)
    frame: dict = {
        "type": ev.kind.value,
        "event_id": ev.event_id,
        "user_id": ev.user_id,
        "ts": ev.ts,
    }
    if ev.kind is EventKind.TEXT:
        frame["text"] = ev.text
    else:
        frame["action"] = ev.action.value
    return dumps_canonical(frame).encode("utf-8")


def validate_message(msg: OutboundMessage) -> None:
    payloads = {
        MessageKind.TEXT: msg.text,
        MessageKind.VIDEO: msg.url,
        MessageKind.CARD: msg.card,
    }
    for kind, payload in payloads.items():
        if kind is msg.kind:
            if payload is None:
                raise InvariantViolation(f"{msg.kind.name} message is missing its payload")
        elif payload is not None:
            raise InvariantViolation(
                f"{msg.kind.name} message must not carry a {kind.name} payload"
            )
    if msg.kind is MessageKind.TEXT and not msg.text:
        raise InvariantViolation("TEXT message must not be empty")
    if msg.kind is MessageKind.VIDEO and not msg.url:
        raise InvariantViolation("VIDEO message must carry a non-empty url")
    if msg.kind is MessageKind.CARD:
        if not msg.card.title:
            raise InvariantViolation("CARD message must carry a non-empty title")
        if len(msg.card.fields) < 1:
            raise InvariantViolation("CARD message must carry at least one field")


def message_frame(msg: OutboundMessage) -> dict:
    """Outbound frame as a dict in canonical key order."""
    validate_message(msg)
    frame: dict = {"type": msg.kind.value, "user_id": msg.user_id}
    if msg.kind is MessageKind.TEXT:
        frame["text"] = msg.text
    elif msg.kind is MessageKind.VIDEO:
        frame["url"] = msg.url
    else:
        frame["card"] = {
            "title": msg.card.title,
            "fields": [{"label": label, "value": value} for label, value in msg.card.fields],
        }
    return frame


def encode_message(msg: OutboundMessage) -> bytes:
    return dumps_canonical(message_frame(msg)).encode("utf-8")


def decode_message(raw: bytes | str) -> OutboundMessage:
    """Decode one outbound frame (used by tests and transcript tooling)."""
    obj = _loads(raw)
    frame_type = _require(obj, "type", str)
    try:
        kind = MessageKind(frame_type)
    except ValueError:
        raise UnknownEventType(f"unknown message type '{frame_type}'", field="type") from None
    user_id = _require(obj, "user_id", str)

    payload_key = {MessageKind.TEXT: "text", MessageKind.VIDEO: "url", MessageKind.CARD: "card"}
    allowed = {"type", "user_id", payload_key[kind]}
    for key in obj:
        if key not in allowed:
            raise MalformedFrame(f"unexpected field '{key}' for {frame_type} frame", field=key)

    if kind is MessageKind.TEXT:
        return text_message(user_id, str(_require(obj, "text", str)))
    if kind is MessageKind.VIDEO:
        return video_message(user_id, str(_require(obj, "url", str)))

    card_obj = _require(obj, "card", dict)
    title = _require(card_obj, "title", str)
    raw_fields = _require(card_obj, "fields", list)
    fields = []
    for item in raw_fields:
        if not isinstance(item, dict):
            raise MalformedFrame("card fields must be objects", field="fields")
        fields.append((str(_require(item, "label", str)), str(_require(item, "value", str))))
    msg = card_message(user_id, str(title), fields)
    validate_message(msg)
    return msg
