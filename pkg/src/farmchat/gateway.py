"""Routes decoded inbound events to the orchestrator and fans replies out.

The gateway never drops traffic: a handler error becomes an apology text
plus an internal error record, and messages for offline users queue until
their next poll.  Everything outbound is recorded to the transcript in
generation order, which is the ordering the golden-file tests pin down.
"""

from __future__ import annotations

import logging
from collections import deque
from typing import Callable, Iterable, NamedTuple

from farmchat.errors import InvariantViolation, UnknownUser
from farmchat.protocol import InboundEvent, OutboundMessage, text_message, validate_message

log = logging.getLogger(__name__)

APOLOGY_TEXT = "Sorry, something went wrong handling that. Please try again."


class DeliveryReceipt(NamedTuple):
    delivered: int
    queued: int


class Gateway:
    """Fan-in/fan-out hub between the wire and the orchestrator.

    ``handler`` turns one event into its reply batch.  ``recorder`` (if set)
    is called once per outbound message, in order, to persist transcripts.
    A subscriber registered for a user receives pushes immediately;
    otherwise they queue for the next ``poll``.
    """

    def __init__(
        self,
        handler: Callable[[InboundEvent], list[OutboundMessage]],
        recorder: Callable[[OutboundMessage], None] | None = None,
        allow_users: Iterable[str] = (),
    ):
        self._handler = handler
        self._recorder = recorder
        self._queues: dict[str, deque[OutboundMessage]] = {}
        self._subscribers: dict[str, Callable[[OutboundMessage], None]] = {}
        self._seen: set[str] = set(allow_users)
        self.errors: list[dict] = []

    def _record(self, msg: OutboundMessage) -> None:
        if self._recorder is not None:
            self._recorder(msg)

    def route_event(self, ev: InboundEvent) -> list[OutboundMessage]:
        """Handle one event and return its reply batch (always >= 1 message)."""
        self._seen.add(ev.user_id)
        try:
            replies = self._handler(ev)
        except Exception as exc:  # noqa: BLE001 - a bad handler must not drop events
            self.errors.append({"event_id": ev.event_id, "user_id": ev.user_id, "error": repr(exc)})
            log.error("handler failed for event %s: %r", ev.event_id, exc)
            replies = []
        if not replies:
            replies = [text_message(ev.user_id, APOLOGY_TEXT)]
        for msg in replies:
            self._record(msg)
        return replies

    def push(self, user_id: str, msgs: list[OutboundMessage]) -> DeliveryReceipt:
        """Deliver or queue server-initiated messages for one user."""
        if not msgs:
            raise InvariantViolation("push requires at least one message")
        if user_id not in self._seen:
            raise UnknownUser(f"user '{user_id}' has never been seen and is not allowlisted")
        for msg in msgs:
            validate_message(msg)
        delivered = 0
        queued = 0
        subscriber = self._subscribers.get(user_id)
        for msg in msgs:
            self._record(msg)
            if subscriber is not None:
                subscriber(msg)
                delivered += 1
            else:
                self._queues.setdefault(user_id, deque()).append(msg)
                queued += 1
        return DeliveryReceipt(delivered=delivered, queued=queued)

    def poll(self, user_id: str) -> list[OutboundMessage]:
        """Drain and return everything queued for ``user_id``."""
        queue = self._queues.get(user_id)
        if not queue:
            return []
        drained = list(queue)
        queue.clear()
        return drained

    def pending(self, user_id: str) -> int:
        return len(self._queues.get(user_id, ()))

    def cancel_queued(self, user_id: str) -> int:
        """Discard a user's queue (on session stop); returns how many dropped."""
        queue = self._queues.pop(user_id, None)
        return len(queue) if queue else 0

    def subscribe(self, user_id: str, fn: Callable[[OutboundMessage], None]) -> None:
        self._seen.add(user_id)
        self._subscribers[user_id] = fn

    def unsubscribe(self, user_id: str) -> None:
        self._subscribers.pop(user_id, None)

    def mark_seen(self, user_id: str) -> None:
        self._seen.add(user_id)
