"""Session handling, the simulate/evaluate/push tick loop, and intent answers.

The orchestrator owns all mutable state: sessions, the simulated field,
actuator switches, rule streaks, and the clock.  Time advances only via
``tick()``; inbound events are handled between ticks, which is what makes
replay runs byte-reproducible.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

from farmchat.config import AppConfig
from farmchat.errors import FarmchatError, SessionInactive, ValidationError
from farmchat.gateway import Gateway
from farmchat.intents import EmptyUtterance, MatchOutcome, MatchResult, match_intent
from farmchat.protocol import (
    InboundEvent,
    EventKind,
    MenuAction,
    OutboundMessage,
    card_message,
    text_message,
    video_message,
)
from farmchat.rules import SensorSnapshot, evaluate
from farmchat.simulation import ActuatorState, Switch, initial_state, step, weather_forecast
from farmchat.store import Store, Stream

log = logging.getLogger(__name__)

SECONDS_PER_DAY = 86_400

WELCOME_TEXT = "Welcome! Your field assistant session is active. Use the menu below or type a question."
FAREWELL_TEXT = "Session stopped. You will not receive further updates. Tap START/STOP to resume."
START_PROMPT_TEXT = "Your session is not active. Tap START/STOP to begin."
EMPTY_QUESTION_TEXT = 'Please type a question, for example "weather forecast".'
WEED_REMINDER_TEXT = "Scheduled weed control: walk the beds and remove emerging weeds before they seed."

_COMMANDS: dict[MenuAction, tuple[str, Switch]] = {
    MenuAction.DRIP_ON: ("DRIP", Switch.ON),
    MenuAction.DRIP_OFF: ("DRIP", Switch.OFF),
    MenuAction.MIST_ON: ("MIST", Switch.ON),
    MenuAction.MIST_OFF: ("MIST", Switch.OFF),
}

_TARGET_LABEL = {"DRIP": "Drip irrigation", "MIST": "Mist irrigation"}


class Page:
    MAIN = "MAIN"
    DRIP = "DRIP"
    MIST = "MIST"
    MONITOR = "MONITOR"


@dataclass
class Session:
    user_id: str
    active: bool = False
    started_at: int = 0
    last_page: str = Page.MAIN


@dataclass
class Clock:
    now: int
    tick_index: int = 0
    briefing_seconds: int = 6 * 3600
    tz_offset: int = 0  # minutes

    def local_now(self) -> int:
        return self.now + self.tz_offset * 60

    def local_day(self) -> int:
        return self.local_now() // SECONDS_PER_DAY


class Orchestrator:
    def __init__(self, config: AppConfig, store: Store):
        self.config = config
        self.store = store
        self.sim = config.sim
        self.registry = config.registry
        self.ruleset = config.ruleset
        self.playlist = config.playlist
        self.sessions: dict[str, Session] = {}
        self.field = initial_state(self.sim)
        self.actuators = ActuatorState()
        self.rule_state: dict = {}
        self.clock = Clock(
            now=config.start_ts,
            briefing_seconds=config.briefing_seconds,
            tz_offset=config.tz_offset,
        )
        self._start_ts = config.start_ts
        self._last_briefing_day: int | None = None
        self._last_weed_day: int | None = None
        self._gateway: Gateway | None = None
        self._handlers = {
            "WEATHER_FORECAST": self._answer_weather,
            "FIELD_STATUS": self._answer_status,
            "HELP": self._answer_help,
            "CROP_KNOWLEDGE": self._answer_knowledge,
        }
        for intent in self.registry:
            if intent.handler not in self._handlers:
                raise ValidationError(f"intent '{intent.name}' has no handler implementation")
        self._restore_sessions()

    def attach_gateway(self, gateway: Gateway) -> None:
        self._gateway = gateway
        for user_id, sess in self.sessions.items():
            if sess.active:
                gateway.mark_seen(user_id)

    def _restore_sessions(self) -> None:
        for record in self.store.all_records(Stream.SESSIONS):
            body = record.body
            sess = self.sessions.setdefault(body["user_id"], Session(user_id=body["user_id"]))
            sess.active = bool(body["active"])
            if sess.active:
                sess.started_at = int(body["ts"])

    # -- event entry point -------------------------------------------------

    def handle_event(self, ev: InboundEvent) -> list[OutboundMessage]:
        if ev.kind is EventKind.POSTBACK:
            return self.handle_action(ev.user_id, ev.action)
        if not self._is_active(ev.user_id):
            return [text_message(ev.user_id, START_PROMPT_TEXT)]
        try:
            result = match_intent(ev.text, self.registry)
        except EmptyUtterance:
            return [text_message(ev.user_id, EMPTY_QUESTION_TEXT)]
        return self.answer_intent(ev.user_id, result)

    # -- sessions ----------------------------------------------------------

    def _is_active(self, user_id: str) -> bool:
        sess = self.sessions.get(user_id)
        return sess is not None and sess.active

    def active_users(self) -> list[str]:
        return sorted(u for u, s in self.sessions.items() if s.active)

    def toggle_session(self, user_id: str) -> Session:
        sess = self.sessions.setdefault(user_id, Session(user_id=user_id))
        sess.active = not sess.active
        if sess.active:
            sess.started_at = self.clock.now
            sess.last_page = Page.MAIN
        elif self._gateway is not None:
            dropped = self._gateway.cancel_queued(user_id)
            if dropped:
                log.info("dropped %d queued messages for stopped user %s", dropped, user_id)
        self.store.append(
            Stream.SESSIONS, {"ts": self.clock.now, "user_id": user_id, "active": sess.active}
        )
        return sess

    def activate_user(self, user_id: str) -> Session:
        """Start a session without emitting chat traffic (replay pre-start)."""
        if not self._is_active(user_id):
            self.toggle_session(user_id)
        if self._gateway is not None:
            self._gateway.mark_seen(user_id)
        return self.sessions[user_id]

    # -- menu actions -------------------------------------------------------

    def handle_action(self, user_id: str, action: MenuAction) -> list[OutboundMessage]:
        if action is MenuAction.TOGGLE_SESSION:
            sess = self.toggle_session(user_id)
            if sess.active:
                return [text_message(user_id, WELCOME_TEXT), self._main_card(user_id)]
            return [text_message(user_id, FAREWELL_TEXT)]

        if not self._is_active(user_id):
            return [text_message(user_id, START_PROMPT_TEXT)]
        sess = self.sessions[user_id]

        if action is MenuAction.SHOW_MAIN:
            sess.last_page = Page.MAIN
            return [self._main_card(user_id)]
        if action is MenuAction.SHOW_DRIP:
            sess.last_page = Page.DRIP
            return [self._irrigation_card(user_id, "DRIP")]
        if action is MenuAction.SHOW_MIST:
            sess.last_page = Page.MIST
            return [self._irrigation_card(user_id, "MIST")]
        if action is MenuAction.SHOW_MONITOR:
            sess.last_page = Page.MONITOR
            return [self.status_card(user_id)]

        target, desired = _COMMANDS[action]
        _, changed = self.apply_command(user_id, target, desired)
        label = _TARGET_LABEL[target]
        verb = "now" if changed else "already"
        return [text_message(user_id, f"{label} is {verb} {desired.value}.")]

    def apply_command(
        self, user_id: str, target: str, desired: Switch
    ) -> tuple[ActuatorState, bool]:
        """Set one irrigation switch; idempotent, audited, session-gated."""
        if not self._is_active(user_id):
            raise SessionInactive(f"user '{user_id}' has no active session")
        attr = target.lower()
        changed = getattr(self.actuators, attr) is not desired
        if changed:
            self.actuators = replace(self.actuators, **{attr: desired})
        self.store.append(
            Stream.AUDIT,
            {
                "ts": self.clock.now,
                "user_id": user_id,
                "target": target,
                "desired": desired.value,
                "changed": changed,
            },
        )
        return self.actuators, changed

    # -- cards ---------------------------------------------------------------

    def snapshot(self) -> SensorSnapshot:
        return SensorSnapshot(
            ts=self.clock.now,
            air_temp=self.field.air_temp,
            rel_humidity=self.field.rel_humidity,
            soil_moisture=self.field.soil_moisture,
            light=self.field.light,
        )

    def status_card(self, user_id: str) -> OutboundMessage:
        snap = self.snapshot()
        return card_message(
            user_id,
            "Field status",
            [
                ("soil_moisture", f"{snap.soil_moisture:.1f} %VWC"),
                ("air_temp", f"{snap.air_temp:.1f} °C"),
                ("rel_humidity", f"{snap.rel_humidity:.1f} %"),
                ("light", f"{snap.light:.1f} lux"),
                ("drip", self.actuators.drip.value),
                ("mist", self.actuators.mist.value),
            ],
        )

    def _main_card(self, user_id: str) -> OutboundMessage:
        return card_message(
            user_id,
            "Main page",
            [
                ("drip", self.actuators.drip.value),
                ("mist", self.actuators.mist.value),
                ("pages", "MAIN | DRIP | MIST | MONITOR"),
                ("ask", 'Type a question, e.g. "weather forecast"'),
            ],
        )

    def _irrigation_card(self, user_id: str, target: str) -> OutboundMessage:
        state = getattr(self.actuators, target.lower()).value
        return card_message(
            user_id,
            f"{_TARGET_LABEL[target]} page",
            [
                (target.lower(), state),
                ("commands", f"{target}_ON, {target}_OFF"),
            ],
        )

    # -- intents ---------------------------------------------------------------

    def answer_intent(self, user_id: str, result: MatchResult) -> list[OutboundMessage]:
        if result.outcome is MatchOutcome.MATCHED:
            intent = next(i for i in self.registry if i.name == result.intent)
            return self._handlers[intent.handler](user_id)
        if result.outcome is MatchOutcome.SUGGEST:
            quoted = ", ".join(f'"{phrase}"' for phrase in result.suggestions)
            return [text_message(user_id, f"Did you mean: {quoted}?")]
        known = ", ".join(intent.phrases[0] for intent in self.registry)
        return [
            text_message(
                user_id, f"Sorry, I did not understand that. Known questions: {known}."
            )
        ]

    def _answer_weather(self, user_id: str) -> list[OutboundMessage]:
        start_day = self.clock.local_day()
        lines = ["7-day weather forecast:"]
        for offset in range(7):
            fc = weather_forecast(self.sim, start_day + offset)
            lines.append(
                f"Day {offset + 1}: {fc.min_temp:.1f} to {fc.max_temp:.1f} °C, rain {fc.rain_chance}%"
            )
        return [text_message(user_id, "\n".join(lines))]

    def _answer_status(self, user_id: str) -> list[OutboundMessage]:
        return [self.status_card(user_id)]

    def _answer_help(self, user_id: str) -> list[OutboundMessage]:
        known = ", ".join(intent.phrases[0] for intent in self.registry)
        return [
            text_message(
                user_id,
                "Menu: START/STOP toggles the session; MAIN, DRIP, MIST and MONITOR open pages; "
                "DRIP_ON/DRIP_OFF and MIST_ON/MIST_OFF switch irrigation. "
                f"You can also ask: {known}.",
            )
        ]

    def _answer_knowledge(self, user_id: str) -> list[OutboundMessage]:
        if not self.playlist:
            log.warning("knowledge playlist is empty")
            return [text_message(user_id, "No knowledge videos are configured.")]
        url = self.playlist[self.clock.local_day() % len(self.playlist)]
        return [video_message(user_id, url)]

    # -- briefing ---------------------------------------------------------------

    def morning_briefing(self, user_id: str) -> list[OutboundMessage]:
        """Daily knowledge video (rotating by day) followed by the status card."""
        if not self._is_active(user_id):
            raise SessionInactive(f"user '{user_id}' has no active session")
        msgs: list[OutboundMessage] = []
        if self.playlist:
            url = self.playlist[self.clock.local_day() % len(self.playlist)]
            msgs.append(video_message(user_id, url))
        else:
            log.warning("knowledge playlist is empty; briefing carries only the status card")
        msgs.append(self.status_card(user_id))
        return msgs

    # -- tick loop ---------------------------------------------------------------

    def tick(self) -> None:
        """One simulation step: sense, evaluate, notify, brief.

        Internal failures are logged and never abort the tick; telemetry is
        recorded even when nobody is subscribed.
        """
        self.field = step(self.field, self.actuators, self.sim)
        self.clock.tick_index += 1
        self.clock.now = self._start_ts + self.clock.tick_index * self.sim.tick_seconds

        snap = self.snapshot()
        self.store.append(Stream.TELEMETRY, snap.to_frame())

        try:
            recommendations, self.rule_state = evaluate(snap, self.ruleset, self.rule_state)
        except FarmchatError as exc:
            log.error("rule evaluation failed: %s", exc)
            recommendations = []

        active = self.active_users()
        for rec in recommendations:
            text = rec.message
            if rec.advised_action is not None:
                text = f"{text} Suggested action: {rec.advised_action.value}."
            for user_id in active:
                self._push(user_id, [text_message(user_id, text)])

        local_day, local_tod = divmod(self.clock.local_now(), SECONDS_PER_DAY)
        if local_tod >= self.clock.briefing_seconds:
            if self._last_briefing_day is None or local_day > self._last_briefing_day:
                for user_id in active:
                    self._push(user_id, self.morning_briefing(user_id))
                self._last_briefing_day = local_day
            interval = self.config.weed_advisory_days
            if (
                interval > 0
                and local_day > 0
                and local_day % interval == 0
                and self._last_weed_day != local_day
            ):
                for user_id in active:
                    self._push(user_id, [text_message(user_id, WEED_REMINDER_TEXT)])
                self._last_weed_day = local_day

    def _push(self, user_id: str, msgs: list[OutboundMessage]) -> None:
        if self._gateway is None:
            return
        try:
            self._gateway.push(user_id, msgs)
        except FarmchatError as exc:
            log.error("push to %s failed: %s", user_id, exc)
