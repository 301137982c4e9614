"""Threshold rules over sensor snapshots for the five cultivation processes.

Each rule watches one sensor field.  A rule fires only after its predicate
has held for ``sustain_ticks`` consecutive evaluations and its cooldown has
expired, which keeps a persistently-bad reading from turning into an alert
storm.  Evaluation is pure: callers own the streak/cooldown state and feed
back the returned copy.
"""

from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

from farmchat.errors import (
    InvariantViolation,
    ParseError,
    TemplateError,
    UnknownField,
    ValidationError,
)
from farmchat.protocol import MenuAction

log = logging.getLogger(__name__)

SENSOR_FIELDS = ("air_temp", "rel_humidity", "soil_moisture", "light")

# Only irrigation hardware exists; every other process is advisory text.
ACTUATOR_ACTIONS = frozenset(
    {MenuAction.DRIP_ON, MenuAction.DRIP_OFF, MenuAction.MIST_ON, MenuAction.MIST_OFF}
)

_PLACEHOLDER = re.compile(r"\{(\w*)\}")


class Process(Enum):
    IRRIGATION = "IRRIGATION"
    FERTILIZATION = "FERTILIZATION"
    DISEASE_CONTROL = "DISEASE_CONTROL"
    INSECT_PEST_CONTROL = "INSECT_PEST_CONTROL"
    WEED_CONTROL = "WEED_CONTROL"


class Comparator(Enum):
    LT = "lt"
    GT = "gt"


@dataclass(frozen=True)
class SensorSnapshot:
    """One telemetry reading; bounded fields are validated on construction."""

    ts: int
    air_temp: float
    rel_humidity: float
    soil_moisture: float
    light: float

    def __post_init__(self):
        for name in SENSOR_FIELDS:
            if not math.isfinite(getattr(self, name)):
                raise InvariantViolation(f"snapshot field {name} must be finite")
        if not 0.0 <= self.rel_humidity <= 100.0:
            raise InvariantViolation("rel_humidity must be within [0, 100]")
        if not 0.0 <= self.soil_moisture <= 100.0:
            raise InvariantViolation("soil_moisture must be within [0, 100]")
        if self.light < 0.0:
            raise InvariantViolation("light must be non-negative")

    def value(self, field: str) -> float:
        if field not in SENSOR_FIELDS:
            raise UnknownField(f"unknown sensor field '{field}'")
        return getattr(self, field)

    def to_frame(self) -> dict:
        return {
            "ts": self.ts,
            "air_temp": self.air_temp,
            "rel_humidity": self.rel_humidity,
            "soil_moisture": self.soil_moisture,
            "light": self.light,
        }


@dataclass(frozen=True)
class Rule:
    id: str
    process: Process
    field: str
    cmp: Comparator
    threshold: float
    sustain_ticks: int
    message: str
    cooldown_ticks: int = 0
    advised_action: MenuAction | None = None


@dataclass(frozen=True)
class Recommendation:
    rule_id: str
    ts: int
    message: str
    process: Process
    advised_action: MenuAction | None = None


@dataclass(frozen=True)
class RuleState:
    """Consecutive-hit streak and remaining refractory ticks for one rule."""

    streak: int = 0
    cooldown: int = 0


def render_message(rule: Rule, snapshot: SensorSnapshot) -> str:
    """Fill {value}/{threshold} with one-decimal readings."""
    values = {
        "value": f"{snapshot.value(rule.field):.1f}",
        "threshold": f"{rule.threshold:.1f}",
    }

    def substitute(match: re.Match) -> str:
        key = match.group(1)
        if key not in values:
            raise TemplateError(f"rule '{rule.id}': unknown placeholder {{{key}}}")
        return values[key]

    return _PLACEHOLDER.sub(substitute, rule.message)


def evaluate(
    snapshot: SensorSnapshot,
    rules: Sequence[Rule],
    state: Mapping[str, RuleState],
) -> tuple[list[Recommendation], dict[str, RuleState]]:
    """Advance every rule one tick against ``snapshot``.

    Returns the recommendations that fired (ordered by rule id) and the
    updated state map covering every rule id.  The input state is never
    mutated; unseen rule ids start from zero.
    """
    new_state: dict[str, RuleState] = {}
    fired: list[Rule] = []
    for rule in rules:
        value = snapshot.value(rule.field)
        st = state.get(rule.id, RuleState())
        predicate = value < rule.threshold if rule.cmp is Comparator.LT else value > rule.threshold
        streak = st.streak + 1 if predicate else 0
        cooldown = st.cooldown
        if cooldown > 0:
            cooldown -= 1
        elif predicate and streak >= rule.sustain_ticks:
            fired.append(rule)
            cooldown = rule.cooldown_ticks
            streak = 0
        new_state[rule.id] = RuleState(streak=streak, cooldown=cooldown)

    fired.sort(key=lambda r: r.id)
    recommendations = [
        Recommendation(
            rule_id=rule.id,
            ts=snapshot.ts,
            message=render_message(rule, snapshot),
            process=rule.process,
            advised_action=rule.advised_action,
        )
        for rule in fired
    ]
    return recommendations, new_state


def _parse_rule(record: dict, index: int, source: str) -> Rule:
    required = (
        "id",
        "process",
        "field",
        "cmp",
        "threshold",
        "sustain_ticks",
        "cooldown_ticks",
        "message",
        "advised_action",
    )
    for key in required:
        if key not in record:
            raise ParseError(f"{source}: record {index} is missing '{key}'", index=index)
    rule_id = record["id"]
    if not isinstance(rule_id, str) or not rule_id:
        raise ParseError(f"{source}: record {index} has a bad id", index=index)

    try:
        process = Process(record["process"])
    except ValueError:
        raise ValidationError(
            f"rule '{rule_id}': unknown process '{record['process']}'", rule_id=rule_id
        ) from None
    try:
        cmp = Comparator(record["cmp"])
    except ValueError:
        raise ValidationError(
            f"rule '{rule_id}': comparator must be 'lt' or 'gt'", rule_id=rule_id
        ) from None
    field = record["field"]
    if field not in SENSOR_FIELDS:
        raise ValidationError(f"rule '{rule_id}': unknown field '{field}'", rule_id=rule_id)

    threshold = record["threshold"]
    if isinstance(threshold, bool) or not isinstance(threshold, (int, float)):
        raise ValidationError(f"rule '{rule_id}': threshold must be a number", rule_id=rule_id)
    sustain = record["sustain_ticks"]
    cooldown = record["cooldown_ticks"]
    if not isinstance(sustain, int) or sustain < 1:
        raise ValidationError(f"rule '{rule_id}': sustain_ticks must be >= 1", rule_id=rule_id)
    if not isinstance(cooldown, int) or cooldown < 0:
        raise ValidationError(f"rule '{rule_id}': cooldown_ticks must be >= 0", rule_id=rule_id)

    message = record["message"]
    if not isinstance(message, str) or not message:
        raise ValidationError(f"rule '{rule_id}': message must be non-empty", rule_id=rule_id)
    for placeholder in _PLACEHOLDER.findall(message):
        if placeholder not in ("value", "threshold"):
            raise ValidationError(
                f"rule '{rule_id}': unknown placeholder {{{placeholder}}}", rule_id=rule_id
            )

    advised_raw = record["advised_action"]
    advised: MenuAction | None = None
    if advised_raw is not None:
        try:
            advised = MenuAction(advised_raw)
        except ValueError:
            raise ValidationError(
                f"rule '{rule_id}': unknown advised_action '{advised_raw}'", rule_id=rule_id
            ) from None
        if advised not in ACTUATOR_ACTIONS:
            raise ValidationError(
                f"rule '{rule_id}': advised_action must be an actuator command", rule_id=rule_id
            )

    return Rule(
        id=rule_id,
        process=process,
        field=field,
        cmp=cmp,
        threshold=float(threshold),
        sustain_ticks=sustain,
        cooldown_ticks=cooldown,
        message=message,
        advised_action=advised,
    )


def parse_ruleset(raw: str, source: str = "<ruleset>") -> list[Rule]:
    if not raw.strip():
        log.warning("%s: ruleset file is empty; no rules loaded", source)
        return []
    try:
        records = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: {exc}", index=exc.lineno) from exc
    if not isinstance(records, list):
        raise ParseError(f"{source}: ruleset file must be a JSON array")

    rules: list[Rule] = []
    seen: set[str] = set()
    for i, record in enumerate(records):
        if not isinstance(record, dict):
            raise ParseError(f"{source}: record {i} is not an object", index=i)
        rule = _parse_rule(record, i, source)
        if rule.id in seen:
            raise ValidationError(f"duplicate rule id '{rule.id}'", rule_id=rule.id)
        seen.add(rule.id)
        rules.append(rule)
    if not rules:
        log.warning("%s: ruleset contains no rules", source)
    return rules


def load_ruleset(path: str | Path) -> list[Rule]:
    return parse_ruleset(Path(path).read_text(encoding="utf-8"), source=str(path))


def default_ruleset() -> list[Rule]:
    """The lettuce ruleset shipped with the package (data/lettuce_rules.json)."""
    raw = resources.files("farmchat.data").joinpath("lettuce_rules.json").read_text("utf-8")
    return parse_ruleset(raw, source="lettuce_rules.json")
