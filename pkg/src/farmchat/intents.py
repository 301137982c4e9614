"""Rule-based intent matching over registered training phrases.

The matcher is deliberately simple (a script bot): an utterance either
equals a training phrase after normalization, or it is close enough in
edit distance that we suggest the nearest phrases, or it is a miss.
Suggestions are never executed automatically; the caller is expected to
reply with a "Did you mean ...?" prompt.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from farmchat.errors import (
    DuplicateIntent,
    EmptyTrainingPhrase,
    EmptyUtterance,
    ParseError,
    ValidationError,
)

# Handlers the orchestrator knows how to dispatch.  Registries are free to
# name new handlers, but the default dispatch table covers exactly these.
KNOWN_HANDLERS = frozenset({"WEATHER_FORECAST", "FIELD_STATUS", "HELP", "CROP_KNOWLEDGE"})

MAX_SUGGESTIONS = 3


class MatchOutcome(Enum):
    MATCHED = "matched"
    SUGGEST = "suggest"
    NO_MATCH = "no_match"


@dataclass(frozen=True)
class Intent:
    name: str
    handler: str
    phrases: tuple[str, ...]


@dataclass(frozen=True)
class MatchResult:
    outcome: MatchOutcome
    intent: str | None = None
    suggestions: tuple[str, ...] = ()
    distance: int | None = None


def normalize(text: str) -> list[str]:
    """Case-fold, strip punctuation, and split on whitespace.

    Idempotent: normalizing the joined token list gives the tokens back.
    Non-Latin scripts pass through untouched apart from case folding; there
    is no word segmentation, so e.g. Thai phrases stay single tokens.
    """
    folded = text.casefold()
    cleaned = "".join(
        " " if unicodedata.category(ch).startswith("P") else ch for ch in folded
    )
    return cleaned.split()


def levenshtein(a: str, b: str) -> int:
    """Unit-cost insert/delete/substitute edit distance (two-row DP)."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ch_a in enumerate(a, start=1):
        current = [i]
        for j, ch_b in enumerate(b, start=1):
            cost = 0 if ch_a == ch_b else 1
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost))
        previous = current
    return previous[-1]


def suggestion_threshold(phrase: str) -> int:
    """Edit budget for suggesting a phrase: two typos, more on long phrases."""
    return max(2, len(phrase) // 5)


def _validate_intent(intent: Intent) -> None:
    if not intent.phrases:
        raise EmptyTrainingPhrase(f"intent '{intent.name}' has no training phrases")
    for phrase in intent.phrases:
        if not normalize(phrase):
            raise EmptyTrainingPhrase(
                f"intent '{intent.name}' has a phrase that normalizes to nothing: {phrase!r}"
            )


def register_intent(registry: Sequence[Intent], intent: Intent) -> tuple[Intent, ...]:
    """Return a new registry with ``intent`` appended; names stay unique."""
    _validate_intent(intent)
    if any(existing.name == intent.name for existing in registry):
        raise DuplicateIntent(f"intent '{intent.name}' is already registered")
    return tuple(registry) + (intent,)


def build_registry(intents: Iterable[Intent]) -> tuple[Intent, ...]:
    registry: tuple[Intent, ...] = ()
    for intent in intents:
        registry = register_intent(registry, intent)
    return registry


def match_intent(text: str, registry: Sequence[Intent]) -> MatchResult:
    """Three-tier match: exact phrase, near-miss suggestions, or no match."""
    tokens = normalize(text)
    if not tokens:
        raise EmptyUtterance("utterance normalizes to nothing")
    utterance = " ".join(tokens)

    candidates: list[tuple[int, int, int, str]] = []
    for intent_idx, intent in enumerate(registry):
        for phrase_idx, phrase in enumerate(intent.phrases):
            normalized_phrase = " ".join(normalize(phrase))
            if normalized_phrase == utterance:
                return MatchResult(outcome=MatchOutcome.MATCHED, intent=intent.name)
            distance = levenshtein(utterance, normalized_phrase)
            if distance <= suggestion_threshold(normalized_phrase):
                candidates.append((distance, intent_idx, phrase_idx, phrase))

    if not candidates:
        return MatchResult(outcome=MatchOutcome.NO_MATCH)

    candidates.sort()
    suggestions: list[str] = []
    for _, _, _, phrase in candidates:
        if phrase not in suggestions:
            suggestions.append(phrase)
        if len(suggestions) == MAX_SUGGESTIONS:
            break
    return MatchResult(
        outcome=MatchOutcome.SUGGEST,
        suggestions=tuple(suggestions),
        distance=candidates[0][0],
    )


def load_registry(path: str | Path) -> tuple[Intent, ...]:
    """Load a registry file: JSON array of {"name","handler","phrases"}."""
    raw = Path(path).read_text(encoding="utf-8")
    try:
        records = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}", index=exc.lineno) from exc
    if not isinstance(records, list):
        raise ParseError(f"{path}: registry file must be a JSON array")

    registry: tuple[Intent, ...] = ()
    for i, record in enumerate(records):
        if not isinstance(record, dict):
            raise ParseError(f"{path}: record {i} is not an object", index=i)
        try:
            name = record["name"]
            handler = record["handler"]
            phrases = record["phrases"]
        except KeyError as exc:
            raise ParseError(f"{path}: record {i} is missing {exc}", index=i) from exc
        if not isinstance(name, str) or not isinstance(handler, str):
            raise ParseError(f"{path}: record {i} has non-string name/handler", index=i)
        if not isinstance(phrases, list) or not all(isinstance(p, str) for p in phrases):
            raise ParseError(f"{path}: record {i} phrases must be a list of strings", index=i)
        if handler not in KNOWN_HANDLERS:
            raise ValidationError(
                f"intent '{name}' names unknown handler '{handler}'", rule_id=name
            )
        registry = register_intent(registry, Intent(name=name, handler=handler, phrases=tuple(phrases)))
    return registry


def default_registry() -> tuple[Intent, ...]:
    """The registry shipped with the package (see data/intents.json)."""
    with resources.files("farmchat.data").joinpath("intents.json").open("r", encoding="utf-8") as f:
        records = json.load(f)
    return build_registry(
        Intent(name=r["name"], handler=r["handler"], phrases=tuple(r["phrases"]))
        for r in records
    )
