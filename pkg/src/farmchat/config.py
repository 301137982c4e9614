"""Service configuration: briefing schedule, playlist, and file locations.

The farm config file is a single JSON object.  ``simconfig`` may be inline
or a path to a flat key/value JSON file; ``registry``/``ruleset`` paths are
resolved relative to the config file so a config directory is relocatable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields as dataclass_fields
from pathlib import Path

from farmchat.errors import ParseError, ValidationError
from farmchat.intents import Intent, default_registry, load_registry
from farmchat.rules import Rule, default_ruleset, load_ruleset
from farmchat.simulation import SimConfig

DEFAULT_PLAYLIST = (
    "https://videos.example/lettuce/soil-preparation",
    "https://videos.example/lettuce/transplanting",
    "https://videos.example/lettuce/irrigation-basics",
    "https://videos.example/lettuce/pest-scouting",
    "https://videos.example/lettuce/harvest",
)


def parse_time_of_day(value: str) -> int:
    """'HH:MM' -> seconds after local midnight."""
    parts = value.split(":")
    if len(parts) != 2:
        raise ValidationError(f"briefing_time must be 'HH:MM', got {value!r}")
    try:
        hours, minutes = int(parts[0]), int(parts[1])
    except ValueError:
        raise ValidationError(f"briefing_time must be 'HH:MM', got {value!r}") from None
    if not (0 <= hours < 24 and 0 <= minutes < 60):
        raise ValidationError(f"briefing_time out of range: {value!r}")
    return hours * 3600 + minutes * 60


@dataclass
class AppConfig:
    briefing_time: str = "06:00"
    tz_offset: int = 0  # minutes east of UTC
    playlist: tuple[str, ...] = DEFAULT_PLAYLIST
    start_ts: int = 0  # unix seconds at tick 0
    weed_advisory_days: int = 7
    allow_users: tuple[str, ...] = ()
    sim: SimConfig = field(default_factory=SimConfig)
    registry: tuple[Intent, ...] = field(default_factory=default_registry)
    ruleset: list[Rule] = field(default_factory=default_ruleset)

    @property
    def briefing_seconds(self) -> int:
        return parse_time_of_day(self.briefing_time)


def load_sim_config(path: str | Path) -> SimConfig:
    """Load a flat key/value SimConfig file."""
    raw = Path(path).read_text(encoding="utf-8")
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}", index=exc.lineno) from exc
    return sim_config_from_dict(obj, source=str(path))


def sim_config_from_dict(obj: dict, source: str = "<simconfig>") -> SimConfig:
    if not isinstance(obj, dict):
        raise ParseError(f"{source}: simconfig must be a JSON object")
    known = {f.name for f in dataclass_fields(SimConfig)}
    for key in obj:
        if key not in known:
            raise ValidationError(f"{source}: unknown simconfig key '{key}'")
    return SimConfig(**obj)


def load_app_config(path: str | Path | None, overrides: dict | None = None) -> AppConfig:
    """Build an AppConfig from an optional config file plus overrides.

    ``overrides`` uses the same keys as the file and wins on conflict.
    """
    merged: dict = {}
    base_dir = Path.cwd()
    if path is not None:
        base_dir = Path(path).resolve().parent
        raw = Path(path).read_text(encoding="utf-8")
        try:
            file_obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc}", index=exc.lineno) from exc
        if not isinstance(file_obj, dict):
            raise ParseError(f"{path}: config must be a JSON object")
        merged.update(file_obj)
    if overrides:
        merged.update(overrides)

    known_keys = {
        "briefing_time",
        "tz_offset",
        "playlist",
        "start_ts",
        "weed_advisory_days",
        "allow_users",
        "simconfig",
        "seed",
        "registry",
        "ruleset",
    }
    for key in merged:
        if key not in known_keys:
            raise ValidationError(f"unknown config key '{key}'")

    def resolve(p: str) -> Path:
        candidate = Path(p)
        return candidate if candidate.is_absolute() else base_dir / candidate

    cfg = AppConfig()
    if "briefing_time" in merged:
        cfg.briefing_time = str(merged["briefing_time"])
        parse_time_of_day(cfg.briefing_time)  # fail fast on bad values
    if "tz_offset" in merged:
        cfg.tz_offset = int(merged["tz_offset"])
    if "playlist" in merged:
        playlist = merged["playlist"]
        if not isinstance(playlist, list) or not all(isinstance(u, str) for u in playlist):
            raise ValidationError("playlist must be a list of URL strings")
        cfg.playlist = tuple(playlist)
    if "start_ts" in merged:
        cfg.start_ts = int(merged["start_ts"])
    if "weed_advisory_days" in merged:
        cfg.weed_advisory_days = int(merged["weed_advisory_days"])
    if "allow_users" in merged:
        cfg.allow_users = tuple(merged["allow_users"])

    sim_value = merged.get("simconfig")
    if isinstance(sim_value, str):
        cfg.sim = load_sim_config(resolve(sim_value))
    elif isinstance(sim_value, dict):
        cfg.sim = sim_config_from_dict(sim_value)
    elif sim_value is not None:
        raise ValidationError("simconfig must be a path or an object")

    if "seed" in merged:  # convenience override, e.g. --seed on the CLI
        cfg.sim = sim_config_from_dict({**_sim_as_dict(cfg.sim), "seed": int(merged["seed"])})

    if "registry" in merged:
        cfg.registry = load_registry(resolve(str(merged["registry"])))
    if "ruleset" in merged:
        cfg.ruleset = load_ruleset(resolve(str(merged["ruleset"])))
    return cfg


def _sim_as_dict(sim: SimConfig) -> dict:
    return {f.name: getattr(sim, f.name) for f in dataclass_fields(SimConfig)}
