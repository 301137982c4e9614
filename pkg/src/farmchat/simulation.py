"""Deterministic discrete-time lettuce field, standing in for real sensors.

Dynamics are linear drift plus a diurnal cycle with clamps: drip raises
soil moisture, evaporation drains it faster when hot, mist cools the air
and humidifies it.  Noise is a pure function of (seed, tick, channel), so
`step` itself is pure and trajectories are byte-reproducible.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from enum import Enum

from farmchat.errors import InvariantViolation

SECONDS_PER_DAY = 86_400


class Switch(Enum):
    ON = "ON"
    OFF = "OFF"


@dataclass(frozen=True)
class ActuatorState:
    drip: Switch = Switch.OFF
    mist: Switch = Switch.OFF


@dataclass(frozen=True)
class FieldState:
    soil_moisture: float
    air_temp: float
    rel_humidity: float
    light: float
    tick: int


@dataclass(frozen=True)
class SimConfig:
    """Rate constants and diurnal shape; all rates are per tick."""

    seed: int = 42
    tick_seconds: int = 600
    k_drip: float = 1.5
    k_evap: float = 0.4
    k_mist_temp: float = 0.8
    k_mist_hum: float = 1.2
    temp_mean: float = 28.0
    temp_amplitude: float = 6.0
    hum_mean: float = 70.0
    hum_amplitude: float = 15.0
    light_peak: float = 80000.0
    soil_start: float = 35.0
    noise_soil: float = 0.0
    noise_temp: float = 0.0
    noise_hum: float = 0.0
    noise_light: float = 0.0

    def __post_init__(self):
        if self.tick_seconds < 1:
            raise InvariantViolation("tick_seconds must be >= 1")
        for name in (
            "k_drip",
            "k_evap",
            "k_mist_temp",
            "k_mist_hum",
            "noise_soil",
            "noise_temp",
            "noise_hum",
            "noise_light",
        ):
            if getattr(self, name) < 0:
                raise InvariantViolation(f"{name} must be >= 0")

    @property
    def ticks_per_day(self) -> int:
        return max(1, SECONDS_PER_DAY // self.tick_seconds)


def _clamp(value: float, lo: float, hi: float) -> float:
    return min(hi, max(lo, value))


def day_fraction(cfg: SimConfig, tick: int) -> float:
    return (tick * cfg.tick_seconds % SECONDS_PER_DAY) / SECONDS_PER_DAY


def diurnal_temp(cfg: SimConfig, tick: int) -> float:
    """Coolest at midnight, warmest at noon."""
    return cfg.temp_mean - cfg.temp_amplitude * math.cos(2 * math.pi * day_fraction(cfg, tick))


def diurnal_humidity(cfg: SimConfig, tick: int) -> float:
    """Mirror image of the temperature cycle."""
    return cfg.hum_mean + cfg.hum_amplitude * math.cos(2 * math.pi * day_fraction(cfg, tick))


def diurnal_light(cfg: SimConfig, tick: int) -> float:
    """Half-sine daylight window between 06:00 and 18:00, dark otherwise."""
    f = day_fraction(cfg, tick)
    if f < 0.25 or f > 0.75:
        return 0.0
    return cfg.light_peak * math.sin(math.pi * (f - 0.25) / 0.5)


def evap_factor(air_temp: float) -> float:
    """Evaporation speeds up 5% per degree above 25 C."""
    return 1.0 + 0.05 * max(0.0, air_temp - 25.0)


def _noise(cfg: SimConfig, tick: int, channel: str, sigma: float) -> float:
    if sigma == 0.0:
        return 0.0
    # Keyed off (seed, tick, channel) so step stays a pure function.
    rng = random.Random(f"{cfg.seed}:{tick}:{channel}")
    return rng.gauss(0.0, sigma)


def initial_state(cfg: SimConfig) -> FieldState:
    return FieldState(
        soil_moisture=_clamp(cfg.soil_start, 0.0, 100.0),
        air_temp=diurnal_temp(cfg, 0),
        rel_humidity=_clamp(diurnal_humidity(cfg, 0), 0.0, 100.0),
        light=max(0.0, diurnal_light(cfg, 0)),
        tick=0,
    )


def step(state: FieldState, act: ActuatorState, cfg: SimConfig) -> FieldState:
    """Advance the field by one tick under the given actuator settings."""
    next_tick = state.tick + 1
    drip_gain = cfg.k_drip if act.drip is Switch.ON else 0.0
    evap_loss = cfg.k_evap * evap_factor(state.air_temp)
    soil = _clamp(
        state.soil_moisture + drip_gain - evap_loss + _noise(cfg, next_tick, "soil", cfg.noise_soil),
        0.0,
        100.0,
    )
    mist_on = act.mist is Switch.ON
    temp = (
        diurnal_temp(cfg, next_tick)
        - (cfg.k_mist_temp if mist_on else 0.0)
        + _noise(cfg, next_tick, "temp", cfg.noise_temp)
    )
    hum = _clamp(
        diurnal_humidity(cfg, next_tick)
        + (cfg.k_mist_hum if mist_on else 0.0)
        + _noise(cfg, next_tick, "hum", cfg.noise_hum),
        0.0,
        100.0,
    )
    light = max(0.0, diurnal_light(cfg, next_tick) + _noise(cfg, next_tick, "light", cfg.noise_light))
    return FieldState(
        soil_moisture=soil, air_temp=temp, rel_humidity=hum, light=light, tick=next_tick
    )


@dataclass(frozen=True)
class WeatherForecast:
    min_temp: float
    max_temp: float
    rain_chance: int


def weather_forecast(cfg: SimConfig, day_index: int) -> WeatherForecast:
    """Synthetic daily forecast; a pure function of (seed, day_index)."""
    rng = random.Random(f"{cfg.seed}:forecast:{day_index}")
    low = cfg.temp_mean - cfg.temp_amplitude + rng.uniform(-2.0, 2.0)
    spread = max(0.0, 2.0 * cfg.temp_amplitude + rng.uniform(-2.0, 2.0))
    high = low + spread
    rain = round(rng.uniform(0.0, 100.0))
    return WeatherForecast(min_temp=round(low, 1), max_temp=round(high, 1), rain_chance=rain)
