"""Deterministic fixed-timestep state machine for the force-controlled runner.

The bird's altitude is the player's fingertip force passed through a short
smoothing filter, on a screen that spans 0-10 N bottom to top.  Coins sit at
the three trained force levels; flying within the collision band when the
bird crosses a coin collects it.  All randomness lives in layout generation,
so a (seed, input trace) pair replays bit-exactly.

The per-tick update here is the reference implementation; the batch kernels
in presstrain._kernels replicate it and are tested for bit-equality.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np


@dataclass(frozen=True)
class GameConfig:
    force_levels_N: tuple[float, ...] = (2.0, 3.0, 5.0)
    collision_buffer_N: float = 0.25  # 5% of the 10 N screen span
    max_force_N: float = 10.0
    coin_count_range: tuple[int, int] = (5, 15)
    coin_value: int = 100
    base_speed_units_per_s: float = 3.0
    speed_ramp_per_s: float = 0.01  # fractional growth of speed per second
    speed_cap_factor: float = 2.0
    run_length_units: float = 450.0
    tick_hz: int = 60
    altitude_smoothing_tau_s: float = 0.1
    segments: int = 1
    coin_min_spacing_units: float = 3.0
    coin_start_margin_units: float = 12.0
    coin_end_margin_units: float = 6.0

    def __post_init__(self):
        if not self.force_levels_N:
            raise ValueError("need at least one force level")
        for lv in self.force_levels_N:
            if not 0.0 < lv < self.max_force_N:
                raise ValueError(f"force level {lv} outside (0, {self.max_force_N})")
        if self.collision_buffer_N <= 0 or self.max_force_N <= 0:
            raise ValueError("collision buffer and max force must be positive")
        lo, hi = self.coin_count_range
        if not (1 <= lo <= hi):
            raise ValueError("bad coin count range")
        if self.tick_hz < 1 or self.base_speed_units_per_s <= 0:
            raise ValueError("tick_hz and base speed must be positive")
        if self.run_length_units <= 0 or self.altitude_smoothing_tau_s <= 0:
            raise ValueError("run length and smoothing tau must be positive")

    @property
    def dt_s(self) -> float:
        return 1.0 / self.tick_hz

    @property
    def altitude_alpha(self) -> float:
        """Per-tick smoothing factor shared with the batch kernels."""
        return 1.0 - math.exp(-self.dt_s / self.altitude_smoothing_tau_s)


@dataclass
class Coin:
    x_units: float
    level_N: float
    collected: bool = False


class CoinCollected(NamedTuple):
    index: int
    level_N: float


class Finished(NamedTuple):
    score: int


@dataclass
class GameState:
    config: GameConfig
    seed: int
    coins: list[Coin]
    t_s: float = 0.0
    bird_x_units: float = 0.0
    bird_force_alt_N: float = 0.0
    raw_force_N: float = 0.0
    score: int = 0
    speed: float = 0.0
    next_coin_index: int = 0
    finished: bool = False

    @property
    def next_coin_level_N(self) -> float | None:
        if self.next_coin_index < len(self.coins):
            return self.coins[self.next_coin_index].level_N
        return None

    def snapshot(self) -> dict:
        """JSON-ready copy of the state for streaming to observers."""
        return {
            "t_s": self.t_s,
            "bird_x_units": self.bird_x_units,
            "bird_force_alt_N": self.bird_force_alt_N,
            "raw_force_N": self.raw_force_N,
            "score": self.score,
            "speed": self.speed,
            "next_coin_level_N": self.next_coin_level_N,
            "finished": self.finished,
            "run_length_units": self.config.run_length_units,
            "max_force_N": self.config.max_force_N,
            "coins": [
                {"x_units": c.x_units, "level_N": c.level_N, "collected": c.collected}
                for c in self.coins
            ],
        }


def generate_coins(seed: int, config: GameConfig) -> list[Coin]:
    """Deterministic coin layout: per segment, 5..15 coins at random levels,
    positions sorted with a guaranteed minimum spacing."""
    rng = np.random.default_rng(seed)
    levels = np.asarray(config.force_levels_N)
    lo, hi = config.coin_count_range
    seg_len = config.run_length_units / config.segments
    coins: list[Coin] = []
    for s in range(config.segments):
        n = int(rng.integers(lo, hi + 1))
        level_idx = rng.integers(0, len(levels), size=n)
        usable = (
            seg_len
            - config.coin_start_margin_units
            - config.coin_end_margin_units
            - (n - 1) * config.coin_min_spacing_units
        )
        if usable <= 0:
            raise ValueError("segment too short for the coin layout constraints")
        offsets = np.sort(rng.uniform(0.0, usable, size=n))
        for i in range(n):
            x = (
                s * seg_len
                + config.coin_start_margin_units
                + offsets[i]
                + i * config.coin_min_spacing_units
            )
            coins.append(Coin(x_units=float(x), level_N=float(levels[level_idx[i]])))
    return coins


def new_game(seed: int, config: GameConfig | None = None) -> GameState:
    config = config or GameConfig()
    state = GameState(config=config, seed=seed, coins=generate_coins(seed, config))
    state.speed = config.base_speed_units_per_s
    return state


def tick(
    state: GameState, input_force_n: float, dt_s: float | None = None
) -> tuple[GameState, list[CoinCollected | Finished]]:
    """Advance one fixed timestep.  Mutates and returns the state.

    Update order (mirrored exactly by the batch kernels): clamp input,
    smooth altitude, move bird, advance time, ramp speed, resolve coin
    crossings, check finish line.
    """
    cfg = state.config
    dt = cfg.dt_s if dt_s is None else dt_s
    events: list[CoinCollected | Finished] = []
    if state.finished:
        return state, events

    f = input_force_n
    if f < 0.0:
        f = 0.0
    state.raw_force_N = f
    if f > cfg.max_force_N:
        f = cfg.max_force_N
    alpha = cfg.altitude_alpha
    alt = state.bird_force_alt_N
    alt = alt + (f - alt) * alpha
    if alt < 0.0:
        alt = 0.0
    elif alt > cfg.max_force_N:
        alt = cfg.max_force_N
    state.bird_force_alt_N = alt
    state.bird_x_units = state.bird_x_units + state.speed * dt
    state.t_s = state.t_s + dt
    rampv = 1.0 + cfg.speed_ramp_per_s * state.t_s
    if rampv > cfg.speed_cap_factor:
        rampv = cfg.speed_cap_factor
    state.speed = cfg.base_speed_units_per_s * rampv

    while state.next_coin_index < len(state.coins) and state.bird_x_units >= state.coins[
        state.next_coin_index
    ].x_units:
        coin = state.coins[state.next_coin_index]
        dalt = alt - coin.level_N
        if -cfg.collision_buffer_N <= dalt <= cfg.collision_buffer_N:
            coin.collected = True
            state.score += cfg.coin_value
            events.append(CoinCollected(state.next_coin_index, coin.level_N))
        state.next_coin_index += 1
    if state.bird_x_units >= cfg.run_length_units:
        state.finished = True
        events.append(Finished(state.score))
    return state, events


def score(state: GameState) -> int:
    return state.score


def run_trace(
    seed: int, forces: Sequence[float], config: GameConfig | None = None
) -> tuple[GameState, list[CoinCollected | Finished]]:
    """Replay an input trace from a fresh game; returns final state and events."""
    state = new_game(seed, config)
    all_events: list[CoinCollected | Finished] = []
    for f in forces:
        state, ev = tick(state, float(f))
        all_events.extend(ev)
        if state.finished:
            break
    return state, all_events


def trace_to_csv(forces: Sequence[float], dt_s: float) -> str:
    out = io.StringIO()
    w = csv.writer(out)
    w.writerow(["t_s", "force_N"])
    for k, f in enumerate(forces):
        w.writerow([f"{k * dt_s:.6f}", repr(float(f))])
    return out.getvalue()


def trace_from_csv(text: str) -> list[float]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        return []
    start = 1 if rows[0] and rows[0][0].strip().lower() == "t_s" else 0
    return [float(r[1]) for r in rows[start:] if len(r) >= 2 and r[1].strip()]
