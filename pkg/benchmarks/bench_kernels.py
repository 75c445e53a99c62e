#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Run from the repo root:

    python benchmarks/bench_kernels.py

Both backends are exercised on identical inputs; outputs are asserted
bit-identical before timing, so the numbers compare like for like.
"""

import time

import numpy as np

from presstrain._kernels import _pure
from presstrain.game import GameConfig, generate_coins
from presstrain.session import ParticipantModel

try:
    from presstrain._kernels import _speed
except ImportError:
    _speed = None


def bench(fn, *args, repeat=5, number=1):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(number):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / number)
    return best


def bench_track_hold(backend, n=100_000):
    rng = np.random.default_rng(0)
    out = np.empty(n)
    noise = rng.standard_normal(n) * 0.3
    args = (out, noise, 0.033, 15, 3.0, 0.0, 0.8, False)
    return bench(backend.track_hold, *args), n


def bench_play_round(backend, seed=7):
    config = GameConfig()
    bot = ParticipantModel(motor_noise_sd_N=0.3, bias_trainable_N=0.5)
    coins = generate_coins(seed, config)
    coin_x = np.array([c.x_units for c in coins])
    coin_level = np.array([c.level_N for c in coins])
    max_ticks = int(config.run_length_units / config.base_speed_units_per_s
                    / config.dt_s) + 2
    rng = np.random.default_rng(1)
    noise = rng.standard_normal(max_ticks) * bot.motor_noise_sd_N
    args = (
        coin_x, coin_level, np.zeros(len(coins), dtype=np.uint8),
        np.empty(max_ticks), np.empty(max_ticks), noise,
        config.dt_s, config.altitude_alpha,
        bot.tracking_alpha(config.dt_s), bot.delay_steps(config.dt_s), bot.bias_N,
        config.base_speed_units_per_s, config.speed_ramp_per_s,
        config.speed_cap_factor, config.collision_buffer_N,
        config.run_length_units, config.max_force_N, config.coin_value,
    )
    return bench(backend.play_round, *args), max_ticks


def verify_parity():
    rng = np.random.default_rng(42)
    n = 10_000
    noise = rng.standard_normal(n) * 0.3
    out_p = np.empty(n)
    out_c = np.empty(n)
    _pure.track_hold(out_p, noise, 0.033, 15, 3.0, 0.0, 0.8, True)
    _speed.track_hold(out_c, noise, 0.033, 15, 3.0, 0.0, 0.8, True)
    assert np.array_equal(out_p, out_c), "backends diverged"


def main():
    if _speed is None:
        print("compiled kernels not built; run `pip install -e .` first")
        return
    verify_parity()
    print(f"{'kernel':<14} {'steps':>9} {'pure':>12} {'compiled':>12} {'speedup':>9}")
    for name, runner in (("track_hold", bench_track_hold),
                         ("play_round", bench_play_round)):
        t_pure, n = runner(_pure)
        t_fast, _ = runner(_speed)
        print(f"{name:<14} {n:>9} {t_pure * 1e3:>10.2f}ms {t_fast * 1e3:>10.2f}ms "
              f"{t_pure / t_fast:>8.1f}x")
    # end-to-end: one simulated experiment per backend
    import os
    import subprocess
    import sys

    for label, env in (("compiled", {}), ("pure", {"PRESSTRAIN_PURE_KERNELS": "1"})):
        t0 = time.perf_counter()
        subprocess.run(
            [sys.executable, "-m", "presstrain.cli", "simulate-experiment",
             "--n-per-group", "15", "--replications", "60", "--seed", "1", "--json"],
            capture_output=True, check=True, env={**os.environ, **env},
        )
        print(f"simulate-experiment n=15 x60 replications ({label}): "
              f"{time.perf_counter() - t0:.2f}s")


if __name__ == "__main__":
    main()
