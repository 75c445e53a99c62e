"""Simulated force-sensing resistor channels.

Models the full measurement chain of one glove channel: a power-law
resistance/force transfer, the measuring-resistor voltage divider, 10-bit
ADC quantization, and the time-dependent artefacts that make these sensors
awkward in practice (response lag, creep under static load, loading/unloading
hysteresis, read noise).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np

ADC_MAX = 1023

# Fraction of the anchor force within which a load still counts as static
# for creep accumulation purposes.
STATIC_BAND = 0.05

# Large pads are presence detectors, not calibrated channels: anything above
# this many counts reads as "touching".
PRESENCE_THRESHOLD_COUNTS = 50


class Category(str, Enum):
    SMALL = "small"
    MEDIUM = "medium"
    LARGE = "large"


_CATEGORY_DIAMETER_MM = {
    Category.SMALL: 6.0,
    Category.MEDIUM: 12.0,
    Category.LARGE: 24.8,
}


class Direction(str, Enum):
    LOADING = "loading"
    UNLOADING = "unloading"
    IDLE = "idle"


class AdcReading(NamedTuple):
    counts: int
    saturated: bool


@dataclass(frozen=True)
class SensorSpec:
    """Static parameters of one sensor channel.

    k_ohm_n / alpha define the resistance transfer R = k * F^-alpha; the
    small pads are close to 1/F, the medium ones slightly sublinear, which
    keeps the force-to-voltage map near-linear at low force.
    """

    category: Category
    diameter_mm: float
    r_measure_ohm: float = 10_000.0
    v_ref_volt: float = 5.0
    response_time_s: float = 0.0025
    max_force_N: float = 100.0
    k_ohm_n: float = 30_000.0
    alpha: float = 1.0
    creep_gain_N: float = 2.0  # drift reached after creep_ref_s of static load
    creep_tau_s: float = 60.0
    creep_ref_s: float = 600.0
    hysteresis_factor: float = 1.05
    noise_sd_counts: float = 2.0

    def __post_init__(self):
        if self.r_measure_ohm <= 0 or self.v_ref_volt <= 0:
            raise ValueError("r_measure_ohm and v_ref_volt must be positive")
        if self.k_ohm_n <= 0 or self.alpha <= 0:
            raise ValueError("k_ohm_n and alpha must be positive")
        if self.max_force_N <= 0 or self.response_time_s <= 0:
            raise ValueError("max_force_N and response_time_s must be positive")
        expected = _CATEGORY_DIAMETER_MM[self.category]
        if abs(self.diameter_mm - expected) > 1e-9:
            raise ValueError(
                f"{self.category.value} pads are {expected} mm, got {self.diameter_mm}"
            )

    @classmethod
    def small(cls, **overrides) -> "SensorSpec":
        # 3.3k measuring resistor spreads the fingertip range to ~10.6 N at
        # the 550-count calibration top, covering the 0-10 N task span
        params = dict(category=Category.SMALL, diameter_mm=6.0,
                      k_ohm_n=30_000.0, alpha=1.0, r_measure_ohm=3_300.0)
        params.update(overrides)
        return cls(**params)

    @classmethod
    def medium(cls, **overrides) -> "SensorSpec":
        params = dict(category=Category.MEDIUM, diameter_mm=12.0,
                      k_ohm_n=45_000.0, alpha=0.9, r_measure_ohm=10_000.0)
        params.update(overrides)
        return cls(**params)

    @classmethod
    def large(cls, **overrides) -> "SensorSpec":
        params = dict(category=Category.LARGE, diameter_mm=24.8,
                      k_ohm_n=60_000.0, alpha=0.8, r_measure_ohm=10_000.0)
        params.update(overrides)
        return cls(**params)


FORCE_EPSILON_N = 1e-9  # below this the pad counts as untouched


def resistance_of_force(force_n: float, spec: SensorSpec) -> float:
    """Pad resistance at a given normal force; infinite when untouched."""
    if force_n < 0:
        raise ValueError("force must be >= 0")
    if force_n < FORCE_EPSILON_N:
        return math.inf
    return spec.k_ohm_n * force_n ** (-spec.alpha)


def voltage_divider(r_fsr_ohm: float, spec: SensorSpec) -> float:
    """Output of the measuring-resistor divider: V_ref * R_M / (R_FSR + R_M)."""
    if r_fsr_ohm <= 0:
        raise ValueError("resistance must be positive (or infinite)")
    if math.isinf(r_fsr_ohm):
        return 0.0
    return spec.v_ref_volt * spec.r_measure_ohm / (r_fsr_ohm + spec.r_measure_ohm)


def adc_quantize(volts: float, spec: SensorSpec) -> AdcReading:
    """10-bit quantization of the divider output; clamps and flags out-of-range."""
    saturated = volts < 0.0 or volts > spec.v_ref_volt
    v = min(max(volts, 0.0), spec.v_ref_volt)
    counts = int(round(v / spec.v_ref_volt * ADC_MAX))
    return AdcReading(min(max(counts, 0), ADC_MAX), saturated)


def creep_drift_n(static_s: float, spec: SensorSpec) -> float:
    """Additive reading drift after `static_s` seconds of constant load.

    Logarithmic in time, anchored so the drift is exactly creep_gain_N at
    creep_ref_s (+2 N after 10 minutes with the defaults).
    """
    if static_s <= 0:
        return 0.0
    norm = math.log(1.0 + spec.creep_ref_s / spec.creep_tau_s)
    return spec.creep_gain_N * math.log(1.0 + static_s / spec.creep_tau_s) / norm


@dataclass
class FsrChannel:
    """One simulated sensor channel; single-owner, advanced by step().

    Deterministic for a fixed seed: the only randomness is the per-step
    read noise drawn from the owned generator.
    """

    spec: SensorSpec
    seed: int | None = None
    applied_force_N: float = 0.0
    lagged_force_N: float = 0.0
    direction: Direction = Direction.IDLE
    static_anchor_N: float | None = None
    static_load_start_s: float | None = None
    hysteresis_state: float = 1.0
    t_s: float = 0.0
    last_counts: int = 0
    last_saturated: bool = False
    rng: np.random.Generator = field(default=None, repr=False)  # type: ignore[assignment]

    def __post_init__(self):
        if self.rng is None:
            self.rng = np.random.default_rng(self.seed)

    def step(self, applied_force_n: float, dt_s: float) -> int:
        """Advance the channel by dt under the given true force; return counts."""
        if dt_s <= 0:
            raise ValueError("dt must be positive")
        if applied_force_n < 0:
            raise ValueError("force must be >= 0")
        spec = self.spec
        prev = self.applied_force_N
        eps = 1e-9
        if applied_force_n > prev + eps:
            self.direction = Direction.LOADING
        elif applied_force_n < prev - eps:
            self.direction = Direction.UNLOADING
        elif applied_force_n <= eps:
            self.direction = Direction.IDLE
        self.applied_force_N = applied_force_n
        self.t_s += dt_s

        # static-load bookkeeping: creep accrues only while the force stays
        # within a +-5% band of its anchor; any excursion re-anchors, a full
        # unload clears it.
        if applied_force_n <= eps:
            self.static_anchor_N = None
            self.static_load_start_s = None
        elif (
            self.static_anchor_N is None
            or abs(applied_force_n - self.static_anchor_N) > STATIC_BAND * self.static_anchor_N
        ):
            self.static_anchor_N = applied_force_n
            self.static_load_start_s = self.t_s
        drift = 0.0
        if self.static_load_start_s is not None:
            drift = creep_drift_n(self.t_s - self.static_load_start_s, spec)

        # unloading reads high: the effective force is scaled by a factor
        # that relaxes back to 1 with the response time constant
        lag_alpha = 1.0 - math.exp(-dt_s / spec.response_time_s)
        h_target = spec.hysteresis_factor if self.direction is Direction.UNLOADING else 1.0
        self.hysteresis_state += (h_target - self.hysteresis_state) * lag_alpha

        effective = applied_force_n * self.hysteresis_state + drift if applied_force_n > eps else 0.0
        self.lagged_force_N += (effective - self.lagged_force_N) * lag_alpha
        if self.lagged_force_N < FORCE_EPSILON_N:
            self.lagged_force_N = 0.0

        r = resistance_of_force(max(self.lagged_force_N, 0.0), spec)
        volts = voltage_divider(r, spec)
        reading = adc_quantize(volts, spec)
        counts = reading.counts
        # a quiescent channel reads a clean zero; noise rides on actual signal
        if counts > 0 or self.lagged_force_N > eps:
            noisy = counts + self.rng.normal(0.0, spec.noise_sd_counts)
            counts = int(min(max(round(noisy), 0), ADC_MAX))
        self.last_counts = counts
        self.last_saturated = reading.saturated
        return counts

    @property
    def touching(self) -> bool:
        """Presence indication used for the large palm pads."""
        return self.last_counts >= PRESENCE_THRESHOLD_COUNTS


# Default glove layout: five small fingertip pads, five medium phalanx pads,
# two large palm pads used only for contact detection.
def default_glove_layout() -> list[SensorSpec]:
    return (
        [SensorSpec.small() for _ in range(5)]
        + [SensorSpec.medium() for _ in range(5)]
        + [SensorSpec.large() for _ in range(2)]
    )


class SimulatedGlove:
    """Twelve simulated channels stepped together.

    Channel 0 is the index fingertip, the one the training tasks read.
    """

    def __init__(self, seed: int | None = None, layout: list[SensorSpec] | None = None):
        layout = layout if layout is not None else default_glove_layout()
        if len(layout) != 12:
            raise ValueError("glove has exactly 12 channels")
        seq = np.random.SeedSequence(seed)
        children = seq.spawn(len(layout))
        self.channels = [
            FsrChannel(spec=s, rng=np.random.default_rng(c))
            for s, c in zip(layout, children)
        ]
        self.forces = [0.0] * len(layout)

    def set_force(self, channel: int, force_n: float) -> None:
        self.forces[channel] = force_n

    def step(self, dt_s: float) -> list[int]:
        return [ch.step(f, dt_s) for ch, f in zip(self.channels, self.forces)]
