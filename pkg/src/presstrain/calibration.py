"""Stepped-load calibration runs and the quintic counts-to-Newtons fit.

Calibration drives a sensor through press-release load steps targeting ADC
counts 50, 100, ... (up to 550 for small pads, 750 for medium ones), records
(counts, reference force) pairs, and fits a degree-5 polynomial mapping
counts to Newtons.  Counts are scaled to [0, 1] before fitting; a raw
0..1023 Vandermonde basis is numerically hopeless at degree 5.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Protocol, Sequence

import numpy as np

from .sensor import ADC_MAX, Category

SCHEDULE_STEP_COUNTS = 50
SCHEDULE_TOP_COUNTS = {Category.SMALL: 550, Category.MEDIUM: 750}
DEFAULT_REPEATS = 5
FIT_DEGREE = 5


class RankDeficientError(ValueError):
    """Fewer distinct abscissae than fit coefficients."""


class InvalidDataError(ValueError):
    """Non-finite or out-of-range calibration data."""


class ForceSample(NamedTuple):
    """Calibrated force at a timestamp for one sensor channel."""

    t_s: float
    force_N: float


class ForceEstimate(NamedTuple):
    newtons: float
    clamped: bool  # counts fell outside the calibrated domain


@dataclass(frozen=True)
class CalibrationPoint:
    counts: int
    force_N: float
    repeat: int = 0
    category: Category | None = None

    def __post_init__(self):
        if not 0 <= self.counts <= ADC_MAX:
            raise InvalidDataError(f"counts {self.counts} out of range")
        if not math.isfinite(self.force_N) or self.force_N < 0:
            raise InvalidDataError(f"force {self.force_N} must be finite and >= 0")


@dataclass(frozen=True)
class CalibrationCurve:
    """Quintic force model over a counts domain.

    coefficients_scaled are over x = counts / 1023 (the basis actually
    fitted); coefficients are the algebraically equivalent raw-counts ones,
    reported for completeness but not used for evaluation.
    """

    coefficients_scaled: tuple[float, ...]
    coefficients: tuple[float, ...]
    category: Category | None
    domain_counts: tuple[int, int]
    rms_residual_N: float
    max_residual_N: float

    def estimate(self, counts: float) -> ForceEstimate:
        lo, hi = self.domain_counts
        clamped = counts < lo or counts > hi
        c = min(max(counts, lo), hi)
        x = c / ADC_MAX
        # Horner over the scaled basis
        acc = 0.0
        for coef in reversed(self.coefficients_scaled):
            acc = acc * x + coef
        return ForceEstimate(acc, clamped)

    def to_dict(self) -> dict:
        return {
            "coefficients_scaled": list(self.coefficients_scaled),
            "coefficients": list(self.coefficients),
            "category": self.category.value if self.category else None,
            "domain_counts": list(self.domain_counts),
            "rms_residual_N": self.rms_residual_N,
            "max_residual_N": self.max_residual_N,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "CalibrationCurve":
        return cls(
            coefficients_scaled=tuple(d["coefficients_scaled"]),
            coefficients=tuple(d["coefficients"]),
            category=Category(d["category"]) if d.get("category") else None,
            domain_counts=tuple(d["domain_counts"]),
            rms_residual_N=d["rms_residual_N"],
            max_residual_N=d["max_residual_N"],
        )

    @classmethod
    def from_json(cls, text: str) -> "CalibrationCurve":
        return cls.from_dict(json.loads(text))


def estimate_force(curve: CalibrationCurve, counts: float) -> ForceEstimate:
    return curve.estimate(counts)


def fit_quintic(
    points: Sequence[CalibrationPoint], degree: int = FIT_DEGREE
) -> CalibrationCurve:
    """Least-squares polynomial fit of force against scaled counts.

    Solved by SVD-backed lstsq on the scaled Vandermonde; needs at least
    degree+1 distinct counts values.
    """
    if not points:
        raise InvalidDataError("no calibration points")
    counts = np.array([p.counts for p in points], dtype=float)
    force = np.array([p.force_N for p in points], dtype=float)
    if not (np.isfinite(counts).all() and np.isfinite(force).all()):
        raise InvalidDataError("non-finite calibration data")
    if len(np.unique(counts)) < degree + 1:
        raise RankDeficientError(
            f"need >= {degree + 1} distinct counts values, got {len(np.unique(counts))}"
        )
    x = counts / ADC_MAX
    vand = np.vander(x, degree + 1, increasing=True)
    coeffs, *_ = np.linalg.lstsq(vand, force, rcond=None)
    resid = vand @ coeffs - force
    rms = float(np.sqrt(np.mean(resid**2)))
    mx = float(np.max(np.abs(resid)))
    scale = ADC_MAX ** np.arange(degree + 1)
    unscaled = coeffs / scale
    categories = {p.category for p in points if p.category is not None}
    category = categories.pop() if len(categories) == 1 else None
    return CalibrationCurve(
        coefficients_scaled=tuple(float(c) for c in coeffs),
        coefficients=tuple(float(c) for c in unscaled),
        category=category,
        domain_counts=(int(counts.min()), int(counts.max())),
        rms_residual_N=rms,
        max_residual_N=mx,
    )


def residual_report(
    curve: CalibrationCurve, points: Sequence[CalibrationPoint]
) -> dict:
    """Residual statistics of a curve against a point set."""
    per_point = []
    for p in points:
        est = curve.estimate(p.counts)
        per_point.append(est.newtons - p.force_N)
    arr = np.array(per_point)
    return {
        "rms_N": float(np.sqrt(np.mean(arr**2))) if len(arr) else 0.0,
        "max_N": float(np.max(np.abs(arr))) if len(arr) else 0.0,
        "per_point": per_point,
    }


class SteppableSensor(Protocol):
    """What the schedule runner needs from a sensor: step it, know its limits."""

    spec: "object"

    def step(self, applied_force_n: float, dt_s: float) -> int: ...


def run_schedule(
    sensor: SteppableSensor,
    category: Category,
    *,
    repeats: int = DEFAULT_REPEATS,
    hold_s: float = 5.0,
    settle_s: float = 0.5,
    avg_s: float = 1.0,
    ramp_n_per_s: float = 2.0,
    dt_s: float = 0.01,
    release_s: float = 2.0,
) -> list[CalibrationPoint]:
    """Press-release load steps against a live or simulated sensor.

    Each repeat ramps the load up until the displayed counts reach the step
    target, holds ~hold_s, and records (mean displayed counts, reference
    force).  The recording window starts settle_s into the hold and lasts
    avg_s: early enough that creep has not moved the reading, late enough
    for the response lag to settle.  A full release between steps keeps
    creep and hysteresis from piling up.  Saturation (max force reached
    before the target counts) truncates the schedule with a warning.
    """
    if category not in SCHEDULE_TOP_COUNTS:
        raise ValueError(f"{category.value} sensors are not calibrated (presence-only)")
    top = SCHEDULE_TOP_COUNTS[category]
    targets = list(range(SCHEDULE_STEP_COUNTS, top + 1, SCHEDULE_STEP_COUNTS))
    max_force = sensor.spec.max_force_N  # type: ignore[attr-defined]
    points: list[CalibrationPoint] = []
    for target in targets:
        truncated = False
        for rep in range(repeats):
            force = 0.0
            counts = sensor.step(0.0, dt_s)
            # loading ramp: raise the force until the display reaches target
            while counts < target:
                force += ramp_n_per_s * dt_s
                if force > max_force:
                    truncated = True
                    break
                counts = sensor.step(force, dt_s)
            if truncated:
                break
            # hold at constant load; record the early-window average
            n_hold = max(1, int(round(hold_s / dt_s)))
            rec_from = int(round(settle_s / dt_s))
            rec_to = rec_from + max(1, int(round(avg_s / dt_s)))
            window: list[int] = []
            for i in range(n_hold):
                c = sensor.step(force, dt_s)
                if rec_from <= i < rec_to:
                    window.append(c)
            mean_counts = int(round(sum(window) / len(window)))
            points.append(
                CalibrationPoint(
                    counts=mean_counts, force_N=force, repeat=rep, category=category
                )
            )
            # full release so the next press starts clean
            for _ in range(max(1, int(round(release_s / dt_s)))):
                sensor.step(0.0, dt_s)
        if truncated:
            warnings.warn(
                f"sensor saturated before reaching {target} counts; "
                f"schedule truncated at {len(points)} points",
                RuntimeWarning,
                stacklevel=2,
            )
            break
    return points


def points_to_csv(points: Iterable[CalibrationPoint]) -> str:
    out = io.StringIO()
    w = csv.writer(out)
    w.writerow(["counts", "force_N", "repeat", "category"])
    for p in points:
        w.writerow([p.counts, p.force_N, p.repeat, p.category.value if p.category else ""])
    return out.getvalue()


def points_from_csv(text: str) -> list[CalibrationPoint]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        return []
    start = 1 if rows[0] and rows[0][0].strip().lower() == "counts" else 0
    points = []
    for row in rows[start:]:
        if not row or not row[0].strip():
            continue
        cat = Category(row[3]) if len(row) > 3 and row[3].strip() else None
        points.append(
            CalibrationPoint(
                counts=int(row[0]),
                force_N=float(row[1]),
                repeat=int(row[2]) if len(row) > 2 and row[2].strip() else 0,
                category=cat,
            )
        )
    return points
