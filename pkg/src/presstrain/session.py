"""Target-force-hold trials and the two-arm training protocol.

A session walks one participant through training (either runner-game rounds
or practice holds on the scale display), a familiarisation pass with visual
feedback, a rest, and the no-visual test whose per-target absolute error
drives the analysis:

    delta_i = |mean exerted force - target_i|,  outcome = mean of the deltas.

Participants are either live (a force source fed from the gateway) or
simulated controllers, which make whole-cohort experiments reproducible and
fast.  Simulated holds run through the batch kernels; the per-sample path
exists for live sources and is bit-identical (see tests).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Protocol

import numpy as np

from . import game as game_mod
from ._kernels import play_round, track_hold
from .calibration import ForceSample
from .game import GameConfig


class Group(str, Enum):
    GAME_TRAINED = "game_trained"
    APP_TRAINED = "app_trained"


class TrialAborted(RuntimeError):
    """Force source stalled or disconnected mid-trial."""


STALL_LIMIT_S = 0.5


@dataclass(frozen=True)
class TrialSpec:
    target_N: float
    duration_s: float = 10.0
    sample_interval_ms: float = 10.0
    visual_feedback: bool = True

    def __post_init__(self):
        if self.duration_s <= 0 or self.sample_interval_ms <= 0:
            raise ValueError("duration and sample interval must be positive")

    @property
    def n_samples(self) -> int:
        return int(round(self.duration_s * 1000.0 / self.sample_interval_ms))

    @property
    def dt_s(self) -> float:
        return self.sample_interval_ms / 1000.0


@dataclass
class TrialRecord:
    spec: TrialSpec
    samples: list[ForceSample]
    mu_N: float
    delta_N: float
    n_samples: int = 0

    @classmethod
    def from_samples(cls, spec: TrialSpec, samples: list[ForceSample]) -> "TrialRecord":
        # fsum: exactly-rounded, so the batch path can reproduce it bit-for-bit
        mu = math.fsum(s.force_N for s in samples) / len(samples)
        return cls(spec=spec, samples=samples, mu_N=mu,
                   delta_N=abs(mu - spec.target_N), n_samples=len(samples))


def trial_delta(record: TrialRecord) -> float:
    return record.delta_N


@dataclass
class SessionResult:
    participant_id: str
    group: Group
    test_trials: list[TrialRecord]
    familiarisation_trials: list[TrialRecord] = field(default_factory=list)
    game_scores: list[int] = field(default_factory=list)
    training_minutes: float = 0.0
    status: str = "complete"
    mean_delta_N: float = float("nan")

    def finalise(self) -> "SessionResult":
        if self.test_trials:
            self.mean_delta_N = sum(t.delta_N for t in self.test_trials) / len(self.test_trials)
        return self

    def to_dict(self) -> dict:
        return {
            "participant_id": self.participant_id,
            "group": self.group.value,
            "status": self.status,
            "training_minutes": self.training_minutes,
            "mean_delta_N": self.mean_delta_N,
            "game_scores": self.game_scores,
            "test_trials": [_trial_dict(t) for t in self.test_trials],
            "familiarisation_trials": [_trial_dict(t) for t in self.familiarisation_trials],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out)
        w.writerow(["participant", "group", "target_N", "mu_N", "delta_N"])
        for t in self.test_trials:
            w.writerow(
                [self.participant_id, self.group.value, t.spec.target_N, t.mu_N, t.delta_N]
            )
        return out.getvalue()


def participant_score(result: SessionResult) -> float:
    return result.mean_delta_N


def _trial_dict(t: TrialRecord) -> dict:
    return {
        "target_N": t.spec.target_N,
        "duration_s": t.spec.duration_s,
        "sample_interval_ms": t.spec.sample_interval_ms,
        "visual_feedback": t.spec.visual_feedback,
        "mu_N": t.mu_N,
        "delta_N": t.delta_N,
        "n_samples": t.n_samples,
    }


@dataclass(frozen=True)
class ProtocolConfig:
    targets: tuple[float, ...] = (2.0, 3.0, 5.0)
    training_minutes: float = 5.0
    game_rounds: int = 3
    rest_s: float = 60.0
    familiarisation_per_target: int = 1
    trial_duration_s: float = 10.0
    sample_interval_ms: float = 10.0
    game: GameConfig = field(default_factory=GameConfig)


class ForceSource(Protocol):
    """Per-sample force provider for live (wall-clock) trials."""

    def read(self, t_s: float, dt_s: float) -> float: ...


@dataclass
class ConstantSource:
    value_N: float

    def read(self, t_s: float, dt_s: float) -> float:
        return self.value_N


@dataclass
class CallableSource:
    fn: Callable[[float], float]

    def read(self, t_s: float, dt_s: float) -> float:
        return self.fn(t_s)


@dataclass
class ParticipantModel:
    """Simulated participant: delayed first-order pursuit with motor noise.

    The force-sense miscalibration (bias) has a trainable component that
    training shrinks exponentially per minute and a stable per-individual
    component that does not train away; motor noise shrinks at the same
    rate.  With visual feedback the controller servos on the displayed
    force, cancelling bias; without it the bias lands in the output.
    """

    reaction_delay_s: float = 0.15
    proportional_gain: float = 1.0
    motor_noise_sd_N: float = 0.35
    bias_trainable_N: float = 2.0
    bias_stable_N: float = 0.0
    learning_rate_per_min: float = 0.05
    tau_track_s: float = 0.3

    def __post_init__(self):
        if self.motor_noise_sd_N < 0:
            raise ValueError("noise sd must be >= 0")
        if self.proportional_gain <= 0:
            raise ValueError("gain must be positive")

    @property
    def bias_N(self) -> float:
        return self.bias_trainable_N + self.bias_stable_N

    def train(self, minutes: float) -> None:
        decay = math.exp(-self.learning_rate_per_min * minutes)
        self.bias_trainable_N *= decay
        self.motor_noise_sd_N *= decay

    def tracking_alpha(self, dt_s: float) -> float:
        return 1.0 - math.exp(-dt_s * self.proportional_gain / self.tau_track_s)

    def delay_steps(self, dt_s: float) -> int:
        return int(round(self.reaction_delay_s / dt_s))

    def hold_trace(
        self, spec: TrialSpec, rng: np.random.Generator, start_force: float = 0.0
    ) -> np.ndarray:
        """Force trace for one hold trial, computed by the batch kernel."""
        n = spec.n_samples
        noise = rng.standard_normal(n) * self.motor_noise_sd_N
        out = np.empty(n)
        track_hold(
            out,
            noise,
            self.tracking_alpha(spec.dt_s),
            self.delay_steps(spec.dt_s),
            spec.target_N,
            start_force,
            self.bias_N,
            spec.visual_feedback,
        )
        return out

    def play_game_round(
        self, seed: int, config: GameConfig, rng: np.random.Generator
    ) -> tuple[int, float, np.ndarray]:
        """Play one full runner round; returns (score, seconds, force trace)."""
        coins = game_mod.generate_coins(seed, config)
        coin_x = np.array([c.x_units for c in coins])
        coin_level = np.array([c.level_N for c in coins])
        dt = config.dt_s
        # worst case: speed never ramps -> run_length / base_speed seconds
        max_ticks = int(config.run_length_units / config.base_speed_units_per_s / dt) + 2
        noise = rng.standard_normal(max_ticks) * self.motor_noise_sd_N
        collected = np.zeros(len(coins), dtype=np.uint8)
        forces = np.empty(max_ticks)
        alts = np.empty(max_ticks)
        ticks, score, finished = play_round(
            coin_x,
            coin_level,
            collected,
            forces,
            alts,
            noise,
            dt,
            config.altitude_alpha,
            self.tracking_alpha(dt),
            self.delay_steps(dt),
            self.bias_N,
            config.base_speed_units_per_s,
            config.speed_ramp_per_s,
            config.speed_cap_factor,
            config.collision_buffer_N,
            config.run_length_units,
            config.max_force_N,
            config.coin_value,
        )
        return int(score), ticks * dt, forces[:ticks]


Observer = Callable[[str, dict], None]
"""Session observer: called with (message_type, payload).  Live force values
are published only during visual-feedback trials."""


def run_trial(
    spec: TrialSpec,
    source: ForceSource | ParticipantModel,
    *,
    rng: np.random.Generator | None = None,
    observer: Observer | None = None,
    keep_samples: bool = True,
    stall_limit_s: float = STALL_LIMIT_S,
) -> TrialRecord:
    """Collect one hold trial at the trial's sampling rate.

    A ParticipantModel source runs as a single kernel batch; any other
    source is polled per sample.  A live source signalling a stall (raising
    TrialAborted or returning None) aborts the trial.  keep_samples=False
    drops the per-sample records (cohort simulations only need mu/delta);
    the mean is bit-identical either way.
    """
    if observer:
        observer("trial_event", {"event": "started", "target_N": spec.target_N,
                                 "visual": spec.visual_feedback})
    dt = spec.dt_s
    if isinstance(source, ParticipantModel):
        if rng is None:
            rng = np.random.default_rng()
        trace = source.hold_trace(spec, rng)
        if keep_samples or (observer and spec.visual_feedback):
            samples = [ForceSample(k * dt, float(f)) for k, f in enumerate(trace)]
            if observer and spec.visual_feedback:
                for s in samples:
                    observer("force", {"t_s": s.t_s, "force_N": s.force_N})
        else:
            samples = []
        mu = math.fsum(trace) / len(trace)
        record = TrialRecord(spec=spec, samples=samples if keep_samples else [],
                             mu_N=mu, delta_N=abs(mu - spec.target_N),
                             n_samples=len(trace))
    else:
        samples = []
        for k in range(spec.n_samples):
            t = k * dt
            value = source.read(t, dt)
            if value is None:
                if observer:
                    observer("trial_event", {"event": "trial_aborted", "t_s": t})
                raise TrialAborted(f"force source stalled at t={t:.3f}s")
            s = ForceSample(t, float(value))
            samples.append(s)
            if observer and spec.visual_feedback:
                observer("force", {"t_s": s.t_s, "force_N": s.force_N})
        record = TrialRecord.from_samples(spec, samples)
        if not keep_samples:
            record.samples = []
    if observer:
        observer("trial_event", {"event": "completed", "target_N": spec.target_N,
                                 "mu_N": record.mu_N, "delta_N": record.delta_N})
    return record


# ---------------------------------------------------------------------------
# Protocol plan: the phase sequence both the headless runner and the gateway
# execute, so there is exactly one definition of the experiment's shape.

@dataclass(frozen=True)
class Phase:
    kind: str  # "game_round" | "practice_hold" | "rest" | "trial"
    duration_s: float = 0.0
    target_N: float | None = None
    visual: bool = True
    recorded: bool = False  # trials only: part of the test outcome?


def build_protocol_plan(group: Group, cfg: ProtocolConfig) -> list[Phase]:
    plan: list[Phase] = []
    if group is Group.GAME_TRAINED:
        round_s = cfg.training_minutes * 60.0 / cfg.game_rounds
        for r in range(cfg.game_rounds):
            plan.append(Phase(kind="game_round", duration_s=round_s))
            if r < cfg.game_rounds - 1:
                plan.append(Phase(kind="rest", duration_s=cfg.rest_s))
    else:
        # scale practice: visual holds cycling through the targets
        total = cfg.training_minutes * 60.0
        hold = cfg.trial_duration_s
        n_holds = int(total / hold)
        for i in range(n_holds):
            plan.append(
                Phase(kind="practice_hold", duration_s=hold,
                      target_N=cfg.targets[i % len(cfg.targets)], visual=True)
            )
    for target in cfg.targets:
        for _ in range(cfg.familiarisation_per_target):
            plan.append(Phase(kind="trial", duration_s=cfg.trial_duration_s,
                              target_N=target, visual=True, recorded=False))
    plan.append(Phase(kind="rest", duration_s=cfg.rest_s))
    for target in cfg.targets:
        plan.append(Phase(kind="trial", duration_s=cfg.trial_duration_s,
                          target_N=target, visual=False, recorded=True))
    return plan


def run_protocol(
    group: Group,
    participant: ParticipantModel | ForceSource,
    seed: int,
    *,
    config: ProtocolConfig | None = None,
    participant_id: str = "bot",
    observer: Observer | None = None,
    training: str = "full",
    keep_samples: bool = True,
) -> SessionResult:
    """Run the whole protocol for one participant on a virtual clock.

    The participant is either a simulated controller or a live ForceSource
    polled per sample.  training="full" actually simulates the training
    activity (game rounds or practice holds); "fast" applies the same
    learning effect and skips the activity, which leaves a bot's outcome
    distribution unchanged because learning depends only on accumulated
    training minutes.  A stalled live source ends the session early with a
    partial result and an aborted status.
    """
    cfg = config or ProtocolConfig()
    if training not in ("full", "fast"):
        raise ValueError("training must be 'full' or 'fast'")
    is_bot = isinstance(participant, ParticipantModel)
    rng = np.random.default_rng(seed)
    result = SessionResult(participant_id=participant_id, group=group, test_trials=[])
    plan = build_protocol_plan(group, cfg)
    for phase in plan:
        try:
            if phase.kind == "game_round":
                minutes = phase.duration_s / 60.0
                if training == "full":
                    round_seed = int(rng.integers(0, 2**31 - 1))
                    if is_bot:
                        score, _, _ = participant.play_game_round(round_seed, cfg.game, rng)
                    else:
                        score = _source_game_round(participant, round_seed, cfg.game)
                    result.game_scores.append(score)
                    if observer:
                        observer("score", {"value": score})
                if is_bot:
                    participant.train(minutes)
                result.training_minutes += minutes
            elif phase.kind == "practice_hold":
                minutes = phase.duration_s / 60.0
                if training == "full":
                    spec = TrialSpec(target_N=phase.target_N, duration_s=phase.duration_s,
                                     sample_interval_ms=cfg.sample_interval_ms,
                                     visual_feedback=True)
                    run_trial(spec, participant, rng=rng, observer=observer,
                              keep_samples=False)
                if is_bot:
                    participant.train(minutes)
                result.training_minutes += minutes
            elif phase.kind == "rest":
                pass  # virtual clock: nothing to simulate
            elif phase.kind == "trial":
                spec = TrialSpec(target_N=phase.target_N, duration_s=phase.duration_s,
                                 sample_interval_ms=cfg.sample_interval_ms,
                                 visual_feedback=phase.visual)
                record = run_trial(spec, participant, rng=rng, observer=observer,
                                   keep_samples=keep_samples)
                if phase.recorded:
                    result.test_trials.append(record)
                else:
                    result.familiarisation_trials.append(record)
        except TrialAborted as e:
            # disconnect mid-protocol: return the partial result with status
            result.status = f"aborted:{phase.kind}:{e}"
            break
    return result.finalise()


def _source_game_round(source: ForceSource, seed: int, config: GameConfig) -> int:
    """One game round driven per tick from a live force source."""
    from . import game as _game

    state = _game.new_game(seed, config)
    dt = config.dt_s
    while not state.finished:
        value = source.read(state.t_s, dt)
        if value is None:
            raise TrialAborted(f"force source stalled at t={state.t_s:.3f}s")
        state, _events = _game.tick(state, float(value))
    return state.score
