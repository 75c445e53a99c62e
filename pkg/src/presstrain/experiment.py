"""Whole-cohort simulated experiments and their Monte-Carlo replication.

Two groups of simulated participants run the full protocol; the group
difference is configured through the training learning rates.  After
training, a participant's residual force-sense bias is

    bias_i = bias_pop * exp(-lr_group * minutes) + stable_i,
    stable_i ~ Normal(0, bias_stable_sd),

so the two groups differ by a pure location shift of the outcome
distribution, and the true standardised effect is

    d = bias_pop * (exp(-lr_a * T) - exp(-lr_b * T)) / bias_stable_sd.

That makes the analytic power formula directly comparable to the simulated
rejection rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import stats
from .session import Group, ParticipantModel, ProtocolConfig, SessionResult, run_protocol


@dataclass(frozen=True)
class PopulationConfig:
    """Distribution the per-participant controller parameters are drawn from."""

    bias_pop_N: float = 2.0
    bias_stable_sd_N: float = 0.4
    motor_noise_sd_N: float = 0.35
    learning_rate_per_min: float = 0.05
    reaction_delay_s: float = 0.15
    proportional_gain: float = 1.0
    tau_track_s: float = 0.3

    def draw(self, rng: np.random.Generator) -> ParticipantModel:
        return ParticipantModel(
            reaction_delay_s=self.reaction_delay_s,
            proportional_gain=self.proportional_gain,
            motor_noise_sd_N=self.motor_noise_sd_N,
            bias_trainable_N=self.bias_pop_N,
            bias_stable_N=float(rng.normal(0.0, self.bias_stable_sd_N)),
            learning_rate_per_min=self.learning_rate_per_min,
            tau_track_s=self.tau_track_s,
        )


@dataclass(frozen=True)
class CohortConfig:
    game: PopulationConfig
    app: PopulationConfig

    @classmethod
    def null(cls, base: PopulationConfig | None = None) -> "CohortConfig":
        base = base or PopulationConfig()
        return cls(game=base, app=base)

    @classmethod
    def with_effect(
        cls,
        d: float,
        base: PopulationConfig | None = None,
        training_minutes: float = 5.0,
    ) -> "CohortConfig":
        """Cohorts whose true standardised outcome effect is d.

        The app group keeps the base learning rate; the game group's rate is
        solved so the post-training mean-bias gap is d * bias_stable_sd.
        """
        base = base or PopulationConfig()
        t = training_minutes
        e_app = math.exp(-base.learning_rate_per_min * t)
        shift = d * base.bias_stable_sd_N
        e_game = (base.bias_pop_N * e_app - shift) / base.bias_pop_N
        if e_game <= 0.0:
            raise ValueError(
                f"effect d={d} unreachable: requires non-positive post-training bias"
            )
        lr_game = -math.log(e_game) / t
        return cls(game=replace(base, learning_rate_per_min=lr_game), app=base)

    def population(self, group: Group) -> PopulationConfig:
        return self.game if group is Group.GAME_TRAINED else self.app


@dataclass
class ExperimentResult:
    report: stats.StatsReport
    game_deltas: list[float]
    app_deltas: list[float]
    sessions: list[SessionResult] = field(default_factory=list)

    def to_dict(self, include_sessions: bool = False) -> dict:
        d = {
            "report": self.report.to_dict(),
            "game_deltas": self.game_deltas,
            "app_deltas": self.app_deltas,
        }
        if include_sessions:
            d["sessions"] = [s.to_dict() for s in self.sessions]
        return d


def run_experiment(
    n_per_group: int,
    seed: int,
    cohort: CohortConfig | None = None,
    *,
    protocol: ProtocolConfig | None = None,
    training: str = "fast",
    alpha: float = 0.05,
    keep_sessions: bool = False,
) -> ExperimentResult:
    """One complete two-group experiment with simulated participants.

    Outcome per participant is the mean no-visual delta; groups are compared
    with the rank test (one-tailed p is for "game group smaller").
    """
    if n_per_group < 2:
        raise ValueError("need at least 2 participants per group")
    cohort = cohort or CohortConfig.with_effect(0.85)
    protocol = protocol or ProtocolConfig()
    seq = np.random.SeedSequence(seed)
    children = seq.spawn(2 * n_per_group)
    deltas = {Group.GAME_TRAINED: [], Group.APP_TRAINED: []}
    sessions: list[SessionResult] = []
    for i, group in enumerate(
        [Group.GAME_TRAINED] * n_per_group + [Group.APP_TRAINED] * n_per_group
    ):
        child = children[i]
        rng = np.random.default_rng(child)
        participant = cohort.population(group).draw(rng)
        session_seed = int(rng.integers(0, 2**31 - 1))
        result = run_protocol(
            group,
            participant,
            session_seed,
            config=protocol,
            participant_id=f"{group.value}_{i:03d}",
            training=training,
            keep_samples=keep_sessions,
        )
        deltas[group].append(result.mean_delta_N)
        if keep_sessions:
            sessions.append(result)
    report = stats.mann_whitney(
        deltas[Group.GAME_TRAINED], deltas[Group.APP_TRAINED], method="normal", alpha=alpha
    )
    return ExperimentResult(
        report=report,
        game_deltas=deltas[Group.GAME_TRAINED],
        app_deltas=deltas[Group.APP_TRAINED],
        sessions=sessions,
    )


@dataclass
class ReplicationSummary:
    replications: int
    n_per_group: int
    alpha: float
    rejection_rate: float
    analytic_power: float
    mean_observed_d: float

    def to_dict(self) -> dict:
        return {
            "replications": self.replications,
            "n_per_group": self.n_per_group,
            "alpha": self.alpha,
            "rejection_rate": self.rejection_rate,
            "analytic_power": self.analytic_power,
            "mean_observed_d": self.mean_observed_d,
        }


def _replicate_once(args: tuple) -> tuple[float, float]:
    """One replication, picklable for worker pools; returns (p_one, d)."""
    n_per_group, rep_seed, cohort, protocol, training, alpha = args
    result = run_experiment(
        n_per_group, rep_seed, cohort, protocol=protocol, training=training, alpha=alpha
    )
    return result.report.p_one_tailed, result.report.cohens_d


def run_replications(
    n_per_group: int,
    replications: int,
    seed: int,
    cohort: CohortConfig,
    *,
    protocol: ProtocolConfig | None = None,
    training: str = "fast",
    alpha: float = 0.05,
    effect_d: float | None = None,
    workers: int = 1,
) -> ReplicationSummary:
    """Monte-Carlo rejection rate of the one-tailed rank test across reruns.

    analytic_power is the closed-form prediction at effect_d (0 for a null
    cohort gives the test size instead of power).  Each replication is an
    isolated unit seeded from its own sub-stream, so results are identical
    for any worker count.
    """
    seq = np.random.SeedSequence(seed)
    children = seq.spawn(replications)
    rep_seeds = [
        int(np.random.default_rng(child).integers(0, 2**31 - 1)) for child in children
    ]
    jobs = [
        (n_per_group, rep_seed, cohort, protocol, training, alpha)
        for rep_seed in rep_seeds
    ]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_replicate_once, jobs, chunksize=8))
    else:
        outcomes = [_replicate_once(job) for job in jobs]

    rejections = sum(1 for p, _d in outcomes if p < alpha)
    d_values = [d for _p, d in outcomes if not math.isnan(d)]
    d_eff = effect_d if effect_d is not None else 0.0
    analytic = (
        stats.power_two_sample(abs(d_eff), n_per_group, alpha=alpha, tails=1)
        if d_eff > 0
        else alpha
    )
    return ReplicationSummary(
        replications=replications,
        n_per_group=n_per_group,
        alpha=alpha,
        rejection_rate=rejections / replications,
        analytic_power=analytic,
        mean_observed_d=float(np.mean(d_values)) if d_values else float("nan"),
    )
