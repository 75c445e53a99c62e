"""Headless front door: calibration, fitting, bot games, cohort experiments,
and the rank-statistics pipeline.

Every command is deterministic under a fixed --seed and supports --json for
machine-readable output.  Exit codes: 0 success, 2 invalid input, 3 runtime
abort.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_RUNTIME = 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INVALID):
        super().__init__(message)
        self.code = code


def _read_values(path: str) -> list[float]:
    """One number per line; a header line and blank lines are skipped."""
    values = []
    for line in Path(path).read_text().splitlines():
        line = line.split(",")[0].strip()
        if not line or line.startswith("#"):
            continue
        try:
            values.append(float(line))
        except ValueError:
            continue  # header or junk line
    if not values:
        raise CliError(f"no numeric values found in {path}")
    return values


def _emit(payload: dict, args, text_lines: list[str]) -> None:
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        for line in text_lines:
            print(line)


def _out_dir(args) -> Path:
    out = Path(args.out) if args.out else Path(".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate_experiment(args) -> int:
    from . import experiment as exp
    from .session import ProtocolConfig

    if args.n_per_group < 2:
        raise CliError("--n-per-group must be >= 2")
    if args.null:
        cohort = exp.CohortConfig.null()
        effect = 0.0
    else:
        cohort = exp.CohortConfig.with_effect(args.effect_d)
        effect = args.effect_d
    interval = 100.0 if args.paper_100 else 10.0
    protocol = ProtocolConfig(sample_interval_ms=interval)

    if args.replications <= 1:
        result = exp.run_experiment(
            args.n_per_group, args.seed, cohort, protocol=protocol,
            training=args.training, alpha=args.alpha, keep_sessions=bool(args.out),
        )
        report = result.report
        if report.degenerate_variance:
            raise CliError("degenerate variance: all outcomes identical", EXIT_RUNTIME)
        payload = result.to_dict()
        if args.out:
            out = _out_dir(args)
            (out / "report.json").write_text(json.dumps(report.to_dict(), indent=2))
            for s in result.sessions:
                (out / f"session_{s.participant_id}.json").write_text(s.to_json())
            rows = ["participant,group,target_N,mu_N,delta_N"]
            for s in result.sessions:
                rows.extend(s.to_csv().splitlines()[1:])
            (out / "sessions.csv").write_text("\n".join(rows) + "\n")
        _emit(payload, args, [
            f"n per group:      {report.n1}/{report.n2}",
            f"median delta (game): {report.median1_N:.3f} N",
            f"median delta (app):  {report.median2_N:.3f} N",
            f"U = {report.U:.1f}, z = {report.z:.3f}",
            f"p (two-tailed) = {report.p_two_tailed:.4f}",
            f"p (one-tailed, game < app) = {report.p_one_tailed:.4f}",
            f"effect r = {report.r_effect:.3f}, cohen's d = {report.cohens_d:.3f}",
            f"post-hoc power = {report.power:.3f}",
        ])
        return EXIT_OK

    summary = exp.run_replications(
        args.n_per_group, args.replications, args.seed, cohort,
        protocol=protocol, training=args.training, alpha=args.alpha,
        effect_d=effect, workers=args.workers,
    )
    payload = summary.to_dict()
    if args.out:
        (_out_dir(args) / "replications.json").write_text(json.dumps(payload, indent=2))
    _emit(payload, args, [
        f"replications: {summary.replications} at n={summary.n_per_group}/group",
        f"rejection rate (one-tailed, alpha={summary.alpha}): {summary.rejection_rate:.3f}",
        f"analytic power: {summary.analytic_power:.3f}",
        f"mean observed d: {summary.mean_observed_d:.3f}",
    ])
    return EXIT_OK


def cmd_play_bot(args) -> int:
    from . import game as game_mod
    from .session import ParticipantModel

    config = game_mod.GameConfig()
    bot = ParticipantModel(
        bias_trainable_N=args.bias, bias_stable_N=0.0,
        motor_noise_sd_N=args.noise_sd, tau_track_s=args.tau,
        reaction_delay_s=args.delay,
    )
    rng = np.random.default_rng(args.seed)
    score, seconds, forces = bot.play_game_round(args.seed, config, rng)
    out = _out_dir(args)
    trace_path = out / f"replay_{args.seed}.csv"
    trace_path.write_text(game_mod.trace_to_csv(forces.tolist(), config.dt_s))
    coins = len(game_mod.generate_coins(args.seed, config))
    payload = {
        "seed": args.seed,
        "score": score,
        "coins_total": coins,
        "coins_collected": score // config.coin_value,
        "duration_s": seconds,
        "replay_file": str(trace_path),
    }
    _emit(payload, args, [
        f"score: {score} ({score // config.coin_value}/{coins} coins) in {seconds:.1f}s",
        f"replay trace: {trace_path}",
    ])
    return EXIT_OK


def cmd_replay(args) -> int:
    from . import game as game_mod

    text = Path(args.trace).read_text()
    forces = game_mod.trace_from_csv(text)
    if not forces:
        raise CliError(f"no samples in trace {args.trace}")
    state, _events = game_mod.run_trace(args.seed, forces)
    payload = {"seed": args.seed, "score": state.score, "finished": state.finished,
               "t_s": state.t_s}
    _emit(payload, args, [f"replayed score: {state.score} (finished={state.finished})"])
    return EXIT_OK


def cmd_calibrate(args) -> int:
    from .calibration import fit_quintic, points_to_csv, run_schedule
    from .sensor import Category, FsrChannel, SensorSpec

    try:
        category = Category(args.category)
    except ValueError:
        raise CliError(f"unknown category {args.category!r} (small or medium)")
    if category is Category.LARGE:
        raise CliError("large sensors are presence-only and are not calibrated")
    spec = SensorSpec.small() if category is Category.SMALL else SensorSpec.medium()
    channel = FsrChannel(spec=spec, seed=args.seed)
    points = run_schedule(channel, category, repeats=args.repeats)
    curve = fit_quintic(points)
    out = _out_dir(args)
    curve_path = out / (args.curve_name or "curve.json")
    curve_path.write_text(curve.to_json())
    points_path = out / "points.csv"
    points_path.write_text(points_to_csv(points))
    payload = {"curve_file": str(curve_path), "points_file": str(points_path),
               **curve.to_dict()}
    _emit(payload, args, [
        f"{len(points)} calibration points, domain {curve.domain_counts} counts",
        f"rms residual {curve.rms_residual_N:.4f} N, max {curve.max_residual_N:.4f} N",
        f"curve: {curve_path}",
    ])
    return EXIT_OK


def cmd_fit(args) -> int:
    from .calibration import (
        InvalidDataError,
        RankDeficientError,
        fit_quintic,
        points_from_csv,
    )

    try:
        points = points_from_csv(Path(args.infile).read_text())
        curve = fit_quintic(points, degree=args.degree)
    except (RankDeficientError, InvalidDataError, ValueError) as e:
        raise CliError(str(e))
    if args.out:
        path = Path(args.out)
        if path.is_dir() or args.out.endswith("/"):
            path.mkdir(parents=True, exist_ok=True)
            path = path / "curve.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(curve.to_json())
    payload = curve.to_dict()
    _emit(payload, args, [
        f"fit degree {args.degree}: rms {curve.rms_residual_N:.6f} N, "
        f"max {curve.max_residual_N:.6f} N, domain {curve.domain_counts}",
    ])
    return EXIT_OK


def cmd_stats(args) -> int:
    from .stats import (
        InvalidInputError,
        TiesRequireApproximationError,
        UseApproximationError,
        mann_whitney,
    )

    a = _read_values(args.a)
    b = _read_values(args.b)
    try:
        report = mann_whitney(
            a, b, method=args.method, continuity=args.continuity,
            tie_exact=args.tie_exact, alpha=args.alpha,
        )
    except (InvalidInputError, UseApproximationError, TiesRequireApproximationError) as e:
        raise CliError(str(e))
    if report.degenerate_variance:
        raise CliError("degenerate variance: pooled data are all identical",
                       EXIT_RUNTIME)
    if args.report:
        Path(args.report).write_text(json.dumps(report.to_dict(), indent=2))
    _emit(report.to_dict(), args, [
        f"n = {report.n1} vs {report.n2} ({report.method.value})",
        f"medians: {report.median1_N:.3f} vs {report.median2_N:.3f}",
        f"U = {report.U:.1f}, z = {report.z:.3f}, r = {report.r_effect:.3f}",
        f"p two-tailed = {report.p_two_tailed:.4f}, one-tailed = {report.p_one_tailed:.4f}",
        f"cohen's d = {report.cohens_d:.3f}, post-hoc power = {report.power:.3f}",
    ])
    return EXIT_OK


def cmd_serve(args) -> int:
    from . import config as config_mod
    from .gateway import GatewayConfig, serve

    kwargs: dict = {}
    if args.config:
        cfg = config_mod.load_config(args.config)
        kwargs["host"] = config_mod.get_str(cfg, "host", "127.0.0.1")
        kwargs["port"] = config_mod.get_int(cfg, "port", 8765)
        kwargs["tick_hz"] = config_mod.get_int(cfg, "tick_hz", 60)
        kwargs["data_dir"] = Path(config_mod.get_str(cfg, "data_dir", "./presstrain-data"))
        kwargs["source_kind"] = config_mod.get_str(cfg, "source", "simulated")
        kwargs["source_seed"] = config_mod.get_int(cfg, "source.seed", 0)
        kwargs["serial_device"] = cfg.get("source.device")
        kwargs["serial_baud"] = config_mod.get_int(cfg, "source.baud", 115200)
        kwargs["tcp_address"] = cfg.get("source.address")
        kwargs["channel"] = config_mod.get_int(cfg, "channel", 0)
        if "curve_path" in cfg:
            kwargs["curve_path"] = Path(cfg["curve_path"])
    if args.host:
        kwargs["host"] = args.host
    if args.port:
        kwargs["port"] = args.port
    if args.data_dir:
        kwargs["data_dir"] = Path(args.data_dir)
    if args.seed is not None:
        kwargs["source_seed"] = args.seed
    try:
        gateway_config = GatewayConfig(**kwargs)
    except ValueError as e:
        raise CliError(str(e))
    serve(gateway_config)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="presstrain",
        description="pressure-sensitivity training platform (headless tools)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--out", help="output directory")

    p = sub.add_parser("simulate-experiment",
                       help="run simulated two-group experiments and the rank test")
    common(p)
    p.add_argument("--n-per-group", type=int, default=15)
    p.add_argument("--replications", type=int, default=1,
                   help=">1 switches to Monte-Carlo rejection-rate mode")
    p.add_argument("--effect-d", type=float, default=0.85,
                   help="true standardised group effect to configure")
    p.add_argument("--null", action="store_true", help="identical cohorts (size check)")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--training", choices=["fast", "full"], default="fast",
                   help="simulate training activity or apply its effect analytically")
    p.add_argument("--paper-100", action="store_true",
                   help="sample holds at 100 ms intervals (100 samples) instead of 10 ms")
    p.add_argument("--workers", type=int, default=1,
                   help="parallel replication workers (identical results)")
    p.set_defaults(fn=cmd_simulate_experiment)

    p = sub.add_parser("play-bot", help="one bot game round; writes a replay trace")
    common(p)
    p.add_argument("--bias", type=float, default=0.0)
    p.add_argument("--noise-sd", type=float, default=0.0)
    p.add_argument("--tau", type=float, default=0.3, help="tracking time constant (s)")
    p.add_argument("--delay", type=float, default=0.15, help="reaction delay (s)")
    p.set_defaults(fn=cmd_play_bot)

    p = sub.add_parser("replay", help="re-run a recorded input trace")
    common(p)
    p.add_argument("--trace", required=True)
    p.set_defaults(fn=cmd_replay)

    p = sub.add_parser("calibrate", help="run the stepped-load schedule and fit a curve")
    common(p)
    p.add_argument("--category", default="small")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--curve-name", default=None)
    p.set_defaults(fn=cmd_calibrate)

    p = sub.add_parser("fit", help="fit a quintic curve to a points CSV")
    common(p)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--degree", type=int, default=5)
    p.set_defaults(fn=cmd_fit)

    p = sub.add_parser("stats", help="rank test between two value files")
    common(p)
    p.add_argument("--a", required=True, help="file of outcomes, one per line")
    p.add_argument("--b", required=True)
    p.add_argument("--report", help="write the report JSON here")
    p.add_argument("--method", choices=["auto", "exact", "normal"], default="auto")
    p.add_argument("--continuity", action="store_true")
    p.add_argument("--tie-exact", action="store_true")
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("serve", help="run the streaming gateway")
    common(p)
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--data-dir", default=None)
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except KeyboardInterrupt:
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
