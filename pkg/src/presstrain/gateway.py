"""Service shell: real-time loop, HTTP control endpoints, WebSocket streaming.

One asyncio driver task owns all live state (glove source, parser, active
activity); endpoint handlers talk to it only through thread-safe hub calls
and message queues.  Stream subscribers get bounded drop-oldest queues for
state frames and an unbounded queue for control/trial events, so a stalled
client can never stall the loop.

HTTP:
    GET  /api/config                 -> server configuration echo
    POST /api/session                -> {id}; body {group, participant_id, mode}
    GET  /api/session/{id}/export    -> session JSON; also writes JSON+CSV files

WebSocket /ws (all messages carry v=1):
    server->client  {type: game_state|scale_state|trial_event|score, ...}
    client->server  {type: force_input, newtons} | {type: control, action, ...}
"""

from __future__ import annotations

import asyncio
import json
import math
import time
import uuid
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect

from . import game as game_mod
from .calibration import CalibrationCurve, fit_quintic, run_schedule
from .game import GameConfig
from .sensor import Category, FsrChannel, SensorSpec, SimulatedGlove
from .session import Group, ProtocolConfig, TrialSpec, build_protocol_plan
from .wire import RawFrame, StreamParser, encode_frame

PROTOCOL_VERSION = 1
FORCE_INPUT_STALE_S = 0.5
STATE_QUEUE_LIMIT = 64


@dataclass
class GatewayConfig:
    host: str = "127.0.0.1"
    port: int = 8765
    tick_hz: int = 60
    data_dir: Path = Path("./presstrain-data")
    source_kind: str = "simulated"  # simulated | serial | tcp
    source_seed: int = 0
    serial_device: str | None = None
    serial_baud: int = 115200
    tcp_address: str | None = None
    channel: int = 0  # index fingertip
    curve_path: Path | None = None
    accel: float = 1.0  # wall-clock speed multiplier; <= 0 means free-run
    game: GameConfig = field(default_factory=GameConfig)
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)

    def __post_init__(self):
        if not 30 <= self.tick_hz <= 240:
            raise ValueError("tick_hz must be within [30, 240]")
        if self.source_kind not in ("simulated", "serial", "tcp"):
            raise ValueError(f"unknown source kind {self.source_kind!r}")
        if not 0 <= self.channel < 12:
            raise ValueError("channel must be 0..11")
        self.data_dir = Path(self.data_dir)

    @property
    def dt_s(self) -> float:
        return 1.0 / self.tick_hz

    def to_dict(self) -> dict:
        return {
            "v": PROTOCOL_VERSION,
            "tick_hz": self.tick_hz,
            "source_kind": self.source_kind,
            "channel": self.channel,
            "accel": self.accel,
            "game": {
                "force_levels_N": list(self.game.force_levels_N),
                "collision_buffer_N": self.game.collision_buffer_N,
                "max_force_N": self.game.max_force_N,
                "run_length_units": self.game.run_length_units,
                "coin_value": self.game.coin_value,
            },
            "protocol": {
                "targets": list(self.protocol.targets),
                "training_minutes": self.protocol.training_minutes,
                "trial_duration_s": self.protocol.trial_duration_s,
            },
        }


class SimulatedGloveByteSource:
    """Simulated glove emitting one wire frame per pump; kill() mimics loss."""

    def __init__(self, seed: int):
        self.glove = SimulatedGlove(seed=seed)
        self.seq = 0
        self.t_us = 0
        self.alive = True

    def set_force(self, channel: int, newtons: float) -> None:
        self.glove.set_force(channel, newtons)

    def pump(self, dt_s: float) -> bytes:
        if not self.alive:
            return b""
        counts = self.glove.step(dt_s)
        frame = RawFrame(seq=self.seq, timestamp_us=self.t_us, channels=tuple(counts))
        self.seq = (self.seq + 1) % 256
        self.t_us += int(dt_s * 1e6)
        return encode_frame(frame)

    def kill(self) -> None:
        self.alive = False

    def close(self) -> None:
        self.alive = False


class TcpByteSource:
    """Frames arriving over a plain TCP socket (a real glove bridge)."""

    def __init__(self, address: str):
        import socket

        host, _, port = address.partition(":")
        self.sock = socket.create_connection((host, int(port)), timeout=5.0)
        self.sock.setblocking(False)
        self.alive = True

    def pump(self, dt_s: float) -> bytes:
        if not self.alive:
            return b""
        try:
            data = self.sock.recv(4096)
            if data == b"":
                self.alive = False
            return data
        except (BlockingIOError, InterruptedError):
            return b""
        except OSError:
            self.alive = False
            return b""

    def kill(self) -> None:
        self.close()

    def close(self) -> None:
        try:
            self.sock.close()
        finally:
            self.alive = False


class SerialByteSource:
    """Raw reads from a serial device node opened non-blocking."""

    def __init__(self, device: str, baud: int):
        import os

        self.fd = os.open(device, os.O_RDONLY | os.O_NONBLOCK)
        self.alive = True

    def pump(self, dt_s: float) -> bytes:
        import os

        if not self.alive:
            return b""
        try:
            return os.read(self.fd, 4096)
        except BlockingIOError:
            return b""
        except OSError:
            self.alive = False
            return b""

    def kill(self) -> None:
        self.close()

    def close(self) -> None:
        import os

        if self.alive:
            os.close(self.fd)
            self.alive = False


def _make_source(cfg: GatewayConfig):
    if cfg.source_kind == "simulated":
        return SimulatedGloveByteSource(cfg.source_seed)
    if cfg.source_kind == "tcp":
        if not cfg.tcp_address:
            raise ValueError("tcp source needs tcp_address")
        return TcpByteSource(cfg.tcp_address)
    if not cfg.serial_device:
        raise ValueError("serial source needs serial_device")
    return SerialByteSource(cfg.serial_device, cfg.serial_baud)


_CURVE_CACHE: dict[int, CalibrationCurve] = {}


def _default_curve(cfg: GatewayConfig) -> CalibrationCurve:
    if cfg.curve_path:
        return CalibrationCurve.from_json(Path(cfg.curve_path).read_text())
    # self-calibrate against a twin of the simulated fingertip channel
    if cfg.source_seed not in _CURVE_CACHE:
        twin = FsrChannel(spec=SensorSpec.small(), seed=cfg.source_seed + 1)
        points = run_schedule(twin, Category.SMALL, dt_s=0.02)
        _CURVE_CACHE[cfg.source_seed] = fit_quintic(points)
    return _CURVE_CACHE[cfg.source_seed]


class Subscriber:
    """Per-connection queues: droppable state frames, lossless events."""

    def __init__(self):
        self.states: deque[dict] = deque(maxlen=STATE_QUEUE_LIMIT)
        self.events: deque[dict] = deque()
        self.wake = asyncio.Event()

    def push(self, message: dict, droppable: bool) -> None:
        if droppable:
            self.states.append(message)  # deque maxlen drops the oldest
        else:
            self.events.append(message)
        self.wake.set()


@dataclass
class SessionRecord:
    id: str
    group: Group
    participant_id: str
    mode: str
    created_at: float
    status: str = "running"
    trials: list[dict] = field(default_factory=list)
    game_scores: list[int] = field(default_factory=list)
    events_path: Path | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "group": self.group.value,
            "participant_id": self.participant_id,
            "mode": self.mode,
            "created_at": self.created_at,
            "status": self.status,
            "game_scores": self.game_scores,
            "trials": self.trials,
        }


class GameActivity:
    """One runner round; tick() returns True when the run is over."""

    def __init__(self, hub: "Hub", record: SessionRecord):
        self.hub = hub
        self.record = record
        self.state = game_mod.new_game(hub.config.source_seed, hub.config.game)

    def tick(self, force_n: float) -> bool:
        state, events = game_mod.tick(self.state, force_n)
        hub = self.hub
        for ev in events:
            if isinstance(ev, game_mod.CoinCollected):
                hub.broadcast(
                    {"type": "score", "value": state.score, "coin_level_N": ev.level_N},
                    droppable=False,
                )
            else:
                hub.broadcast({"type": "score", "value": ev.score, "final": True},
                              droppable=False)
        hub.broadcast({"type": "game_state", **state.snapshot()}, droppable=True)
        if state.finished:
            self.record.game_scores.append(state.score)
            hub.log_event(self.record, {"event": "game_finished", "score": state.score})
        return state.finished


class HoldActivity:
    """One target-hold trial sampled once per driver tick."""

    def __init__(self, hub: "Hub", record: SessionRecord, spec: TrialSpec,
                 recorded: bool = True):
        self.hub = hub
        self.record = record
        self.spec = spec
        self.recorded = recorded
        self.samples: list[float] = []
        self.n_target = max(1, int(round(spec.duration_s * hub.config.tick_hz)))
        hub.broadcast({"type": "trial_event", "event": "started",
                       "target_N": spec.target_N, "visual": spec.visual_feedback},
                      droppable=False)

    def tick(self, force_n: float) -> bool:
        hub = self.hub
        self.samples.append(force_n)
        remaining = (self.n_target - len(self.samples)) * hub.config.dt_s
        hub.broadcast(
            {
                "type": "scale_state",
                "target_N": self.spec.target_N,
                "remaining_s": max(0.0, remaining),
                "visual": self.spec.visual_feedback,
                # the no-visual test must not leak the live force
                "force_N": force_n if self.spec.visual_feedback else None,
            },
            droppable=True,
        )
        if len(self.samples) < self.n_target:
            return False
        mu = math.fsum(self.samples) / len(self.samples)
        delta = abs(mu - self.spec.target_N)
        trial = {
            "target_N": self.spec.target_N,
            "visual_feedback": self.spec.visual_feedback,
            "mu_N": mu,
            "delta_N": delta,
            "n_samples": len(self.samples),
            "recorded": self.recorded,
        }
        self.record.trials.append(trial)
        hub.log_event(self.record, {"event": "trial_completed", **trial})
        hub.broadcast({"type": "trial_event", "event": "completed", **trial},
                      droppable=False)
        return True


class ProtocolActivity:
    """Walks the group's full phase plan on the live force feed."""

    def __init__(self, hub: "Hub", record: SessionRecord):
        self.hub = hub
        self.record = record
        self.plan = build_protocol_plan(record.group, hub.config.protocol)
        self.index = -1
        self.rest_left = 0.0
        self.sub: GameActivity | HoldActivity | None = None
        self.done = False
        self._advance()

    def _advance(self) -> None:
        self.index += 1
        hub = self.hub
        if self.index >= len(self.plan):
            hub.log_event(self.record, {"event": "protocol_completed"})
            self.done = True
            return
        phase = self.plan[self.index]
        hub.broadcast({"type": "trial_event", "event": "phase",
                       "phase": phase.kind, "index": self.index,
                       "target_N": phase.target_N, "visual": phase.visual},
                      droppable=False)
        if phase.kind == "rest":
            self.rest_left = phase.duration_s
            self.sub = None
        elif phase.kind == "game_round":
            self.sub = GameActivity(hub, self.record)
        else:  # practice_hold or trial
            spec = TrialSpec(
                target_N=phase.target_N,
                duration_s=phase.duration_s,
                sample_interval_ms=1000.0 / hub.config.tick_hz,
                visual_feedback=phase.visual,
            )
            self.sub = HoldActivity(hub, self.record, spec,
                                    recorded=(phase.kind == "trial" and phase.recorded))

    def tick(self, force_n: float) -> bool:
        if self.done:
            return True
        phase = self.plan[self.index]
        if phase.kind == "rest":
            self.rest_left -= self.hub.config.dt_s
            if self.rest_left <= 0:
                self._advance()
            return self.done
        if self.sub is None or self.sub.tick(force_n):
            self._advance()
        return self.done


class Hub:
    """Owner of all live state; only the driver task mutates it."""

    def __init__(self, config: GatewayConfig):
        self.config = config
        self.source = _make_source(config)
        self.parser = StreamParser()
        self.curve = _default_curve(config)
        self.subscribers: list[Subscriber] = []
        self.sessions: dict[str, SessionRecord] = {}
        self.activity: GameActivity | HoldActivity | ProtocolActivity | None = None
        self.active_session: SessionRecord | None = None
        self.glove_force_n = 0.0
        self.ws_force_n: float | None = None
        self.ws_force_at = 0.0
        self.t_s = 0.0
        self.tick_count = 0
        self.running = False
        self._task: asyncio.Task | None = None
        config.data_dir.mkdir(parents=True, exist_ok=True)
        (config.data_dir / "sessions").mkdir(exist_ok=True)

    # -- driver -----------------------------------------------------------

    async def run(self) -> None:
        self.running = True
        loop = asyncio.get_running_loop()
        dt = self.config.dt_s
        accel = self.config.accel
        next_t = loop.time()
        while self.running:
            self.tick_once()
            if accel > 0:
                next_t += dt / accel
                delay = next_t - loop.time()
                if delay > 0:
                    await asyncio.sleep(delay)
                else:
                    next_t = loop.time()  # behind schedule: don't spiral
            else:
                await asyncio.sleep(0)

    def tick_once(self) -> None:
        cfg = self.config
        dt = cfg.dt_s
        self.t_s += dt
        self.tick_count += 1

        data = self.source.pump(dt)
        if data:
            frames, _errors = self.parser.feed(data)
            for frame in frames:
                counts = frame.channels[cfg.channel]
                self.glove_force_n = self.curve.estimate(counts).newtons
        if not self.source.alive and self.activity is not None:
            self.abort_activity("source_lost")
            return

        force = self.glove_force_n
        if self.ws_force_n is not None and (time.monotonic() - self.ws_force_at) < FORCE_INPUT_STALE_S:
            force = self.ws_force_n
        if force < 0.0:
            force = 0.0

        if self.activity is not None and self.activity.tick(force):
            self.finish_activity("complete")

    # -- activity & session management -------------------------------------

    def start_session(self, group: Group, participant_id: str, mode: str) -> SessionRecord:
        if mode not in ("game", "hold", "protocol"):
            raise ValueError(f"unknown mode {mode!r}")
        sid = uuid.uuid4().hex[:12]
        record = SessionRecord(
            id=sid, group=group, participant_id=participant_id, mode=mode,
            created_at=time.time(),
            events_path=self.config.data_dir / "sessions" / f"{sid}.jsonl",
        )
        self.sessions[sid] = record
        self.log_event(record, {"event": "session_started", "mode": mode,
                                "group": group.value})
        self.active_session = record
        if mode == "game":
            self.activity = GameActivity(self, record)
        elif mode == "protocol":
            self.activity = ProtocolActivity(self, record)
        else:
            self.activity = None  # waits for a start_trial control message
        return record

    def start_trial(self, target_n: float, visual: bool, duration_s: float | None = None) -> None:
        if self.active_session is None:
            raise ValueError("no active session")
        spec = TrialSpec(
            target_N=target_n,
            duration_s=duration_s or self.config.protocol.trial_duration_s,
            sample_interval_ms=1000.0 / self.config.tick_hz,
            visual_feedback=visual,
        )
        self.activity = HoldActivity(self, self.active_session, spec)

    def finish_activity(self, status: str) -> None:
        if self.active_session is not None:
            self.active_session.status = status
        self.activity = None

    def abort_activity(self, reason: str) -> None:
        record = self.active_session
        if record is not None:
            record.status = f"aborted:{reason}"
            self.log_event(record, {"event": "trial_aborted", "reason": reason})
        self.broadcast({"type": "trial_event", "event": "trial_aborted",
                        "reason": reason}, droppable=False)
        self.activity = None

    # -- messaging ----------------------------------------------------------

    def broadcast(self, message: dict, droppable: bool) -> None:
        message = {"v": PROTOCOL_VERSION, "t_server_s": self.t_s,
                   "tick": self.tick_count, **message}
        for sub in self.subscribers:
            sub.push(message, droppable)

    def log_event(self, record: SessionRecord, event: dict) -> None:
        if record.events_path is None:
            return
        with record.events_path.open("a") as fh:
            fh.write(json.dumps({"t_s": self.t_s, **event}) + "\n")

    def handle_client_message(self, msg: dict) -> None:
        kind = msg.get("type")
        if kind == "force_input":
            self.ws_force_n = float(msg.get("newtons", 0.0))
            self.ws_force_at = time.monotonic()
        elif kind == "control":
            action = msg.get("action")
            if action == "set_target" or action == "start_trial":
                self.start_trial(
                    float(msg.get("target_N", 2.0)),
                    bool(msg.get("visual", True)),
                    msg.get("duration_s"),
                )
            elif action == "abort":
                self.abort_activity("client_abort")
            elif action == "kill_source":  # test/ops hook for source loss
                self.source.kill()
            elif action == "start_game":
                if self.active_session is not None:
                    self.activity = GameActivity(self, self.active_session)

    # -- export ---------------------------------------------------------------

    def export_session(self, session_id: str) -> dict:
        record = self.sessions.get(session_id)
        if record is None:
            raise KeyError(session_id)
        payload = record.to_dict()
        out_dir = self.config.data_dir / "sessions"
        json_path = out_dir / f"{session_id}.json"
        csv_path = out_dir / f"{session_id}.csv"
        _atomic_write(json_path, json.dumps(payload, indent=2))
        rows = ["participant,group,target_N,mu_N,delta_N"]
        for t in record.trials:
            if t.get("recorded", True):
                rows.append(
                    f"{record.participant_id},{record.group.value},"
                    f"{t['target_N']},{t['mu_N']},{t['delta_N']}"
                )
        _atomic_write(csv_path, "\n".join(rows) + "\n")
        return payload

    def shutdown(self) -> None:
        self.running = False
        self.source.close()


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    tmp.replace(path)


def create_app(config: GatewayConfig | None = None) -> FastAPI:
    from contextlib import asynccontextmanager

    config = config or GatewayConfig()
    hub = Hub(config)

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        hub._task = asyncio.create_task(hub.run())
        try:
            yield
        finally:
            hub.shutdown()
            if hub._task:
                hub._task.cancel()

    app = FastAPI(title="presstrain gateway", lifespan=lifespan)
    app.state.hub = hub

    @app.get("/api/config")
    async def get_config() -> dict:
        return config.to_dict()

    @app.post("/api/session")
    async def post_session(body: dict) -> dict:
        try:
            group = Group(body.get("group", "game_trained"))
            record = hub.start_session(
                group, str(body.get("participant_id", "anonymous")),
                str(body.get("mode", "game")),
            )
        except ValueError as e:
            raise HTTPException(status_code=422, detail=str(e))
        return {"v": PROTOCOL_VERSION, "id": record.id}

    @app.get("/api/session/{session_id}/export")
    async def get_export(session_id: str) -> dict:
        try:
            return hub.export_session(session_id)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session id")

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        sub = Subscriber()
        hub.subscribers.append(sub)

        async def sender() -> None:
            while True:
                await sub.wake.wait()
                sub.wake.clear()
                while sub.events:
                    await ws.send_json(sub.events.popleft())
                while sub.states:
                    await ws.send_json(sub.states.popleft())

        async def receiver() -> None:
            while True:
                msg = await ws.receive_json()
                hub.handle_client_message(msg)

        try:
            done, pending = await asyncio.wait(
                [asyncio.create_task(sender()), asyncio.create_task(receiver())],
                return_when=asyncio.FIRST_EXCEPTION,
            )
            for task in pending:
                task.cancel()
        except WebSocketDisconnect:
            pass
        finally:
            if sub in hub.subscribers:
                hub.subscribers.remove(sub)

    return app


def serve(config: GatewayConfig | None = None) -> None:
    """Run until shutdown; bind/source failures surface as startup errors."""
    import uvicorn

    config = config or GatewayConfig()
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
