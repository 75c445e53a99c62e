#!/usr/bin/env python3
"""Regenerate tests/fixtures/gateway_messages.json from a live in-process hub.

Run from the frontend directory with the Python package installed:

    python scripts/capture_fixtures.py
"""

import json
import tempfile
import time
from pathlib import Path

from presstrain.gateway import GatewayConfig, Hub, Subscriber
from presstrain.session import Group


def main() -> None:
    with tempfile.TemporaryDirectory() as td:
        hub = Hub(GatewayConfig(data_dir=Path(td), accel=0.0))
        sub = Subscriber()
        hub.subscribers.append(sub)

        hub.start_session(Group.GAME_TRAINED, "fixture", "game")
        hub.ws_force_n = 3.0
        hub.ws_force_at = time.monotonic()
        for _ in range(5):
            hub.tick_once()
        game_state = next(m for m in reversed(sub.states) if m["type"] == "game_state")

        hub.start_session(Group.APP_TRAINED, "fixture", "hold")
        hub.start_trial(2.0, visual=True, duration_s=0.1)
        for _ in range(10):
            hub.tick_once()
        scale_state = next(m for m in sub.states if m["type"] == "scale_state")
        trial_event = next(m for m in sub.events if m["type"] == "trial_event")

        hub.start_trial(3.0, visual=False, duration_s=0.1)
        for _ in range(3):
            hub.tick_once()
        blind_state = next(
            m for m in reversed(sub.states)
            if m["type"] == "scale_state" and m["force_N"] is None
        )

        fixtures = {
            "game_state": game_state,
            "scale_state_visual": scale_state,
            "scale_state_blind": blind_state,
            "trial_event": trial_event,
            "score": {"v": 1, "t_server_s": 1.0, "tick": 60, "type": "score",
                      "value": 300, "coin_level_N": 3.0},
        }
        out = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
        out.mkdir(parents=True, exist_ok=True)
        (out / "gateway_messages.json").write_text(json.dumps(fixtures, indent=2))
        print(f"wrote {out / 'gateway_messages.json'}")


if __name__ == "__main__":
    main()
