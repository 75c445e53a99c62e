/** Entry point: wire the socket to the views and the input to the socket. */

import { CoinChime } from "./audio.js";
import { Connection } from "./connection.js";
import { ForceInput } from "./forceInput.js";
import { GameView } from "./gameView.js";
import { InvestigatorPanel } from "./investigatorPanel.js";
import { ScaleView } from "./scaleView.js";

function byId(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el;
}

export function boot(): void {
  const params = new URLSearchParams(location.search);
  const host = params.get("gateway") ?? location.host;
  const wsUrl = `ws://${host}/ws`;

  const game = new GameView(byId("game"));
  const scale = new ScaleView(byId("scale"));
  const chime = new CoinChime();
  let lastScore = 0;
  let sessionId: string | null = null;

  const conn = new Connection({
    url: wsUrl,
    onMessage: (msg) => {
      switch (msg.type) {
        case "game_state":
          game.render(msg);
          break;
        case "scale_state":
          scale.render(msg);
          break;
        case "score":
          game.onScore(msg);
          if (msg.value > lastScore && !msg.final) chime.play();
          lastScore = msg.value;
          break;
        case "trial_event":
          scale.onTrialEvent(msg);
          break;
      }
    },
    onStatus: (s) => {
      byId("status").textContent = s;
    },
  });
  conn.start();

  new ForceInput(byId("force-input"), {
    onForce: (newtons) => conn.send({ type: "force_input", newtons }),
  });

  new InvestigatorPanel(byId("panel"), {
    onControl: (msg) => conn.send(msg),
    fetchExport: async () => {
      if (!sessionId) throw new Error("no session");
      const r = await fetch(`http://${host}/api/session/${sessionId}/export`);
      if (!r.ok) throw new Error(`export failed: ${r.status}`);
      return r.json();
    },
  });

  byId("new-session").addEventListener("click", async () => {
    const mode = (byId("mode") as HTMLSelectElement).value;
    const group = (byId("group") as HTMLSelectElement).value;
    const r = await fetch(`http://${host}/api/session`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ group, participant_id: "browser", mode }),
    });
    const body = (await r.json()) as { id: string };
    sessionId = body.id;
    byId("session-id").textContent = sessionId;
  });
}

if (typeof document !== "undefined" && document.getElementById("game")) {
  boot();
}
