/** WebSocket client: reconnects with backoff, re-renders from the stream.
 *
 * The UI is stateless across reconnects by design: the server broadcasts
 * full snapshots continuously, so a fresh socket just resumes rendering.
 */

import { ClientMessage, parseServerMessage, ServerMessage } from "./protocol.js";

export type MessageHandler = (msg: ServerMessage) => void;

export interface ConnectionOptions {
  url: string;
  onMessage: MessageHandler;
  onStatus?: (status: "connecting" | "open" | "closed") => void;
  reconnectDelayMs?: number;
  /** injectable for tests */
  socketFactory?: (url: string) => WebSocket;
}

export class Connection {
  private ws: WebSocket | null = null;
  private closed = false;
  private readonly opts: Required<Pick<ConnectionOptions, "reconnectDelayMs">> &
    ConnectionOptions;

  constructor(opts: ConnectionOptions) {
    this.opts = { reconnectDelayMs: 1000, ...opts };
  }

  start(): void {
    this.closed = false;
    this.dial();
  }

  private dial(): void {
    const { url, onMessage, onStatus, socketFactory } = this.opts;
    onStatus?.("connecting");
    const ws = socketFactory ? socketFactory(url) : new WebSocket(url);
    this.ws = ws;
    ws.addEventListener("open", () => onStatus?.("open"));
    ws.addEventListener("message", (ev: MessageEvent) => {
      const msg = parseServerMessage(String(ev.data));
      if (msg) onMessage(msg);
    });
    ws.addEventListener("close", () => {
      onStatus?.("closed");
      this.ws = null;
      if (!this.closed) {
        setTimeout(() => this.dial(), this.opts.reconnectDelayMs);
      }
    });
    ws.addEventListener("error", () => {
      try {
        ws.close();
      } catch {
        /* already closing */
      }
    });
  }

  send(msg: ClientMessage): void {
    if (this.ws && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(JSON.stringify(msg));
    }
  }

  stop(): void {
    this.closed = true;
    this.ws?.close();
  }
}
