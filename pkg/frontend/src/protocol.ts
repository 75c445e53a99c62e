/** Wire types of the gateway's WebSocket/HTTP schema (all messages carry v). */

export const PROTOCOL_VERSION = 1;

export interface CoinState {
  x_units: number;
  level_N: number;
  collected: boolean;
}

export interface GameStateMsg {
  v: number;
  type: "game_state";
  t_s: number;
  bird_x_units: number;
  bird_force_alt_N: number;
  raw_force_N: number;
  score: number;
  speed: number;
  next_coin_level_N: number | null;
  finished: boolean;
  run_length_units: number;
  max_force_N: number;
  coins: CoinState[];
}

export interface ScaleStateMsg {
  v: number;
  type: "scale_state";
  target_N: number;
  remaining_s: number;
  visual: boolean;
  /** null whenever the trial withholds visual feedback. */
  force_N: number | null;
}

export interface TrialEventMsg {
  v: number;
  type: "trial_event";
  event: string;
  target_N?: number;
  visual?: boolean;
  mu_N?: number;
  delta_N?: number;
  phase?: string;
  reason?: string;
}

export interface ScoreMsg {
  v: number;
  type: "score";
  value: number;
  coin_level_N?: number;
  final?: boolean;
}

export type ServerMessage = GameStateMsg | ScaleStateMsg | TrialEventMsg | ScoreMsg;

export interface ForceInputMsg {
  type: "force_input";
  newtons: number;
}

export interface ControlMsg {
  type: "control";
  action: "start_trial" | "start_game" | "abort" | "kill_source";
  target_N?: number;
  visual?: boolean;
  duration_s?: number;
}

export type ClientMessage = ForceInputMsg | ControlMsg;

const SERVER_TYPES = new Set(["game_state", "scale_state", "trial_event", "score"]);

/** Parse one raw frame; unknown or unversioned payloads return null. */
export function parseServerMessage(raw: string): ServerMessage | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const msg = data as Record<string, unknown>;
  if (msg.v !== PROTOCOL_VERSION) return null;
  if (typeof msg.type !== "string" || !SERVER_TYPES.has(msg.type)) return null;
  return data as ServerMessage;
}
