/** Runner-game view: bird, coins, next-coin panel, score, finish screen.
 *
 * The only force math here is the linear screen mapping: the vertical axis
 * spans 0..max_force_N bottom-to-top. Everything else mirrors server state.
 */

import { GameStateMsg, ScoreMsg } from "./protocol.js";

/** Vertical pixel for a force value on a screen of the given height. */
export function yForForce(forceN: number, maxForceN: number, heightPx: number): number {
  const clamped = Math.min(Math.max(forceN, 0), maxForceN);
  return (1 - clamped / maxForceN) * heightPx;
}

/** Horizontal pixel for a world x, with the bird pinned at 20% of the width. */
export function xForWorld(
  worldX: number,
  birdX: number,
  widthPx: number,
  unitsVisible: number,
): number {
  return (0.2 + (worldX - birdX) / unitsVisible) * widthPx;
}

export interface GameViewOptions {
  unitsVisible?: number; // world units across the viewport
}

export class GameView {
  readonly root: HTMLElement;
  private readonly field: HTMLElement;
  private readonly bird: HTMLElement;
  private readonly nextCoin: HTMLElement;
  private readonly scoreBox: HTMLElement;
  private readonly finishScreen: HTMLElement;
  private readonly coinPool = new Map<number, HTMLElement>();
  private readonly unitsVisible: number;

  constructor(root: HTMLElement, opts: GameViewOptions = {}) {
    this.root = root;
    this.unitsVisible = opts.unitsVisible ?? 30;
    root.classList.add("game-view");
    root.innerHTML = `
      <div class="game-field" data-role="field">
        <div class="bird" data-role="bird"></div>
      </div>
      <div class="info-panel">
        <div class="next-coin" data-role="next-coin"></div>
        <div class="score" data-role="score">0</div>
      </div>
      <div class="finish-screen" data-role="finish" hidden></div>`;
    this.field = must(root, "[data-role=field]");
    this.bird = must(root, "[data-role=bird]");
    this.nextCoin = must(root, "[data-role=next-coin]");
    this.scoreBox = must(root, "[data-role=score]");
    this.finishScreen = must(root, "[data-role=finish]");
  }

  render(state: GameStateMsg): void {
    const h = this.field.clientHeight || 600;
    const w = this.field.clientWidth || 800;
    this.bird.style.top = `${yForForce(state.bird_force_alt_N, state.max_force_N, h)}px`;
    this.bird.style.left = `${0.2 * w}px`;

    // coins: one element per index, positioned at their level height
    state.coins.forEach((coin, i) => {
      let el = this.coinPool.get(i);
      if (!el) {
        el = document.createElement("div");
        el.className = "coin";
        el.dataset.role = "coin";
        this.field.appendChild(el);
        this.coinPool.set(i, el);
      }
      const x = xForWorld(coin.x_units, state.bird_x_units, w, this.unitsVisible);
      el.style.left = `${x}px`;
      el.style.top = `${yForForce(coin.level_N, state.max_force_N, h)}px`;
      el.classList.toggle("collected", coin.collected);
      el.hidden = coin.collected || x < -40 || x > w + 40;
    });

    this.nextCoin.textContent =
      state.next_coin_level_N === null ? "—" : `${state.next_coin_level_N} N`;
    this.scoreBox.textContent = String(state.score);

    if (state.finished) {
      this.finishScreen.hidden = false;
      this.finishScreen.textContent = `Final score: ${state.score}`;
    } else {
      this.finishScreen.hidden = true;
    }
  }

  onScore(msg: ScoreMsg): void {
    this.scoreBox.textContent = String(msg.value);
    if (msg.final) {
      this.finishScreen.hidden = false;
      this.finishScreen.textContent = `Final score: ${msg.value}`;
    }
  }
}

function must(root: HTMLElement, selector: string): HTMLElement {
  const el = root.querySelector<HTMLElement>(selector);
  if (!el) throw new Error(`missing element ${selector}`);
  return el;
}
