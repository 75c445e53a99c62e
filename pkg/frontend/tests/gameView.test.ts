/** Game view: linear force-to-pixel mapping, mirroring of server state. */

import { beforeEach, describe, expect, it } from "vitest";

import { GameStateMsg } from "../src/protocol.js";
import { GameView, yForForce } from "../src/gameView.js";

function gameState(overrides: Partial<GameStateMsg> = {}): GameStateMsg {
  return {
    v: 1,
    type: "game_state",
    t_s: 1.0,
    bird_x_units: 10,
    bird_force_alt_N: 5,
    raw_force_N: 5,
    score: 0,
    speed: 3,
    next_coin_level_N: 3,
    finished: false,
    run_length_units: 450,
    max_force_N: 10,
    coins: [
      { x_units: 15, level_N: 2, collected: false },
      { x_units: 20, level_N: 5, collected: true },
    ],
    ...overrides,
  };
}

describe("yForForce", () => {
  it("maps 0..10 N linearly bottom to top", () => {
    const h = 600;
    expect(yForForce(0, 10, h)).toBeCloseTo(600, 6);
    expect(yForForce(10, 10, h)).toBeCloseTo(0, 6);
    expect(yForForce(5, 10, h)).toBeCloseTo(300, 6);
    expect(yForForce(2.5, 10, h)).toBeCloseTo(450, 6);
  });

  it("clamps outside the screen span", () => {
    expect(yForForce(-3, 10, 600)).toBe(600);
    expect(yForForce(25, 10, 600)).toBe(0);
  });
});

describe("GameView", () => {
  let root: HTMLElement;
  let view: GameView;

  beforeEach(() => {
    document.body.innerHTML = `<div id="g"></div>`;
    root = document.getElementById("g")!;
    view = new GameView(root);
  });

  it("positions the bird within 1 px of the linear map", () => {
    // jsdom has zero layout: the view falls back to its 600 px design height
    for (const force of [0, 1, 2.5, 5, 7.5, 10]) {
      view.render(gameState({ bird_force_alt_N: force }));
      const bird = root.querySelector<HTMLElement>("[data-role=bird]")!;
      const y = parseFloat(bird.style.top);
      const expected = (1 - force / 10) * 600;
      expect(Math.abs(y - expected)).toBeLessThanOrEqual(1);
    }
  });

  it("positions coins at their level heights", () => {
    view.render(gameState());
    const coins = root.querySelectorAll<HTMLElement>("[data-role=coin]");
    expect(coins.length).toBe(2);
    const y2 = parseFloat(coins[0]!.style.top);
    expect(Math.abs(y2 - (1 - 2 / 10) * 600)).toBeLessThanOrEqual(1);
  });

  it("mirrors the next-coin level in Newtons exactly", () => {
    view.render(gameState({ next_coin_level_N: 3 }));
    expect(root.querySelector("[data-role=next-coin]")!.textContent).toBe("3 N");
    view.render(gameState({ next_coin_level_N: 5 }));
    expect(root.querySelector("[data-role=next-coin]")!.textContent).toBe("5 N");
    view.render(gameState({ next_coin_level_N: null }));
    expect(root.querySelector("[data-role=next-coin]")!.textContent).toBe("—");
  });

  it("mirrors the score exactly, from states and score events", () => {
    view.render(gameState({ score: 700 }));
    expect(root.querySelector("[data-role=score]")!.textContent).toBe("700");
    view.onScore({ v: 1, type: "score", value: 800 });
    expect(root.querySelector("[data-role=score]")!.textContent).toBe("800");
  });

  it("shows the final score screen when finished", () => {
    view.render(gameState({ finished: true, score: 1200 }));
    const finish = root.querySelector<HTMLElement>("[data-role=finish]")!;
    expect(finish.hidden).toBe(false);
    expect(finish.textContent).toBe("Final score: 1200");
  });

  it("marks collected coins", () => {
    view.render(gameState());
    const coins = root.querySelectorAll<HTMLElement>("[data-role=coin]");
    expect(coins[1]!.classList.contains("collected")).toBe(true);
  });
});
