/** Target-hold display: live force readout, target marker, countdown timer.
 *
 * During no-visual test trials the force readout element is not merely
 * hidden, it does not exist in the DOM: nothing on the page carries the
 * live force magnitude while feedback is withheld. The countdown stays.
 */

import { ScaleStateMsg, TrialEventMsg } from "./protocol.js";

export class ScaleView {
  readonly root: HTMLElement;
  private readonly target: HTMLElement;
  private readonly countdown: HTMLElement;
  private readonly status: HTMLElement;
  private forceBox: HTMLElement | null = null;

  constructor(root: HTMLElement) {
    this.root = root;
    root.classList.add("scale-view");
    root.innerHTML = `
      <div class="target" data-role="target"></div>
      <div class="countdown" data-role="countdown"></div>
      <div class="trial-status" data-role="status"></div>`;
    this.target = must(root, "[data-role=target]");
    this.countdown = must(root, "[data-role=countdown]");
    this.status = must(root, "[data-role=status]");
  }

  render(state: ScaleStateMsg): void {
    this.target.textContent = `Target: ${state.target_N} N`;
    this.countdown.textContent = `${state.remaining_s.toFixed(1)} s`;

    if (state.visual && state.force_N !== null) {
      if (!this.forceBox) {
        this.forceBox = document.createElement("div");
        this.forceBox.className = "force-readout";
        this.forceBox.dataset.role = "force-readout";
        this.root.appendChild(this.forceBox);
      }
      this.forceBox.textContent = `${state.force_N.toFixed(2)} N`;
    } else {
      this.removeForceReadout();
    }
  }

  onTrialEvent(msg: TrialEventMsg): void {
    if (msg.event === "started") {
      this.status.textContent = msg.visual ? "trial (visual feedback)" : "trial (no visual)";
      if (!msg.visual) this.removeForceReadout();
    } else if (msg.event === "completed") {
      this.status.textContent = "trial complete";
      this.removeForceReadout();
    } else if (msg.event === "trial_aborted") {
      this.status.textContent = `trial aborted (${msg.reason ?? "unknown"})`;
      this.removeForceReadout();
    } else if (msg.event === "phase") {
      this.status.textContent = `phase: ${msg.phase}`;
    }
  }

  private removeForceReadout(): void {
    if (this.forceBox) {
      this.forceBox.remove();
      this.forceBox = null;
    }
  }
}

function must(root: HTMLElement, selector: string): HTMLElement {
  const el = root.querySelector<HTMLElement>(selector);
  if (!el) throw new Error(`missing element ${selector}`);
  return el;
}
