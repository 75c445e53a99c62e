/** Held analog control standing in for fingertip pressure.
 *
 * A vertical press-and-drag bar: deflection from the bottom maps to
 * 0..max Newtons through a configurable curve. While engaged, the value is
 * sampled and sent on a fixed timer at >= 30 Hz; release snaps to 0 N.
 */

export interface ForceInputOptions {
  maxForceN?: number;
  /** exponent of the deflection curve; 1 = linear */
  gamma?: number;
  sendHz?: number;
  onForce: (newtons: number) => void;
}

/** Deflection in [0,1] to Newtons through the configured curve. */
export function mapDeflection(deflection: number, maxForceN: number, gamma: number): number {
  const d = Math.min(Math.max(deflection, 0), 1);
  return maxForceN * Math.pow(d, gamma);
}

export class ForceInput {
  readonly root: HTMLElement;
  private readonly fill: HTMLElement;
  private readonly opts: Required<ForceInputOptions>;
  private engaged = false;
  private deflection = 0;
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(root: HTMLElement, opts: ForceInputOptions) {
    this.root = root;
    this.opts = { maxForceN: 10, gamma: 1, sendHz: 40, ...opts };
    if (this.opts.sendHz < 30) throw new Error("force input must sample at >= 30 Hz");
    root.classList.add("force-input");
    root.innerHTML = `<div class="force-fill" data-role="fill"></div>`;
    const fill = root.querySelector<HTMLElement>("[data-role=fill]");
    if (!fill) throw new Error("missing fill element");
    this.fill = fill;

    root.addEventListener("pointerdown", (ev) => this.engage(ev));
    root.addEventListener("pointermove", (ev) => this.track(ev));
    root.addEventListener("pointerup", () => this.release());
    root.addEventListener("pointercancel", () => this.release());
    root.addEventListener("lostpointercapture", () => this.release());
  }

  get newtons(): number {
    if (!this.engaged) return 0;
    return mapDeflection(this.deflection, this.opts.maxForceN, this.opts.gamma);
  }

  private engage(ev: PointerEvent): void {
    this.engaged = true;
    if (typeof this.root.setPointerCapture === "function") {
      try {
        this.root.setPointerCapture(ev.pointerId);
      } catch {
        /* jsdom has no pointer capture */
      }
    }
    this.track(ev);
    this.startTimer();
  }

  private track(ev: PointerEvent): void {
    if (!this.engaged) return;
    const rect = this.root.getBoundingClientRect();
    const height = rect.height || 1;
    this.deflection = 1 - (ev.clientY - rect.top) / height;
    this.deflection = Math.min(Math.max(this.deflection, 0), 1);
    this.fill.style.height = `${this.deflection * 100}%`;
  }

  private release(): void {
    if (!this.engaged) return;
    this.engaged = false;
    this.deflection = 0;
    this.fill.style.height = "0%";
    this.stopTimer();
    this.opts.onForce(0);
  }

  private startTimer(): void {
    this.stopTimer();
    const interval = 1000 / this.opts.sendHz;
    this.timer = setInterval(() => this.opts.onForce(this.newtons), interval);
  }

  private stopTimer(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
