/** Investigator toolkit: target buttons, session controls, export. */

import { ControlMsg } from "./protocol.js";

export interface PanelOptions {
  targets?: number[];
  onControl: (msg: ControlMsg) => void;
  /** returns the export payload; wired to GET /api/session/{id}/export */
  fetchExport: () => Promise<unknown>;
}

export class InvestigatorPanel {
  readonly root: HTMLElement;
  private selectedTarget: number;
  private readonly opts: Required<Pick<PanelOptions, "targets">> & PanelOptions;

  constructor(root: HTMLElement, opts: PanelOptions) {
    this.root = root;
    this.opts = { targets: [2, 3, 5], ...opts };
    this.selectedTarget = this.opts.targets[0] ?? 2;
    root.classList.add("investigator-panel");

    const targetRow = document.createElement("div");
    targetRow.className = "target-buttons";
    for (const t of this.opts.targets) {
      const btn = document.createElement("button");
      btn.dataset.role = "target-btn";
      btn.dataset.target = String(t);
      btn.textContent = `${t} N`;
      btn.addEventListener("click", () => this.selectTarget(t, btn));
      targetRow.appendChild(btn);
    }
    root.appendChild(targetRow);

    root.appendChild(this.button("start-visual", "Start trial (visual)", () =>
      this.opts.onControl({
        type: "control", action: "start_trial",
        target_N: this.selectedTarget, visual: true,
      }),
    ));
    root.appendChild(this.button("start-blind", "Start trial (no visual)", () =>
      this.opts.onControl({
        type: "control", action: "start_trial",
        target_N: this.selectedTarget, visual: false,
      }),
    ));
    root.appendChild(this.button("start-game", "Start game round", () =>
      this.opts.onControl({ type: "control", action: "start_game" }),
    ));
    root.appendChild(this.button("abort", "Abort", () =>
      this.opts.onControl({ type: "control", action: "abort" }),
    ));
    root.appendChild(this.button("export", "Export session", () => {
      void this.download();
    }));
  }

  get target(): number {
    return this.selectedTarget;
  }

  private selectTarget(t: number, btn: HTMLElement): void {
    this.selectedTarget = t;
    this.root
      .querySelectorAll("[data-role=target-btn]")
      .forEach((b) => b.classList.toggle("selected", b === btn));
  }

  private button(role: string, label: string, onClick: () => void): HTMLElement {
    const btn = document.createElement("button");
    btn.dataset.role = role;
    btn.textContent = label;
    btn.addEventListener("click", onClick);
    return btn;
  }

  private async download(): Promise<void> {
    const payload = await this.opts.fetchExport();
    const blob = new Blob([JSON.stringify(payload, null, 2)], {
      type: "application/json",
    });
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = "session.json";
    a.click();
    URL.revokeObjectURL(a.href);
  }
}
