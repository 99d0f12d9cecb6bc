// DOM wiring of the explorer: parameter panel on the left, the
// design-efficiency chart in the center, and the risk timeline of the
// selected point at the bottom. All numbers shown come from the service;
// nothing is recomputed client-side.

import { ApiClient, ApiError } from "./api.js";
import { countPointMarkers, curveChart, riskTimeline } from "./charts.js";
import {
  DEFAULT_PARAMS,
  ExplorationState,
  initialState,
  loadSession,
  phasesFor,
  pinSnapshot,
  revertToPin,
  saveSession,
  unpin,
  validateParams,
} from "./state.js";
import type { Curve, CurveProgress, NetworkParamsForm, Phase, StrategyInfo } from "./types.js";

const api = new ApiClient();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

class App {
  state: ExplorationState;
  strategies: StrategyInfo[] = [];
  private curvesAbort: AbortController | null = null;
  private analyzeAbort: AbortController | null = null;
  private stabilisationByPoint: Record<string, number> = {};

  constructor() {
    this.state = loadSession(sessionStorage) ?? initialState();
  }

  async start(): Promise<void> {
    this.strategies = await api.strategies();
    if (this.state.selectedKinds.length === 0) {
      this.state.selectedKinds = this.strategies.map((s) => s.kind);
    }
    for (const s of this.strategies) {
      if (!this.state.thresholds[s.kind]) {
        this.state.thresholds[s.kind] = [...s.defaultThresholds];
      }
    }
    this.renderForm();
    this.renderStrategyPicker();
    this.renderPins();
    this.drawCurves(this.state.lastCurves);
    this.drawTimelinePlaceholder();
    el<HTMLButtonElement>("commit").addEventListener("click", () => void this.commit());
    el<HTMLButtonElement>("pin").addEventListener("click", () => this.pinCurrent());
    el<HTMLButtonElement>("reset-params").addEventListener("click", () => {
      this.state.params = { ...DEFAULT_PARAMS };
      this.renderForm();
      void this.commit();
    });
    el<HTMLSelectElement>("phase").addEventListener("change", (event) => {
      this.state.phase = (event.target as HTMLSelectElement).value as Phase | "both";
      void this.commit();
    });
  }

  private paramInputIds: (keyof NetworkParamsForm)[] = ["max", "rJoin", "rLeave", "rMessage", "pComp", "k"];

  renderForm(): void {
    for (const name of this.paramInputIds) {
      el<HTMLInputElement>(`param-${name}`).value = String(this.state.params[name]);
    }
    el<HTMLSelectElement>("phase").value = this.state.phase;
  }

  readForm(): Partial<NetworkParamsForm> {
    const out: Partial<NetworkParamsForm> = {};
    for (const name of this.paramInputIds) {
      out[name] = Number(el<HTMLInputElement>(`param-${name}`).value);
    }
    return out;
  }

  renderStrategyPicker(): void {
    const container = el<HTMLDivElement>("strategies");
    container.innerHTML = "";
    for (const s of this.strategies) {
      const row = document.createElement("label");
      row.className = "strategy-row";
      const box = document.createElement("input");
      box.type = "checkbox";
      box.checked = this.state.selectedKinds.includes(s.kind);
      box.addEventListener("change", () => {
        this.state.selectedKinds = box.checked
          ? [...this.state.selectedKinds, s.kind]
          : this.state.selectedKinds.filter((k) => k !== s.kind);
        void this.commit();
      });
      row.appendChild(box);
      const text = document.createElement("span");
      text.textContent = ` ${s.kind} (${s.thresholdUnit.toLowerCase()}: ${this.state.thresholds[s.kind].join(", ")})`;
      row.appendChild(text);
      container.appendChild(row);
    }
  }

  setError(message: string): void {
    el<HTMLDivElement>("form-error").textContent = message;
  }

  async commit(): Promise<void> {
    const form = this.readForm();
    const problems = validateParams(form);
    if (problems.length > 0) {
      this.setError(problems.join("; "));
      return;
    }
    this.setError("");
    this.state.params = form as NetworkParamsForm;
    if (this.state.selectedKinds.length === 0) {
      this.state.lastCurves = [];
      this.drawCurves([]);
      this.persist();
      return;
    }
    // supersede any in-flight request: one curves request at a time
    this.curvesAbort?.abort();
    const controller = new AbortController();
    this.curvesAbort = controller;
    el<HTMLDivElement>("status").textContent = "computing...";
    const incremental = new Map<string, Curve>();
    const onProgress = (p: CurveProgress) => {
      const key = `${p.kind}|${p.phase}`;
      const curve = incremental.get(key) ?? { kind: p.kind, phase: p.phase, points: [] };
      curve.points = [...curve.points, p.point];
      incremental.set(key, curve);
      this.drawCurves([...incremental.values()]);
    };
    try {
      const document = await api.curves(
        {
          kinds: this.state.selectedKinds,
          thresholds: Object.fromEntries(
            this.state.selectedKinds.map((k) => [k, this.state.thresholds[k]]),
          ),
          params: this.apiParams(),
          phases: phasesFor(this.state.phase),
        },
        onProgress,
        controller.signal,
      );
      if (controller !== this.curvesAbort) return; // superseded meanwhile
      this.state.lastCurves = document.curves;
      this.drawCurves(document.curves);
      el<HTMLDivElement>("status").textContent = "";
      this.persist();
    } catch (error) {
      if ((error as DOMException).name === "AbortError") return;
      el<HTMLDivElement>("status").textContent = "";
      this.setError(error instanceof ApiError ? `service: ${error.message}` : String(error));
    }
  }

  apiParams(): Partial<NetworkParamsForm> {
    return { ...this.state.params };
  }

  drawCurves(curves: Curve[]): void {
    const host = el<HTMLDivElement>("curve-chart");
    host.innerHTML = curveChart(curves, {
      pinned: this.state.pinned.map((p) => ({ label: p.label, curves: p.curves })),
      stabilisationByPoint: this.stabilisationByPoint,
    });
    host.querySelectorAll<SVGElement>(".point").forEach((marker) => {
      marker.addEventListener("click", () => {
        const kind = marker.dataset.kind!;
        const threshold = Number(marker.dataset.threshold);
        this.state.selectedPoint = { kind, threshold };
        void this.showTimeline(kind, threshold);
      });
    });
  }

  async showTimeline(kind: string, threshold: number): Promise<void> {
    this.analyzeAbort?.abort();
    const controller = new AbortController();
    this.analyzeAbort = controller;
    try {
      const record = await api.analyze(kind, threshold, this.apiParams(), controller.signal);
      this.stabilisationByPoint[`${kind}/${threshold}`] = record.stabilisationMonth;
      el<HTMLDivElement>("timeline").innerHTML = riskTimeline(record.monthlyRisk, {
        steadyRisk: record.steadyRisk,
        stabilisationMonth: record.stabilisationMonth,
        title: `${kind} threshold ${threshold}: max risk ${(100 * record.maxRisk).toFixed(3)}%, cost ${record.costPostMonthly.toFixed(3)}/month after stabilisation`,
      });
      this.persist();
    } catch (error) {
      if ((error as DOMException).name === "AbortError") return;
      this.setError(error instanceof ApiError ? `service: ${error.message}` : String(error));
    }
  }

  drawTimelinePlaceholder(): void {
    el<HTMLDivElement>("timeline").innerHTML = riskTimeline([], {
      steadyRisk: 0,
      stabilisationMonth: 1,
    });
  }

  pinCurrent(): void {
    if (this.state.lastCurves.length === 0) return;
    const label = `pin ${this.state.pinned.length + 1} (pComp=${this.state.params.pComp})`;
    pinSnapshot(this.state, label, { curves: this.state.lastCurves });
    this.renderPins();
    this.drawCurves(this.state.lastCurves);
    this.persist();
  }

  renderPins(): void {
    const host = el<HTMLDivElement>("pins");
    host.innerHTML = "";
    for (const pin of this.state.pinned) {
      const row = document.createElement("div");
      row.className = "pin-row";
      const name = document.createElement("span");
      name.textContent = pin.label;
      row.appendChild(name);
      const revert = document.createElement("button");
      revert.textContent = "revert";
      revert.addEventListener("click", () => {
        revertToPin(this.state, pin);
        this.renderForm();
        void this.commit();
      });
      row.appendChild(revert);
      const remove = document.createElement("button");
      remove.textContent = "unpin";
      remove.addEventListener("click", () => {
        unpin(this.state, pin.label);
        this.renderPins();
        this.drawCurves(this.state.lastCurves);
        this.persist();
      });
      row.appendChild(remove);
      host.appendChild(row);
    }
  }

  persist(): void {
    saveSession(this.state, sessionStorage);
  }
}

declare global {
  interface Window {
    keyfluxApp: App;
  }
}

window.addEventListener("DOMContentLoaded", () => {
  const app = new App();
  window.keyfluxApp = app;
  void app.start().catch((error) => {
    el<HTMLDivElement>("form-error").textContent = `failed to reach the analysis service: ${error}`;
  });
});

export { App, countPointMarkers };
