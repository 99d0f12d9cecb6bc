// Exploration state: parameter form, strategy/threshold selection, phase
// toggle, pinned snapshots for comparison, and session persistence.
// Validation mirrors the service's parameter ranges so bad values never
// leave the form.

import type { Curve, CurvesDocument, NetworkParamsForm, Phase } from "./types.js";

export const DEFAULT_PARAMS: NetworkParamsForm = {
  max: 50,
  rJoin: 0.5,
  rLeave: 0.00274,
  rMessage: 1,
  pComp: 0.0001,
  k: 100,
};

export interface PinnedSnapshot {
  label: string;
  params: NetworkParamsForm;
  curves: Curve[];
}

export interface ExplorationState {
  params: NetworkParamsForm;
  selectedKinds: string[];
  thresholds: Record<string, number[]>;
  phase: Phase | "both";
  lastCurves: Curve[];
  selectedPoint: { kind: string; threshold: number } | null;
  pinned: PinnedSnapshot[];
}

export function initialState(): ExplorationState {
  return {
    params: { ...DEFAULT_PARAMS },
    selectedKinds: [],
    thresholds: {},
    phase: "after",
    lastCurves: [],
    selectedPoint: null,
    pinned: [],
  };
}

export function validateParams(form: Partial<NetworkParamsForm>): string[] {
  const problems: string[] = [];
  const check = (name: keyof NetworkParamsForm, ok: (v: number) => boolean, msg: string) => {
    const v = form[name];
    if (v === undefined || Number.isNaN(v) || !ok(v)) problems.push(`${name}: ${msg}`);
  };
  check("max", (v) => Number.isInteger(v) && v >= 1, "integer >= 1 required");
  check("rJoin", (v) => v >= 0, "rate must be >= 0");
  check("rLeave", (v) => v >= 0, "rate must be >= 0");
  check("rMessage", (v) => v >= 0, "rate must be >= 0");
  check("pComp", (v) => v >= 0 && v <= 1, "probability in [0, 1] required");
  check("k", (v) => Number.isInteger(v) && v >= 1, "integer >= 1 required");
  return problems;
}

export function phasesFor(phase: Phase | "both"): Phase[] {
  return phase === "both" ? ["before", "after"] : [phase];
}

// Pins are deep-copied so later edits can never mutate them.
export function pinSnapshot(
  state: ExplorationState,
  label: string,
  document: CurvesDocument,
): PinnedSnapshot {
  const snapshot: PinnedSnapshot = {
    label,
    params: { ...state.params },
    curves: JSON.parse(JSON.stringify(document.curves)),
  };
  state.pinned = [...state.pinned, snapshot];
  return snapshot;
}

export function unpin(state: ExplorationState, label: string): void {
  state.pinned = state.pinned.filter((p) => p.label !== label);
}

export function revertToPin(state: ExplorationState, pin: PinnedSnapshot): void {
  state.params = { ...pin.params };
}

export function curvesEqual(a: Curve[], b: Curve[]): boolean {
  return JSON.stringify(a) === JSON.stringify(b);
}

export function serialize(state: ExplorationState): string {
  return JSON.stringify(state);
}

export function deserialize(raw: string): ExplorationState {
  const parsed = JSON.parse(raw) as ExplorationState;
  const base = initialState();
  return {
    ...base,
    ...parsed,
    params: { ...base.params, ...parsed.params },
  };
}

const STORAGE_KEY = "keyflux-exploration";

export function saveSession(state: ExplorationState, storage: Pick<Storage, "setItem">): void {
  storage.setItem(STORAGE_KEY, serialize(state));
}

export function loadSession(storage: Pick<Storage, "getItem">): ExplorationState | null {
  const raw = storage.getItem(STORAGE_KEY);
  if (!raw) return null;
  try {
    return deserialize(raw);
  } catch {
    return null;
  }
}
