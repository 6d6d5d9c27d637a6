/** Explorer state and its pure update rules.
 *
 * All probability math lives in the service; this module only enforces
 * control invariants (r <= n, w <= n under every interaction sequence) and
 * derives display flags from the current selection.
 */

import type { ApiEnvelope, LatencyResult, PresetEntry, SweepResult } from "./types.js";

export const N_MIN = 1;
export const N_MAX = 10;
export const INTERACTIVE_TRIALS = 100_000;
export const REFINE_TRIALS = 10_000_000;

export interface ExplorerState {
  preset: string | null;
  custom: PresetEntry | null;
  n: number;
  r: number;
  w: number;
  wan: boolean;
  remoteExtraMs: number;
  tMaxMs: number;
  trials: number;
  pending: boolean;
  sweep: ApiEnvelope<SweepResult> | null;
  latency: ApiEnvelope<LatencyResult> | null;
}

export function initialState(): ExplorerState {
  return {
    preset: null,
    custom: null,
    n: 3,
    r: 1,
    w: 1,
    wan: false,
    remoteExtraMs: 75,
    tMaxMs: 100,
    trials: INTERACTIVE_TRIALS,
    pending: false,
    sweep: null,
    latency: null,
  };
}

function clampInt(value: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, Math.round(value)));
}

/** Shrink r and w so they never exceed the replica count. */
export function setN(state: ExplorerState, n: number): ExplorerState {
  const next = clampInt(n, N_MIN, N_MAX);
  return { ...state, n: next, r: Math.min(state.r, next), w: Math.min(state.w, next) };
}

export function setR(state: ExplorerState, r: number): ExplorerState {
  return { ...state, r: clampInt(r, 1, state.n) };
}

export function setW(state: ExplorerState, w: number): ExplorerState {
  return { ...state, w: clampInt(w, 1, state.n) };
}

/** Reads always overlap the latest write when the quorums must intersect. */
export function isStrictQuorum(state: ExplorerState): boolean {
  return state.r + state.w > state.n;
}

export function selectPreset(state: ExplorerState, name: string, entry: PresetEntry): ExplorerState {
  return {
    ...state,
    preset: name,
    custom: entry,
    wan: entry.topology.type === "wan",
    remoteExtraMs: entry.topology.remote_extra_ms ?? state.remoteExtraMs,
  };
}

/** Geometric-ish grid from 0 to tMaxMs for the consistency curve. */
export function sweepGrid(state: ExplorerState, points = 12): number[] {
  const grid = [0];
  let t = Math.max(state.tMaxMs / 2 ** (points - 2), 0.05);
  while (grid.length < points && t < state.tMaxMs) {
    grid.push(Number(t.toFixed(3)));
    t *= 2;
  }
  grid.push(state.tMaxMs);
  return grid;
}

export function toScenario(state: ExplorerState): Record<string, unknown> {
  const body: Record<string, unknown> = {
    quorum: { n: state.n, r: state.r, w: state.w },
    trials: state.trials,
  };
  if (state.preset) {
    body.preset = state.preset;
  } else if (state.custom) {
    body.distributions = state.custom.distributions;
  }
  if (state.wan) {
    body.topology = { type: "wan", remote_extra_ms: state.remoteExtraMs };
  }
  return body;
}
