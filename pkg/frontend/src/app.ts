/** DOM wiring for the explorer. All logic lives in state/sequencer/api. */

import { ApiClient, ApiFieldError } from "./api.js";
import {
  ExplorerState,
  INTERACTIVE_TRIALS,
  N_MAX,
  N_MIN,
  REFINE_TRIALS,
  initialState,
  isStrictQuorum,
  selectPreset,
  setN,
  setR,
  setW,
  sweepGrid,
  toScenario,
} from "./state.js";
import { RECOMPUTE_DEBOUNCE_MS, Sequencer, debounce } from "./sequencer.js";
import type { PresetsResponse, SweepPointRow } from "./types.js";

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el as T;
}

const presetSelect = byId<HTMLSelectElement>("preset");
const nInput = byId<HTMLInputElement>("n");
const rInput = byId<HTMLInputElement>("r");
const wInput = byId<HTMLInputElement>("w");
const wanToggle = byId<HTMLInputElement>("wan");
const remoteInput = byId<HTMLInputElement>("remote-ms");
const tMaxInput = byId<HTMLInputElement>("t-max");
const refineButton = byId<HTMLButtonElement>("refine");
const badge = byId<HTMLSpanElement>("strict-badge");
const errorBox = byId<HTMLDivElement>("errors");
const curveSvg = byId<HTMLElement>("curve");
const latencyTable = byId<HTMLTableElement>("latency");
const provenance = byId<HTMLDivElement>("provenance");

const api = new ApiClient();
const sequencer = new Sequencer();
let state: ExplorerState = initialState();
let presets: PresetsResponse | null = null;

function setControlsEnabled(enabled: boolean): void {
  for (const el of [presetSelect, nInput, rInput, wInput, wanToggle, remoteInput, tMaxInput, refineButton]) {
    el.disabled = !enabled;
  }
}

function syncControls(): void {
  nInput.min = String(N_MIN);
  nInput.max = String(N_MAX);
  nInput.value = String(state.n);
  // r and w slider maxima follow the n slider
  rInput.max = String(state.n);
  wInput.max = String(state.n);
  rInput.value = String(state.r);
  wInput.value = String(state.w);
  wanToggle.checked = state.wan;
  remoteInput.value = String(state.remoteExtraMs);
  badge.hidden = !isStrictQuorum(state);
}

function showError(message: string | null): void {
  errorBox.textContent = message ?? "";
  errorBox.hidden = message === null;
}

function renderCurve(points: SweepPointRow[]): void {
  const width = 640;
  const height = 240;
  const tMax = Math.max(...points.map((p) => p.t_ms), 1);
  const x = (t: number) => 40 + (t / tMax) * (width - 60);
  const y = (c: number) => height - 20 - c * (height - 40);
  const line = points
    .map((p, i) => `${i === 0 ? "M" : "L"}${x(p.t_ms).toFixed(1)},${y(p.consistency_smoothed).toFixed(1)}`)
    .join(" ");
  const band =
    points.map((p) => `${x(p.t_ms).toFixed(1)},${y(p.ci95_hi).toFixed(1)}`).join(" ") +
    " " +
    [...points].reverse().map((p) => `${x(p.t_ms).toFixed(1)},${y(p.ci95_lo).toFixed(1)}`).join(" ");
  const markers = [0.9, 0.99, 0.999]
    .map((target) => {
      const hit = points.find((p) => p.consistency_smoothed >= target);
      if (!hit) return "";
      return `<line x1="${x(hit.t_ms)}" y1="20" x2="${x(hit.t_ms)}" y2="${height - 20}" stroke="#999" stroke-dasharray="3,3"/>` +
        `<text x="${x(hit.t_ms) + 2}" y="30" font-size="10">${(target * 100).toFixed(1)}%</text>`;
    })
    .join("");
  curveSvg.innerHTML =
    `<polygon points="${band}" fill="#8fb3ff" opacity="0.35"/>` +
    `<path d="${line}" fill="none" stroke="#1f4fd1" stroke-width="2"/>` +
    markers;
  curveSvg.classList.remove("stale");
}

function renderLatency(read: Record<string, number>, write: Record<string, number>): void {
  const keys = Object.keys(read);
  latencyTable.innerHTML =
    "<tr><th>percentile</th><th>read ms</th><th>write ms</th></tr>" +
    keys
      .map((k) => `<tr><td>${k}</td><td>${read[k]?.toFixed(3)}</td><td>${write[k]?.toFixed(3)}</td></tr>`)
      .join("");
  latencyTable.classList.remove("stale");
}

async function recompute(): Promise<void> {
  showError(null);
  curveSvg.classList.add("stale");
  latencyTable.classList.add("stale");
  const scenario = toScenario(state);
  const sweepSeq = sequencer.issue("sweep");
  const latencySeq = sequencer.issue("latency");
  try {
    const [sweep, latency] = await Promise.all([
      api.sweep({ ...scenario, t_grid: sweepGrid(state) }),
      api.latency(scenario),
    ]);
    if (sequencer.accept("sweep", sweepSeq)) {
      renderCurve(sweep.result.points);
      provenance.textContent = `seed ${sweep.config.seed}, ${sweep.config.trials} trials`;
    }
    if (sequencer.accept("latency", latencySeq)) {
      renderLatency(latency.result.read_ms, latency.result.write_ms);
    }
  } catch (err) {
    if (err instanceof ApiFieldError) {
      showError(`${err.field}: ${err.message}`);
    } else {
      showError(String(err));
    }
  }
}

const scheduleRecompute = debounce(() => void recompute(), RECOMPUTE_DEBOUNCE_MS);

function update(next: ExplorerState): void {
  state = next;
  syncControls();
  scheduleRecompute();
}

nInput.addEventListener("input", () => update(setN(state, Number(nInput.value))));
rInput.addEventListener("input", () => update(setR(state, Number(rInput.value))));
wInput.addEventListener("input", () => update(setW(state, Number(wInput.value))));
wanToggle.addEventListener("change", () => update({ ...state, wan: wanToggle.checked }));
remoteInput.addEventListener("change", () =>
  update({ ...state, remoteExtraMs: Number(remoteInput.value) }),
);
tMaxInput.addEventListener("change", () => update({ ...state, tMaxMs: Number(tMaxInput.value) }));
presetSelect.addEventListener("change", () => {
  const entry = presets?.presets[presetSelect.value];
  if (entry) update(selectPreset(state, presetSelect.value, entry));
});
refineButton.addEventListener("click", () => {
  update({ ...state, trials: state.trials === REFINE_TRIALS ? INTERACTIVE_TRIALS : REFINE_TRIALS });
});

async function boot(): Promise<void> {
  setControlsEnabled(false);
  try {
    presets = await api.presets();
  } catch (err) {
    showError(`service unreachable: ${String(err)}`);
    return; // degraded state: controls stay disabled
  }
  presetSelect.innerHTML = Object.keys(presets.presets)
    .map((name) => `<option value="${name}">${name}</option>`)
    .join("");
  const first = Object.keys(presets.presets)[0];
  if (first) {
    const entry = presets.presets[first];
    if (entry) state = selectPreset(state, first, entry);
    presetSelect.value = first;
  }
  setControlsEnabled(true);
  syncControls();
  void recompute();
}

void boot();
