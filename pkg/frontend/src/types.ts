/** JSON shapes exchanged with the staleness service. */

export interface DistributionConfig {
  type: string;
  [param: string]: unknown;
}

export interface TopologyConfig {
  type: "uniform" | "wan";
  remote_extra_ms?: number;
}

export interface PresetEntry {
  distributions: { w: DistributionConfig; a: DistributionConfig; r: DistributionConfig; s: DistributionConfig };
  topology: TopologyConfig;
}

export interface PresetsResponse {
  presets: Record<string, PresetEntry>;
}

export interface ScenarioRequest {
  quorum: { n: number; r: number; w: number };
  preset?: string;
  distributions?: PresetEntry["distributions"];
  topology?: TopologyConfig;
  trials: number;
  seed?: number;
  t?: number;
  t_grid?: number[];
  sla?: Record<string, unknown>;
}

export interface SweepPointRow {
  t_ms: number;
  consistency: number;
  consistency_smoothed: number;
  ci95_lo: number;
  ci95_hi: number;
  trials: number;
  seed: number;
}

export interface ApiEnvelope<T> {
  config: Record<string, unknown> & { seed: number; trials: number };
  result: T;
  timing_ms: number;
  warnings?: string[];
}

export interface SweepResult {
  points: SweepPointRow[];
}

export interface LatencyResult {
  read_ms: Record<string, number>;
  write_ms: Record<string, number>;
  trials: number;
}

export interface FieldError {
  field: string;
  message: string;
}
