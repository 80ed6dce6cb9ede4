/** Axis-aligned box with one entry per coordinate. */
export interface BoxSpace {
  low: number[];
  high: number[];
}

export interface ResetResult {
  observation: number[];
  info: Record<string, unknown>;
}

export interface StepInfo {
  a_star: number[];
  tilde_r: number;
  hat_r: number;
  r: number;
  regret: [number, number];
  clip_fraction: number;
}

export interface StepResult {
  observation: number[];
  reward: number;
  terminated: boolean;
  truncated: boolean;
  info: StepInfo;
}

/** The config echo embedded in environment and dataset manifests. */
export interface CoreConfig {
  format_version: number;
  n_state: number;
  n_action: number;
  reward_interval: number;
  min_reward: number;
  survival_difficulty: number;
  policy_complexity: number;
  horizon: number;
  master_seed: number;
}

export interface DatasetManifest {
  format_version: number;
  config: CoreConfig;
  nu: number;
  n_transitions: number;
  n_episodes: number;
  mean_tilde_r: number;
  checksums: { records: string };
}

/**
 * Column-major view of an offline dataset: n rows, matrix columns flattened
 * row-major (row i of `s` is s.subarray(i * n_state, (i + 1) * n_state)).
 */
export interface DatasetColumns {
  n: number;
  n_state: number;
  n_action: number;
  s: Float64Array;
  a: Float64Array;
  a_star: Float64Array;
  R: Float64Array;
  r_step: Float64Array;
  tilde_r: Float64Array;
  s_next: Float64Array;
  flags: Uint8Array;
  manifest: DatasetManifest;
}

export const FLAG_TERMINATED = 0x01;
export const FLAG_TRUNCATED = 0x02;
