export { AdapterEnv, type AdapterOptions } from "./env.js";
export { fnv1a64Hex, loadDataset, recordSize } from "./dataset.js";
export { make, register, type MakeOptions } from "./registry.js";
export type {
  BoxSpace,
  CoreConfig,
  DatasetColumns,
  DatasetManifest,
  ResetResult,
  StepInfo,
  StepResult,
} from "./types.js";
export { FLAG_TERMINATED, FLAG_TRUNCATED } from "./types.js";
