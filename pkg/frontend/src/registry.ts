import { AdapterEnv, type AdapterOptions } from "./env.js";

export interface MakeOptions extends AdapterOptions {
  /** Path to an environment manifest produced by `sme gen`. */
  manifest: string;
}

type Factory = (options: MakeOptions) => AdapterEnv;

const registry = new Map<string, Factory>();

export function register(id: string, factory: Factory): void {
  registry.set(id, factory);
}

/** Instantiate a registered environment id, e.g. make("SME-v0", {...}). */
export function make(id: string, options: MakeOptions): AdapterEnv {
  const factory = registry.get(id);
  if (factory === undefined) {
    throw new Error(`unknown environment id ${id}`);
  }
  return factory(options);
}

register("SME-v0", (options) => new AdapterEnv(options.manifest, options));
