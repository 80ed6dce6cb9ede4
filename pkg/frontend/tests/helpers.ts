import { execFileSync } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export function coreCli(args: string[], cwd: string): string {
  return execFileSync("python3", ["-m", "sme.cli", ...args], {
    cwd,
    encoding: "utf-8",
    maxBuffer: 64 * 1024 * 1024,
  });
}

export function scratchDir(tag: string): string {
  return mkdtempSync(join(tmpdir(), `sme-bindings-${tag}-`));
}

export function genManifest(dir: string, seed = 1): string {
  const path = join(dir, "env.json");
  coreCli(["gen", "--seed", String(seed), "--out", path], dir);
  return path;
}
