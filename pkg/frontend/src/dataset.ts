import { readFileSync } from "node:fs";
import type { DatasetColumns, DatasetManifest } from "./types.js";

const MAGIC = "SMEDATA1";

/**
 * FNV-1a 64 in 16-bit limbs; plain doubles hold every intermediate exactly
 * (largest product is 0xffff * 0x1b3 plus a carry, far below 2^53).
 */
export function fnv1a64Hex(data: Uint8Array): string {
  let h0 = 0x2325;
  let h1 = 0x8422;
  let h2 = 0x9ce4;
  let h3 = 0xcbf2;
  const p0 = 0x01b3; // prime 0x100000001b3 has only two nonzero limbs
  const p2 = 0x0100;
  for (let i = 0; i < data.length; i++) {
    h0 ^= data[i]!;
    const r0 = h0 * p0;
    const r1 = h1 * p0;
    const r2 = h2 * p0 + h0 * p2;
    const r3 = h3 * p0 + h1 * p2;
    h0 = r0 & 0xffff;
    let carry = (r0 - h0) / 0x10000;
    const t1 = r1 + carry;
    h1 = t1 & 0xffff;
    carry = (t1 - h1) / 0x10000;
    const t2 = r2 + carry;
    h2 = t2 & 0xffff;
    carry = (t2 - h2) / 0x10000;
    h3 = (r3 + carry) & 0xffff;
  }
  return [h3, h2, h1, h0]
    .map((v) => v.toString(16).padStart(4, "0"))
    .join("");
}

export function recordSize(nState: number, nAction: number): number {
  return 8 * (2 * nState + 2 * nAction + 3) + 1;
}

/**
 * Decode a <prefix>.bin / <prefix>.json dataset pair into columnar arrays.
 *
 * Validation mirrors the core reader: magic, record count vs. manifest,
 * payload length, and the FNV-1a checksum all have to agree before any
 * numbers are returned.
 */
export function loadDataset(pathPrefix: string): DatasetColumns {
  const manifest = JSON.parse(
    readFileSync(pathPrefix + ".json", "utf-8"),
  ) as DatasetManifest;
  if (manifest.format_version !== 1) {
    throw new Error(
      `unsupported dataset format_version ${manifest.format_version}`,
    );
  }
  const nState = manifest.config.n_state;
  const nAction = manifest.config.n_action;
  const blob = readFileSync(pathPrefix + ".bin");
  if (blob.length < 12) {
    throw new Error("file too short for a record count");
  }
  if (blob.toString("latin1", 0, 8) !== MAGIC) {
    throw new Error(`bad magic ${blob.toString("latin1", 0, 8)}`);
  }
  const count = blob.readUInt32LE(8);
  if (count !== manifest.n_transitions) {
    throw new Error(
      `record count ${count} disagrees with manifest n_transitions ` +
        `${manifest.n_transitions}`,
    );
  }
  const payload = blob.subarray(12);
  const size = recordSize(nState, nAction);
  if (payload.length !== count * size) {
    throw new Error(
      `truncated file: payload ends inside record ` +
        `${Math.floor(payload.length / size)}`,
    );
  }
  if (fnv1a64Hex(payload) !== manifest.checksums.records) {
    throw new Error("record checksum mismatch");
  }

  const columns: DatasetColumns = {
    n: count,
    n_state: nState,
    n_action: nAction,
    s: new Float64Array(count * nState),
    a: new Float64Array(count * nAction),
    a_star: new Float64Array(count * nAction),
    R: new Float64Array(count),
    r_step: new Float64Array(count),
    tilde_r: new Float64Array(count),
    s_next: new Float64Array(count * nState),
    flags: new Uint8Array(count),
    manifest,
  };
  const view = new DataView(
    payload.buffer,
    payload.byteOffset,
    payload.byteLength,
  );
  for (let i = 0; i < count; i++) {
    let at = i * size;
    for (let j = 0; j < nState; j++, at += 8) {
      columns.s[i * nState + j] = view.getFloat64(at, true);
    }
    for (let j = 0; j < nAction; j++, at += 8) {
      columns.a[i * nAction + j] = view.getFloat64(at, true);
    }
    for (let j = 0; j < nAction; j++, at += 8) {
      columns.a_star[i * nAction + j] = view.getFloat64(at, true);
    }
    columns.R[i] = view.getFloat64(at, true);
    at += 8;
    columns.r_step[i] = view.getFloat64(at, true);
    at += 8;
    columns.tilde_r[i] = view.getFloat64(at, true);
    at += 8;
    for (let j = 0; j < nState; j++, at += 8) {
      columns.s_next[i * nState + j] = view.getFloat64(at, true);
    }
    columns.flags[i] = payload[at]!;
  }
  return columns;
}
