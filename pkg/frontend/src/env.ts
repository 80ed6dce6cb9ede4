import { spawn, type ChildProcessWithoutNullStreams } from "node:child_process";
import { readFileSync } from "node:fs";
import type {
  BoxSpace,
  CoreConfig,
  ResetResult,
  StepResult,
} from "./types.js";

export interface AdapterOptions {
  /** Interpreter used to host the core; override for virtualenvs. */
  pythonBin?: string;
}

interface Pending {
  resolve: (reply: Record<string, unknown>) => void;
  reject: (err: Error) => void;
}

/**
 * Standard reset/step adapter over one core environment process.
 *
 * The core owns every number: this class only ships JSON lines across the
 * process boundary, so adapter trajectories are identical to core
 * trajectories down to the last bit.  Requests are strictly serialized
 * (one reply per request, FIFO); use one adapter per thread.
 */
export class AdapterEnv {
  readonly manifestPath: string;
  readonly config: CoreConfig;
  readonly observationSpace: BoxSpace;
  readonly actionSpace: BoxSpace;

  private child: ChildProcessWithoutNullStreams;
  private pending: Pending[] = [];
  private buffer = "";
  private closed = false;

  constructor(manifestPath: string, options: AdapterOptions = {}) {
    this.manifestPath = manifestPath;
    // environment manifests are flat: config fields at the top level
    const manifest = JSON.parse(readFileSync(manifestPath, "utf-8"));
    this.config = manifest as CoreConfig;
    const obsDims = this.config.n_state + 2; // state, progress, accrual
    this.observationSpace = {
      low: new Array(obsDims).fill(0),
      high: new Array(obsDims).fill(1),
    };
    this.actionSpace = {
      low: new Array(this.config.n_action).fill(0),
      high: new Array(this.config.n_action).fill(1),
    };
    this.child = spawn(
      options.pythonBin ?? "python3",
      ["-m", "sme.cli", "serve", "--env", manifestPath],
      { stdio: ["pipe", "pipe", "pipe"] },
    );
    this.child.stdout.setEncoding("utf-8");
    this.child.stdout.on("data", (chunk: string) => this.onData(chunk));
    this.child.on("error", (err) => this.failAll(err));
    this.child.on("exit", (code) => {
      if (this.pending.length > 0) {
        this.failAll(new Error(`core process exited with code ${code}`));
      }
    });
  }

  private onData(chunk: string): void {
    this.buffer += chunk;
    let newline: number;
    while ((newline = this.buffer.indexOf("\n")) >= 0) {
      const line = this.buffer.slice(0, newline);
      this.buffer = this.buffer.slice(newline + 1);
      const waiter = this.pending.shift();
      if (waiter === undefined) continue; // unsolicited line; drop
      let reply: Record<string, unknown>;
      try {
        reply = JSON.parse(line);
      } catch {
        waiter.reject(new Error(`core sent unparseable reply: ${line}`));
        continue;
      }
      if (typeof reply.error === "string") {
        waiter.reject(new Error(reply.error));
      } else {
        waiter.resolve(reply);
      }
    }
  }

  private failAll(err: Error): void {
    const waiters = this.pending;
    this.pending = [];
    for (const waiter of waiters) waiter.reject(err);
  }

  private request(msg: Record<string, unknown>): Promise<Record<string, unknown>> {
    if (this.closed) {
      return Promise.reject(new Error("adapter already closed"));
    }
    return new Promise((resolve, reject) => {
      this.pending.push({ resolve, reject });
      this.child.stdin.write(JSON.stringify(msg) + "\n");
    });
  }

  async reset(episodeSeed?: number): Promise<ResetResult> {
    const reply = await this.request({
      op: "reset",
      episode_seed: episodeSeed ?? null,
    });
    return { observation: reply.observation as number[], info: {} };
  }

  async step(action: number[]): Promise<StepResult> {
    const reply = await this.request({ op: "step", action });
    return reply as unknown as StepResult;
  }

  /** Optimal action for the state the environment currently sits in. */
  async optimalAction(): Promise<number[]> {
    const reply = await this.request({ op: "optimal" });
    return reply.a_star as number[];
  }

  async close(): Promise<void> {
    if (this.closed) return;
    this.closed = true;
    const done = new Promise<void>((resolve) => {
      this.child.once("exit", () => resolve());
    });
    try {
      await new Promise((resolve, reject) => {
        this.pending.push({ resolve, reject });
        this.child.stdin.write(JSON.stringify({ op: "close" }) + "\n");
      });
    } catch {
      // a dying process is acceptable during close
    }
    this.child.stdin.end();
    await done;
  }
}
