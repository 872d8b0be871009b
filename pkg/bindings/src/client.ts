/**
 * Bridge process client.
 *
 * Spawns the engine's bridge server (`python -m gridrealm.bridge`) and
 * speaks its length-prefixed JSON protocol over stdin/stdout. The server
 * answers strictly one reply per request in order, so pending promises
 * form a FIFO queue; concurrent requests from one client are safe.
 *
 * One client can host many independent environment handles.
 */

import { spawn, type ChildProcessByStdio } from "node:child_process";
import type { Readable, Writable } from "node:stream";

import { BridgeError, errorFromReply, isErrorReply } from "./errors.js";
import { encodeFrame, FrameDecoder } from "./frames.js";

/** Protocol revision this client implements. */
export const PROTOCOL_VERSION = 1;

export interface BridgeClientOptions {
  /** Interpreter used to launch the bridge server (default: python3). */
  pythonPath?: string;
  /** Extra environment variables for the server process. */
  env?: NodeJS.ProcessEnv;
}

interface Pending {
  resolve: (reply: Record<string, unknown>) => void;
  reject: (error: Error) => void;
  op: string;
}

export class BridgeClient {
  private readonly proc: ChildProcessByStdio<Writable, Readable, null>;
  private readonly decoder = new FrameDecoder();
  private readonly pending: Pending[] = [];
  private readonly exited: Promise<number | null>;
  private closed = false;

  constructor(options: BridgeClientOptions = {}) {
    const python = options.pythonPath ?? process.env.GRIDREALM_PYTHON ?? "python3";
    this.proc = spawn(python, ["-m", "gridrealm.bridge"], {
      stdio: ["pipe", "pipe", "inherit"],
      env: options.env ?? process.env,
    });
    this.proc.stdout.on("data", (chunk: Buffer) => {
      for (const frame of this.decoder.push(chunk)) {
        this.dispatch(frame as Record<string, unknown>);
      }
    });
    this.exited = new Promise((resolve) => {
      this.proc.on("exit", (code) => {
        this.closed = true;
        this.failPending(new BridgeError(`bridge process exited (code ${code})`));
        resolve(code);
      });
    });
    this.proc.on("error", (err) => {
      this.closed = true;
      this.failPending(new BridgeError(`bridge process failed: ${err.message}`));
    });
  }

  /** Process id of the bridge server (for diagnostics and leak checks). */
  get pid(): number | undefined {
    return this.proc.pid;
  }

  get isClosed(): boolean {
    return this.closed;
  }

  private dispatch(reply: Record<string, unknown>): void {
    const next = this.pending.shift();
    if (!next) {
      // A reply with no matching request means the framing broke.
      this.closed = true;
      this.proc.kill();
      return;
    }
    if (isErrorReply(reply)) {
      next.reject(errorFromReply(reply, next.op));
    } else {
      next.resolve(reply);
    }
  }

  private failPending(error: Error): void {
    while (this.pending.length > 0) {
      this.pending.shift()!.reject(error);
    }
  }

  /** Send one request and await its reply. Rejects on engine errors. */
  request(message: Record<string, unknown>): Promise<Record<string, unknown>> {
    if (this.closed) {
      return Promise.reject(new BridgeError("bridge client is closed"));
    }
    const op = String(message.op ?? "");
    return new Promise((resolve, reject) => {
      this.pending.push({ resolve, reject, op });
      this.proc.stdin.write(encodeFrame(message), (err) => {
        if (err) {
          this.failPending(new BridgeError(`write failed: ${err.message}`));
        }
      });
    });
  }

  /** Round-trip liveness/version check. */
  async ping(): Promise<number> {
    const reply = await this.request({ op: "ping" });
    return Number(reply.protocol_version);
  }

  /** Ask the server to exit, then wait for the process to end. */
  async shutdown(): Promise<void> {
    if (this.closed) {
      return;
    }
    try {
      await this.request({ op: "shutdown" });
    } finally {
      this.closed = true;
      this.proc.stdin.end();
      await this.exited;
    }
  }

  /** Force-kill the server without the shutdown handshake. */
  kill(): void {
    this.closed = true;
    this.proc.kill();
    this.failPending(new BridgeError("bridge client was killed"));
  }
}
