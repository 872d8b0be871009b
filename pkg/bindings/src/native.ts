/**
 * Readers for the engine's native artifact files.
 *
 * Both formats open with one JSON header line followed by binary records,
 * all integers little-endian:
 *
 * - replay: per-tick records of `u32 payload_len` then `u64 tick`,
 *   `u32 n_actions`, n_actions x (4 x i64: id, kind, a, b), `u32 n_events`,
 *   n_events x (10 x i64), `u64 post-tick digest`.
 * - observation dump: per step `u32 count` then count x (`i64 agent id` +
 *   `byte_length` raw observation bytes); the reset frame comes first.
 *
 * These let a bindings-driven run be compared byte-for-byte and
 * digest-for-digest against an episode recorded by the engine itself.
 */

import { GridRealmError } from "./errors.js";
import type { ObservationSchema } from "./schema.js";

const EVENT_FIELDS = 10;

export class FormatError extends GridRealmError {}

export interface ActionTriple {
  kind: number;
  a: number;
  b: number;
}

export interface ReplayTick {
  tick: number;
  /** Agent id -> action, in ascending id order. */
  actions: Map<number, ActionTriple>;
  /** Raw event rows appended during this tick (10 i64 fields each). */
  events: number[][];
  /** Post-tick state digest as 16 hex chars. */
  digest: string;
}

export interface ReplayHeader {
  format: string;
  version: number;
  engine: string;
  seed: number;
  config: Record<string, unknown>;
  config_digest: string;
  map_len: number;
  num_agents: number;
}

export interface Replay {
  header: ReplayHeader;
  mapBytes: Uint8Array;
  ticks: ReplayTick[];
}

export interface ObsDumpHeader {
  format: string;
  version: number;
  byte_length: number;
  schema: ObservationSchema;
}

export interface ObsDump {
  header: ObsDumpHeader;
  /** steps[0] is the reset observation set; steps[t] follows tick t. */
  steps: Array<Map<number, Uint8Array>>;
}

function splitHeader(data: Uint8Array, what: string): [unknown, number] {
  const newline = data.indexOf(0x0a);
  if (newline < 0) {
    throw new FormatError(`${what}: missing header line`);
  }
  let header: unknown;
  try {
    header = JSON.parse(new TextDecoder().decode(data.subarray(0, newline)));
  } catch (err) {
    throw new FormatError(`${what}: bad header JSON: ${err}`);
  }
  return [header, newline + 1];
}

function toSafeNumber(value: bigint, what: string): number {
  const num = Number(value);
  if (!Number.isSafeInteger(num)) {
    throw new FormatError(`${what} ${value} exceeds the safe integer range`);
  }
  return num;
}

function digestHex(value: bigint): string {
  return value.toString(16).padStart(16, "0");
}

export function parseReplay(data: Uint8Array): Replay {
  const [rawHeader, bodyStart] = splitHeader(data, "replay");
  const header = rawHeader as ReplayHeader;
  if (header.format !== "gridrealm-replay") {
    throw new FormatError("not a replay file");
  }
  if (header.version !== 1) {
    throw new FormatError(`unsupported replay version ${header.version}`);
  }
  const mapEnd = bodyStart + header.map_len;
  if (mapEnd > data.length) {
    throw new FormatError("truncated map export");
  }
  const mapBytes = data.subarray(bodyStart, mapEnd);
  const view = new DataView(data.buffer, data.byteOffset, data.byteLength);
  const ticks: ReplayTick[] = [];
  let pos = mapEnd;
  while (pos < data.length) {
    if (pos + 4 > data.length) {
      throw new FormatError("truncated record length");
    }
    const length = view.getUint32(pos, true);
    pos += 4;
    const end = pos + length;
    if (end > data.length) {
      throw new FormatError("truncated tick record");
    }
    const tick = toSafeNumber(view.getBigUint64(pos, true), "tick");
    const nActions = view.getUint32(pos + 8, true);
    pos += 12;
    const actions = new Map<number, ActionTriple>();
    for (let i = 0; i < nActions; i += 1) {
      const aid = toSafeNumber(view.getBigInt64(pos, true), "agent id");
      actions.set(aid, {
        kind: toSafeNumber(view.getBigInt64(pos + 8, true), "action kind"),
        a: toSafeNumber(view.getBigInt64(pos + 16, true), "action arg"),
        b: toSafeNumber(view.getBigInt64(pos + 24, true), "action arg"),
      });
      pos += 32;
    }
    const nEvents = view.getUint32(pos, true);
    pos += 4;
    const events: number[][] = [];
    for (let i = 0; i < nEvents; i += 1) {
      const row: number[] = [];
      for (let f = 0; f < EVENT_FIELDS; f += 1) {
        row.push(toSafeNumber(view.getBigInt64(pos + 8 * f, true), "event field"));
      }
      events.push(row);
      pos += 8 * EVENT_FIELDS;
    }
    const digest = digestHex(view.getBigUint64(pos, true));
    pos += 8;
    if (pos !== end) {
      throw new FormatError("tick record has trailing bytes");
    }
    ticks.push({ tick, actions, events, digest });
  }
  return { header, mapBytes, ticks };
}

export function parseObsDump(data: Uint8Array): ObsDump {
  const [rawHeader, bodyStart] = splitHeader(data, "observation dump");
  const header = rawHeader as ObsDumpHeader;
  if (header.format !== "gridrealm-obs") {
    throw new FormatError("not an observation dump");
  }
  if (header.version !== 1) {
    throw new FormatError(`unsupported dump version ${header.version}`);
  }
  const byteLength = header.byte_length;
  const view = new DataView(data.buffer, data.byteOffset, data.byteLength);
  const steps: Array<Map<number, Uint8Array>> = [];
  let pos = bodyStart;
  while (pos < data.length) {
    if (pos + 4 > data.length) {
      throw new FormatError("truncated step count");
    }
    const count = view.getUint32(pos, true);
    pos += 4;
    const step = new Map<number, Uint8Array>();
    for (let i = 0; i < count; i += 1) {
      if (pos + 8 + byteLength > data.length) {
        throw new FormatError("truncated observation record");
      }
      const aid = toSafeNumber(view.getBigInt64(pos, true), "agent id");
      step.set(aid, data.subarray(pos + 8, pos + 8 + byteLength));
      pos += 8 + byteLength;
    }
    steps.push(step);
  }
  return { header, steps };
}
