/**
 * High-level environment handle.
 *
 * Wraps one engine environment living inside a bridge process: create /
 * reset / step / close, with observations delivered as flat Float64Array
 * buffers decoded against the schema cached at creation time. Operations
 * on a closed handle fail with LifecycleError; one handle maps to exactly
 * one engine instance, and several handles may share one bridge process.
 */

import { BridgeClient, PROTOCOL_VERSION } from "./client.js";
import { BridgeError, LifecycleError } from "./errors.js";
import {
  asFloat64,
  decodeObservation,
  validateSchema,
  type ObsBlock,
  type ObservationSchema,
} from "./schema.js";

/** [kind, arg0, arg1] action encoding, or null for an explicit no-op. */
export type ActionInput = readonly number[] | null;

export type ActionMap =
  | Record<number, ActionInput>
  | Map<number, ActionInput>;

export interface CreateOptions {
  /** Path to a JSON config file (mutually exclusive with `config`). */
  configPath?: string;
  /** Inline config overrides (mutually exclusive with `configPath`). */
  config?: Record<string, unknown>;
  seed?: number;
  /** Number of agents to spawn on reset (default: the config maximum). */
  numAgents?: number;
}

export interface ResetResult {
  agents: number[];
  observations: Map<number, Float64Array>;
  infos: Map<number, Record<string, unknown>>;
  /** Post-reset state digest (16 hex chars). */
  digest: string;
}

export interface StepResult {
  observations: Map<number, Float64Array>;
  rewards: Map<number, number>;
  terminated: Map<number, boolean>;
  infos: Map<number, Record<string, unknown>>;
  /** Post-tick state digest (16 hex chars). */
  digest: string;
  /** True once the episode ended (all agents dead or horizon reached). */
  done: boolean;
}

function decodeObsMap(encoded: Record<string, string>): Map<number, Float64Array> {
  const out = new Map<number, Float64Array>();
  for (const [aid, b64] of Object.entries(encoded)) {
    out.set(Number(aid), asFloat64(Buffer.from(b64, "base64")));
  }
  return out;
}

function numberKeyed<V>(encoded: Record<string, V>): Map<number, V> {
  const out = new Map<number, V>();
  for (const [key, value] of Object.entries(encoded)) {
    out.set(Number(key), value);
  }
  return out;
}

function encodeActions(actions: ActionMap): Record<string, number[] | null> {
  const entries: Iterable<[number, ActionInput]> =
    actions instanceof Map ? actions.entries() : Object.entries(actions).map(
      ([aid, act]): [number, ActionInput] => [Number(aid), act],
    );
  const wire: Record<string, number[] | null> = {};
  for (const [aid, act] of entries) {
    wire[String(aid)] = act === null ? null : [...act];
  }
  return wire;
}

export class EnvHandle {
  private closed = false;

  private constructor(
    private readonly client: BridgeClient,
    private readonly handle: number,
    readonly numAgents: number,
    readonly schema: ObservationSchema,
  ) {}

  /** Create a fresh environment inside `client`'s bridge process. */
  static async create(
    client: BridgeClient,
    options: CreateOptions = {},
  ): Promise<EnvHandle> {
    const request: Record<string, unknown> = { op: "create" };
    if (options.configPath !== undefined) {
      request.config_path = options.configPath;
    }
    if (options.config !== undefined) {
      request.config = options.config;
    }
    if (options.seed !== undefined) {
      request.seed = options.seed;
    }
    if (options.numAgents !== undefined) {
      request.num_agents = options.numAgents;
    }
    const reply = await client.request(request);
    if (Number(reply.protocol_version) !== PROTOCOL_VERSION) {
      throw new BridgeError(
        `bridge speaks protocol ${reply.protocol_version}, ` +
        `this client needs ${PROTOCOL_VERSION}`,
      );
    }
    const schema = reply.schema as ObservationSchema;
    validateSchema(schema);
    return new EnvHandle(
      client,
      Number(reply.handle),
      Number(reply.num_agents),
      schema,
    );
  }

  get isClosed(): boolean {
    return this.closed;
  }

  private async request(
    message: Record<string, unknown>,
  ): Promise<Record<string, unknown>> {
    if (this.closed) {
      throw new LifecycleError("environment handle is closed");
    }
    return this.client.request({ ...message, handle: this.handle });
  }

  /** Start a fresh episode; omit `seed` to reuse the creation seed. */
  async reset(seed?: number): Promise<ResetResult> {
    const message: Record<string, unknown> = { op: "reset" };
    if (seed !== undefined) {
      message.seed = seed;
    }
    const reply = await this.request(message);
    return {
      agents: (reply.agents as number[]).map(Number),
      observations: decodeObsMap(reply.obs as Record<string, string>),
      infos: numberKeyed(reply.infos as Record<string, Record<string, unknown>>),
      digest: String(reply.digest),
    };
  }

  /**
   * Advance one tick. Actions for ids that are not live agents are
   * ignored; the step result flags them via `infos.get(id).invalid_action`.
   */
  async step(actions: ActionMap): Promise<StepResult> {
    const reply = await this.request({
      op: "step",
      actions: encodeActions(actions),
    });
    return {
      observations: decodeObsMap(reply.obs as Record<string, string>),
      rewards: numberKeyed(reply.rewards as Record<string, number>),
      terminated: numberKeyed(reply.terminated as Record<string, boolean>),
      infos: numberKeyed(reply.infos as Record<string, Record<string, unknown>>),
      digest: String(reply.digest),
      done: Boolean(reply.done),
    };
  }

  /** Split one observation into named blocks using the cached schema. */
  viewBlocks(observation: Float64Array): Record<string, ObsBlock> {
    return decodeObservation(observation, this.schema);
  }

  /** Release the engine instance. Further calls raise LifecycleError. */
  async close(): Promise<void> {
    if (this.closed) {
      return;
    }
    await this.request({ op: "close" });
    this.closed = true;
  }
}
