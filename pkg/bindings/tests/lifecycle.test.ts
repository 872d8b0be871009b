/**
 * Handle lifecycle: creation failures surface as typed errors, misuse of
 * a handle (step before reset, step after the episode ended, use after
 * close) raises LifecycleError, handles on one bridge process stay fully
 * independent, and actions for ids that are not live agents are ignored
 * but flagged.
 */

import { afterAll, beforeAll, expect, test } from "vitest";

import {
  BridgeClient,
  EnvHandle,
  InitializationError,
  LifecycleError,
  PROTOCOL_VERSION,
} from "../src/index.js";

const SMALL_CONFIG = { map_size: 32, npc_count: 0, max_agents: 2 };

let client: BridgeClient;

beforeAll(() => {
  client = new BridgeClient();
});

afterAll(async () => {
  await client?.shutdown();
});

test("ping reports the protocol version", async () => {
  expect(await client.ping()).toBe(PROTOCOL_VERSION);
});

test("default config creates a handle with 128 agents listed", async () => {
  const env = await EnvHandle.create(client, { seed: 1 });
  expect(env.numAgents).toBe(128);
  await env.close();
});

test("missing config file raises InitializationError", async () => {
  await expect(
    EnvHandle.create(client, { configPath: "/nonexistent/config.json" }),
  ).rejects.toBeInstanceOf(InitializationError);
});

test("invalid config values raise InitializationError", async () => {
  await expect(
    EnvHandle.create(client, { config: { map_size: 4 } }),
  ).rejects.toBeInstanceOf(InitializationError);
});

test("step before reset raises LifecycleError", async () => {
  const env = await EnvHandle.create(client, { config: SMALL_CONFIG, seed: 2 });
  await expect(env.step({})).rejects.toBeInstanceOf(LifecycleError);
  await env.close();
});

test("step after the horizon ends the episode raises LifecycleError", async () => {
  const env = await EnvHandle.create(client, {
    config: { ...SMALL_CONFIG, horizon: 3 },
    seed: 3,
  });
  await env.reset();
  let done = false;
  for (let t = 0; t < 3; t += 1) {
    const result = await env.step({});
    done = result.done;
    if (t === 2) {
      expect(result.done).toBe(true);
      for (const terminated of result.terminated.values()) {
        expect(terminated).toBe(true);
      }
    }
  }
  expect(done).toBe(true);
  await expect(env.step({})).rejects.toBeInstanceOf(LifecycleError);
  // A fresh reset revives the handle.
  const reset = await env.reset();
  expect(reset.agents.length).toBeGreaterThan(0);
  await env.close();
});

test("a closed handle fails cleanly and closing is idempotent", async () => {
  const env = await EnvHandle.create(client, { config: SMALL_CONFIG, seed: 4 });
  await env.reset();
  await env.close();
  expect(env.isClosed).toBe(true);
  await expect(env.reset()).rejects.toBeInstanceOf(LifecycleError);
  await expect(env.step({})).rejects.toBeInstanceOf(LifecycleError);
  await env.close(); // second close is a no-op
});

test("two handles on one bridge process are independent", async () => {
  const options = { config: SMALL_CONFIG, seed: 5 };
  const first = await EnvHandle.create(client, options);
  const second = await EnvHandle.create(client, options);

  const firstReset = await first.reset();
  const move = firstReset.agents.map((aid): [number, number[]] =>
    [aid, [1, 0, 0]]);

  // Step the first handle several times, then reset the second: if state
  // leaked between handles the second could not reproduce the untouched
  // post-reset digest.
  const firstDigests: string[] = [];
  for (let t = 0; t < 3; t += 1) {
    firstDigests.push((await first.step(new Map(move))).digest);
  }
  const secondReset = await second.reset();
  expect(secondReset.digest).toBe(firstReset.digest);

  // Same seed, same actions: the second handle retraces the first.
  for (let t = 0; t < 3; t += 1) {
    expect((await second.step(new Map(move))).digest).toBe(firstDigests[t]);
  }

  // Different actions from here: the handles diverge.
  const firstNext = await first.step({});
  const secondNext = await second.step(new Map(move));
  expect(firstNext.digest).not.toBe(secondNext.digest);

  // Closing one handle leaves the other usable.
  await first.close();
  const afterClose = await second.step({});
  expect(typeof afterClose.digest).toBe("string");
  await second.close();
});

test("actions for absent agent ids are ignored but flagged", async () => {
  const env = await EnvHandle.create(client, { config: SMALL_CONFIG, seed: 6 });
  const reset = await env.reset();
  const ghost = 9999;
  expect(reset.agents).not.toContain(ghost);

  const actions = new Map<number, number[] | null>(
    reset.agents.map((aid): [number, null] => [aid, null]),
  );
  actions.set(ghost, [1, 0, 0]);
  const result = await env.step(actions);

  expect(result.infos.get(ghost)).toEqual({
    invalid_action: true,
    tasks_completed: 0,
  });
  expect(result.rewards.has(ghost)).toBe(false);
  expect(result.terminated.has(ghost)).toBe(false);
  expect(result.observations.has(ghost)).toBe(false);
  for (const aid of reset.agents) {
    expect(result.infos.get(aid)?.invalid_action).toBe(false);
    expect(result.observations.has(aid)).toBe(true);
  }
  await env.close();
});
