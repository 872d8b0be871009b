/**
 * Leak check: 10,000 step calls through one handle must not grow memory
 * beyond a constant bound on either side of the boundary.
 *
 * Engine side: resident set size of the bridge process (via /proc, the
 * suite targets Linux) sampled against a post-warmup baseline. Node
 * side: the floor of sampled heap usage — the sawtooth minimum tracks
 * retained objects regardless of garbage-collector timing.
 */

import { readFileSync } from "node:fs";
import { afterAll, beforeAll, expect, test } from "vitest";

import { BridgeClient, EnvHandle } from "../src/index.js";

const TOTAL_STEPS = 10_000;
const WARMUP_STEPS = 1_000;
const SAMPLE_EVERY = 250;
const ENGINE_GROWTH_BOUND = 64 * 1024 * 1024;
const NODE_FLOOR_GROWTH_BOUND = 64 * 1024 * 1024;

const CONFIG = {
  map_size: 32,
  npc_count: 0,
  max_agents: 2,
  mortality: false,
  horizon: 2 * TOTAL_STEPS,
};

let client: BridgeClient;

beforeAll(() => {
  client = new BridgeClient();
});

afterAll(async () => {
  await client?.shutdown();
});

function engineRssBytes(pid: number): number {
  const status = readFileSync(`/proc/${pid}/status`, "utf-8");
  const match = status.match(/VmRSS:\s+(\d+) kB/);
  if (!match) {
    throw new Error("VmRSS not found in /proc status");
  }
  return Number(match[1]) * 1024;
}

test("10,000 steps do not grow memory beyond a constant bound", async () => {
  const env = await EnvHandle.create(client, { config: CONFIG, seed: 99 });
  const reset = await env.reset();
  const agents = reset.agents;
  const pid = client.pid!;

  let engineBaseline = 0;
  let engineMax = 0;
  const nodeFloors: number[] = [];
  let windowMin = Number.POSITIVE_INFINITY;

  for (let t = 0; t < TOTAL_STEPS; t += 1) {
    const actions = new Map(
      agents.map((aid): [number, number[]] => [aid, [1, t % 4, 0]]),
    );
    const result = await env.step(actions);
    expect(result.done).toBe(false);

    windowMin = Math.min(windowMin, process.memoryUsage().heapUsed);
    if ((t + 1) % SAMPLE_EVERY === 0) {
      const rss = engineRssBytes(pid);
      if (t + 1 === WARMUP_STEPS) {
        engineBaseline = rss;
      } else if (t + 1 > WARMUP_STEPS) {
        engineMax = Math.max(engineMax, rss);
      }
      if (t + 1 >= WARMUP_STEPS) {
        nodeFloors.push(windowMin);
      }
      windowMin = Number.POSITIVE_INFINITY;
    }
  }

  expect(engineBaseline).toBeGreaterThan(0);
  const engineGrowth = engineMax - engineBaseline;
  expect(
    engineGrowth,
    `engine RSS grew ${(engineGrowth / 1e6).toFixed(1)} MB after warmup`,
  ).toBeLessThan(ENGINE_GROWTH_BOUND);

  // Compare early vs. late heap floors rather than instantaneous values:
  // allocation churn moves the peaks, only retention moves the floor.
  const quarter = Math.max(1, Math.floor(nodeFloors.length / 4));
  const early = Math.min(...nodeFloors.slice(0, quarter));
  const late = Math.min(...nodeFloors.slice(-quarter));
  const nodeGrowth = late - early;
  expect(
    nodeGrowth,
    `node heap floor grew ${(nodeGrowth / 1e6).toFixed(1)} MB after warmup`,
  ).toBeLessThan(NODE_FLOOR_GROWTH_BOUND);

  await env.close();
});
