"""Command-line entry points: run episodes, benchmark throughput, verify
replays. Exit codes: 0 success, 1 replay divergence, 2 usage, 3 bad format.
"""

from __future__ import annotations

import argparse
import json
import struct
import sys
import time

from . import __version__
from .config import SimConfig
from .datastore import EVENT_SCHEMA
from .env import Env
from .errors import ConfigurationError, FormatError
from .obs import build_schema, obs_size_bytes
from .policies import POLICIES
from .replay import ReplayWriter, ReplayReader, verify_replay

_EVENT_COLUMNS = [name for name, _ in EVENT_SCHEMA]


def _events_since(gs, start: int) -> list[tuple]:
    table = gs.event_table
    stop = len(table)
    columns = [table.col(name) for name in _EVENT_COLUMNS]
    return [tuple(int(col[row]) for col in columns)
            for row in range(start, stop)]


def throughput_report(agents: int, ticks: int, wall_seconds: float,
                      cores: int) -> dict:
    """Pure arithmetic of the benchmark protocol, kept separate so the
    printed figures can be re-derived from the logged raw numbers."""
    agent_steps = agents * ticks
    per_sec = agent_steps / wall_seconds
    return {"agents": agents, "ticks": ticks,
            "wall_seconds": wall_seconds, "cores": cores,
            "agent_steps": agent_steps,
            "agent_steps_per_sec": per_sec,
            "agent_steps_per_core_per_sec": per_sec / cores}


class _ObsDumpWriter:
    """Observation dump: JSON header line, then per step one u32 count and
    count x (i64 agent id + raw observation bytes), reset included."""

    def __init__(self, path, config: SimConfig):
        self._fh = open(path, "wb")
        header = {"format": "gridrealm-obs", "version": 1,
                  "byte_length": obs_size_bytes(config),
                  "schema": build_schema(config)}
        self._fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")

    def add(self, observations: dict) -> None:
        self._fh.write(struct.pack("<I", len(observations)))
        for aid in sorted(observations):
            self._fh.write(struct.pack("<q", aid))
            self._fh.write(observations[aid].tobytes())

    def close(self) -> None:
        self._fh.close()


def cmd_run(args) -> int:
    try:
        config = SimConfig.from_file(args.config) if args.config else SimConfig()
    except (ConfigurationError, OSError, json.JSONDecodeError) as exc:
        print(f"error: bad config: {exc}", file=sys.stderr)
        return 2
    dump = None
    env = Env(config, seed=args.seed,
              encode_observations=args.obs_dump is not None)
    policy = POLICIES[args.policy](args.seed)
    observations, _ = env.reset()
    gs = env.gs
    writer = None
    if args.replay:
        writer = ReplayWriter(args.replay, args.seed, config,
                              env.engine.tilemap.export_bytes(),
                              env.num_agents, engine_version=__version__)
    if args.obs_dump:
        dump = _ObsDumpWriter(args.obs_dump, config)
        dump.add(observations)

    total_rewards: dict[int, float] = {}
    for _ in range(args.ticks):
        if env.done:
            break
        tick = gs.current_tick
        actions = {aid: policy.action(env.engine, aid) for aid in env.agents}
        start = len(gs.event_table)
        result = env.step(actions)
        for aid, reward in result.rewards.items():
            total_rewards[aid] = total_rewards.get(aid, 0.0) + reward
        if writer:
            writer.add_tick(tick, actions, _events_since(gs, start),
                            gs.state_digest())
        if dump:
            dump.add(result.observations)
    if writer:
        writer.close()
    if dump:
        dump.close()

    print(f"ticks run: {gs.current_tick}")
    print(f"final digest: {gs.state_digest():016x}")
    print("agent  completed  reward")
    completed = {}
    for task in env.tasks:
        if task.completed:
            for aid in task.assignee:
                completed[aid] = completed.get(aid, 0) + 1
    for aid in sorted(set(total_rewards) | set(completed)):
        print(f"{aid:5d}  {completed.get(aid, 0):9d}  "
              f"{total_rewards.get(aid, 0.0):.6f}")
    return 0


def cmd_bench(args) -> int:
    config = SimConfig()
    if args.no_mortality:
        config = config.replace(mortality=False)
    if args.agents > config.max_agents:
        config = config.replace(max_agents=args.agents)
    env = Env(config, seed=args.seed, num_agents=args.agents,
              encode_observations=True)
    policy = POLICIES["random"](args.seed)
    env.reset()
    cores = 1  # single-threaded process
    start = time.perf_counter()
    ticks_run = 0
    for _ in range(args.ticks):
        if env.done:
            break
        actions = {aid: policy.action(env.engine, aid) for aid in env.agents}
        env.step(actions)
        ticks_run += 1
    wall = time.perf_counter() - start
    report = throughput_report(args.agents, ticks_run, wall, cores)
    for key, value in report.items():
        if isinstance(value, float):
            print(f"{key}: {value:.2f}")
        else:
            print(f"{key}: {value}")
    print(f"live agents at end: {len(env.agents)}")
    return 0


def cmd_replay(args) -> int:
    try:
        if args.verify:
            ok, tick, ticks = verify_replay(args.replay)
            if ok:
                print(f"verified {ticks} ticks, digests match")
                return 0
            print(f"divergence at tick {tick}")
            return 1
        reader = ReplayReader(args.replay)
        print(f"seed: {reader.seed}")
        print(f"agents: {reader.num_agents}")
        print(f"ticks: {len(reader.records)}")
        return 0
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except FormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gridrealm")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an episode")
    run.add_argument("--config", default=None)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--ticks", type=int, default=100)
    run.add_argument("--policy", choices=sorted(POLICIES), default="random")
    run.add_argument("--replay", default=None)
    run.add_argument("--obs-dump", default=None,
                     help="write per-tick observation bytes to this path")
    run.set_defaults(func=cmd_run)

    bench = sub.add_parser("bench", help="measure simulation throughput")
    bench.add_argument("--agents", type=int, default=128)
    bench.add_argument("--ticks", type=int, default=1000)
    bench.add_argument("--no-mortality", action="store_true")
    bench.add_argument("--seed", type=int, default=0)
    bench.set_defaults(func=cmd_bench)

    replay = sub.add_parser("replay", help="inspect or verify a replay")
    replay.add_argument("--replay", required=True)
    replay.add_argument("--verify", action="store_true")
    replay.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
