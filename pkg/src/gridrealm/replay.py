"""Self-contained episode logs and digest-checked re-simulation.

A replay file is one JSON header line (format tag, engine version, seed,
config, config digest, map byte length, agent count), the raw map export,
and then one length-prefixed binary record per tick holding the action
map, the events appended that tick, and the post-tick state digest.
Re-simulating from the header alone must reproduce every digest.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

from .config import SimConfig
from .engine import Action, Engine
from .errors import FormatError
from .worldgen import TileMap

FORMAT_NAME = "gridrealm-replay"
FORMAT_VERSION = 1
EVENT_FIELDS = 10  # matches the event table schema width


@dataclass
class TickRecord:
    tick: int
    actions: dict[int, Action]
    events: list[tuple]
    digest: int


def _pack_tick(record: TickRecord) -> bytes:
    parts = [struct.pack("<QI", record.tick, len(record.actions))]
    for aid in sorted(record.actions):
        act = record.actions[aid]
        parts.append(struct.pack("<4q", aid, act.kind, act.a, act.b))
    parts.append(struct.pack("<I", len(record.events)))
    for event in record.events:
        if len(event) != EVENT_FIELDS:
            raise FormatError(f"event tuple must have {EVENT_FIELDS} fields")
        parts.append(struct.pack(f"<{EVENT_FIELDS}q", *event))
    parts.append(struct.pack("<Q", record.digest))
    payload = b"".join(parts)
    return struct.pack("<I", len(payload)) + payload


def _unpack_tick(payload: bytes) -> TickRecord:
    try:
        pos = 0
        tick, n_actions = struct.unpack_from("<QI", payload, pos)
        pos += 12
        actions = {}
        for _ in range(n_actions):
            aid, kind, a, b = struct.unpack_from("<4q", payload, pos)
            pos += 32
            actions[aid] = Action(kind, a, b)
        (n_events,) = struct.unpack_from("<I", payload, pos)
        pos += 4
        events = []
        for _ in range(n_events):
            events.append(struct.unpack_from(f"<{EVENT_FIELDS}q", payload, pos))
            pos += 8 * EVENT_FIELDS
        (digest,) = struct.unpack_from("<Q", payload, pos)
        pos += 8
    except struct.error as exc:
        raise FormatError(f"corrupt tick record: {exc}") from exc
    if pos != len(payload):
        raise FormatError("tick record has trailing bytes")
    return TickRecord(tick, actions, events, digest)


class ReplayWriter:
    def __init__(self, path, seed: int, config: SimConfig, map_bytes: bytes,
                 num_agents: int, engine_version: str = "0.1.0"):
        header = {"format": FORMAT_NAME, "version": FORMAT_VERSION,
                  "engine": engine_version, "seed": seed,
                  "config": config.to_dict(),
                  "config_digest": config.digest(),
                  "map_len": len(map_bytes), "num_agents": num_agents}
        self._fh = open(path, "wb")
        self._fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        self._fh.write(map_bytes)
        self.ticks_written = 0

    def add_tick(self, tick: int, actions: dict[int, Action],
                 events: list[tuple], digest: int) -> None:
        self._fh.write(_pack_tick(TickRecord(tick, actions, events, digest)))
        self.ticks_written += 1

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class ReplayReader:
    """Parses and validates a whole replay file up front."""

    def __init__(self, path):
        with open(path, "rb") as fh:
            data = fh.read()
        newline = data.find(b"\n")
        if newline < 0:
            raise FormatError("missing header line")
        try:
            header = json.loads(data[:newline])
        except json.JSONDecodeError as exc:
            raise FormatError(f"bad header JSON: {exc}") from exc
        if header.get("format") != FORMAT_NAME:
            raise FormatError("not a replay file")
        if header.get("version") != FORMAT_VERSION:
            raise FormatError(f"unsupported replay version {header.get('version')}")
        for key in ("seed", "config", "config_digest", "map_len", "num_agents"):
            if key not in header:
                raise FormatError(f"header missing {key!r}")
        self.header = header
        self.config = SimConfig.from_dict(header["config"])
        if self.config.digest() != header["config_digest"]:
            raise FormatError("config digest mismatch")
        pos = newline + 1
        map_len = int(header["map_len"])
        self.map_bytes = data[pos: pos + map_len]
        if len(self.map_bytes) != map_len:
            raise FormatError("truncated map export")
        pos += map_len
        self.records: list[TickRecord] = []
        while pos < len(data):
            if pos + 4 > len(data):
                raise FormatError("truncated record length")
            (length,) = struct.unpack_from("<I", data, pos)
            pos += 4
            if pos + length > len(data):
                raise FormatError("truncated tick record")
            self.records.append(_unpack_tick(data[pos: pos + length]))
            pos += length

    @property
    def seed(self) -> int:
        return int(self.header["seed"])

    @property
    def num_agents(self) -> int:
        return int(self.header["num_agents"])


def verify_replay(path) -> tuple[bool, int | None, int]:
    """Re-simulate a log; returns (ok, first divergent tick, ticks checked)."""
    reader = ReplayReader(path)
    tilemap = TileMap.from_bytes(reader.map_bytes)
    engine = Engine(reader.config, reader.seed, tilemap=tilemap)
    engine.spawn_agents(reader.num_agents)
    engine.spawn_npcs(reader.config.npc_count)
    for record in reader.records:
        engine.tick(record.actions)
        if engine.gs.state_digest() != record.digest:
            return False, record.tick, len(reader.records)
    return True, None, len(reader.records)
