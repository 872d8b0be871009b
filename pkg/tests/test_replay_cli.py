"""Replay file format, digest-checked re-simulation, and the CLI surface."""

import json
import re
import struct

import numpy as np
import pytest

from gridrealm import SimConfig
from gridrealm.cli import _events_since, main, throughput_report
from gridrealm.defs import Dir
from gridrealm.engine import Action, Engine
from gridrealm.errors import FormatError
from gridrealm.replay import (ReplayReader, ReplayWriter, _pack_tick,
                              TickRecord, verify_replay)

from helpers import flat_map

FLAT_CONFIG = SimConfig(map_size=32, npc_count=0, max_agents=32)
CLI_CONFIG = {"map_size": 48, "npc_count": 4, "max_agents": 6}


def record_flat_replay(path, ticks=10, direction=int(Dir.EAST)):
    """A hand-driven episode on an all-grass map: every move succeeds, so
    any change to the recorded actions must change the digests."""
    tilemap = flat_map(FLAT_CONFIG.map_size, FLAT_CONFIG.border_width)
    engine = Engine(FLAT_CONFIG, seed=3, tilemap=tilemap)
    (agent,) = engine.spawn_agents(1)
    writer = ReplayWriter(path, seed=3, config=FLAT_CONFIG,
                          map_bytes=engine.tilemap.export_bytes(),
                          num_agents=1)
    for _ in range(ticks):
        tick = engine.gs.current_tick
        actions = {agent: Action.move(direction)}
        start = len(engine.gs.event_table)
        engine.tick(actions)
        writer.add_tick(tick, actions, _events_since(engine.gs, start),
                        engine.gs.state_digest())
    writer.close()
    return engine


def write_cli_config(tmp_path) -> str:
    path = tmp_path / "config.json"
    path.write_text(json.dumps(CLI_CONFIG))
    return str(path)


# ---------------------------------------------------------------------------
# replay round trips
# ---------------------------------------------------------------------------

def test_recorded_episode_verifies_clean(tmp_path):
    path = tmp_path / "episode.replay"
    engine = record_flat_replay(path, ticks=10)
    ok, divergent, ticks = verify_replay(path)
    assert (ok, divergent, ticks) == (True, None, 10)
    reader = ReplayReader(path)
    assert reader.seed == 3
    assert reader.num_agents == 1
    assert len(reader.records) == 10
    assert reader.records[-1].digest == engine.gs.state_digest()


def test_reader_preserves_actions_and_events(tmp_path):
    path = tmp_path / "episode.replay"
    record_flat_replay(path, ticks=4)
    reader = ReplayReader(path)
    for t, record in enumerate(reader.records):
        assert record.tick == t
        (action,) = record.actions.values()
        assert action == Action.move(int(Dir.EAST))
    # the agent drinks nothing and eats nothing on flat grass: survival
    # events only appear when stats move, so early records stay empty
    assert reader.records[0].events == []


def test_changed_action_breaks_verification(tmp_path):
    path = tmp_path / "episode.replay"
    record_flat_replay(path, ticks=10)
    data = path.read_bytes()
    newline = data.find(b"\n")
    header = json.loads(data[:newline])
    pos = newline + 1 + header["map_len"]
    # walk to record 5, then rewrite its action as a WEST move
    offsets = []
    cursor = pos
    while cursor < len(data):
        (length,) = struct.unpack_from("<I", data, cursor)
        offsets.append((cursor, length))
        cursor += 4 + length
    reader = ReplayReader(path)
    target = reader.records[5]
    forged = TickRecord(target.tick,
                        {aid: Action.move(int(Dir.WEST))
                         for aid in target.actions},
                        target.events, target.digest)
    start, length = offsets[5]
    patched = data[:start] + _pack_tick(forged) + data[start + 4 + length:]
    path.write_bytes(patched)
    ok, divergent, ticks = verify_replay(path)
    assert not ok
    assert divergent == 5
    assert ticks == 10


def test_corrupted_digest_reports_divergence(tmp_path):
    path = tmp_path / "episode.replay"
    record_flat_replay(path, ticks=6)
    data = bytearray(path.read_bytes())
    data[-1] ^= 0xFF  # last byte of the final record's digest
    path.write_bytes(bytes(data))
    ok, divergent, _ = verify_replay(path)
    assert not ok
    assert divergent == 5


def test_reader_rejects_structural_corruption(tmp_path):
    path = tmp_path / "episode.replay"
    record_flat_replay(path, ticks=3)
    data = path.read_bytes()

    truncated = tmp_path / "truncated.replay"
    truncated.write_bytes(data[:-7])
    with pytest.raises(FormatError):
        ReplayReader(truncated)

    trailing = tmp_path / "trailing.replay"
    trailing.write_bytes(data + b"\x01\x02")
    with pytest.raises(FormatError):
        ReplayReader(trailing)

    not_replay = tmp_path / "other.replay"
    not_replay.write_bytes(b'{"format": "something-else"}\n')
    with pytest.raises(FormatError):
        ReplayReader(not_replay)

    bad_json = tmp_path / "bad.replay"
    bad_json.write_bytes(b"not json at all\n" + data[data.find(b"\n") + 1:])
    with pytest.raises(FormatError):
        ReplayReader(bad_json)

    newline = data.find(b"\n")
    header = json.loads(data[:newline])
    header["config"]["horizon"] = 99  # silently edited config
    forged = tmp_path / "forged.replay"
    forged.write_bytes(json.dumps(header, sort_keys=True).encode() + b"\n"
                       + data[newline + 1:])
    with pytest.raises(FormatError):
        ReplayReader(forged)


# ---------------------------------------------------------------------------
# CLI: replay command
# ---------------------------------------------------------------------------

def test_cli_replay_verify_exit_codes(tmp_path, capsys):
    path = tmp_path / "episode.replay"
    record_flat_replay(path, ticks=5)
    assert main(["replay", "--replay", str(path), "--verify"]) == 0
    assert "digests match" in capsys.readouterr().out

    data = bytearray(path.read_bytes())
    data[-1] ^= 0xFF
    path.write_bytes(bytes(data))
    assert main(["replay", "--replay", str(path), "--verify"]) == 1
    assert "divergence at tick 4" in capsys.readouterr().out

    garbage = tmp_path / "garbage.replay"
    garbage.write_bytes(b"\x00\x01\x02")
    assert main(["replay", "--replay", str(garbage), "--verify"]) == 3
    assert main(["replay", "--replay", str(tmp_path / "absent"), "--verify"]) == 3


def test_cli_replay_inspect_summary(tmp_path, capsys):
    path = tmp_path / "episode.replay"
    record_flat_replay(path, ticks=5)
    assert main(["replay", "--replay", str(path)]) == 0
    out = capsys.readouterr().out
    assert "seed: 3" in out
    assert "agents: 1" in out
    assert "ticks: 5" in out


# ---------------------------------------------------------------------------
# CLI: run command
# ---------------------------------------------------------------------------

def test_cli_run_records_verifiable_replay(tmp_path, capsys):
    config_path = write_cli_config(tmp_path)
    replay_path = tmp_path / "episode.replay"
    code = main(["run", "--config", config_path, "--seed", "11",
                 "--ticks", "40", "--policy", "scripted",
                 "--replay", str(replay_path)])
    assert code == 0
    out = capsys.readouterr().out
    assert "ticks run: 40" in out
    assert re.search(r"final digest: [0-9a-f]{16}", out)
    assert main(["replay", "--replay", str(replay_path), "--verify"]) == 0


def test_cli_run_random_policy_replay_verifies(tmp_path, capsys):
    config_path = write_cli_config(tmp_path)
    replay_path = tmp_path / "episode.replay"
    assert main(["run", "--config", config_path, "--seed", "4",
                 "--ticks", "50", "--policy", "random",
                 "--replay", str(replay_path)]) == 0
    capsys.readouterr()
    assert main(["replay", "--replay", str(replay_path), "--verify"]) == 0


def test_cli_run_same_seed_same_digest(tmp_path, capsys):
    config_path = write_cli_config(tmp_path)

    def run(seed):
        assert main(["run", "--config", config_path, "--seed", str(seed),
                     "--ticks", "25"]) == 0
        out = capsys.readouterr().out
        return re.search(r"final digest: ([0-9a-f]{16})", out).group(1)

    assert run(5) == run(5)
    assert run(5) != run(6)


def test_cli_run_obs_dump_layout(tmp_path, capsys):
    config_path = write_cli_config(tmp_path)
    dump_path = tmp_path / "obs.bin"
    ticks = 6
    assert main(["run", "--config", config_path, "--seed", "2",
                 "--ticks", str(ticks), "--obs-dump", str(dump_path)]) == 0
    capsys.readouterr()
    data = dump_path.read_bytes()
    newline = data.find(b"\n")
    header = json.loads(data[:newline])
    assert header["format"] == "gridrealm-obs"
    byte_length = header["byte_length"]
    assert byte_length == header["schema"]["byte_length"]

    pos = newline + 1
    steps = []
    while pos < len(data):
        (count,) = struct.unpack_from("<I", data, pos)
        pos += 4
        ids = []
        for _ in range(count):
            (aid,) = struct.unpack_from("<q", data, pos)
            pos += 8
            frame = np.frombuffer(data[pos: pos + byte_length], dtype="<f8")
            assert frame[header["schema"]["blocks"][2]["offset"]] == aid
            pos += byte_length
            ids.append(aid)
        assert ids == sorted(ids)
        steps.append(ids)
    assert pos == len(data)
    assert len(steps) == ticks + 1  # the reset frame is included
    assert steps[0] == list(range(1, CLI_CONFIG["max_agents"] + 1))


def test_cli_run_rejects_bad_config(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{\"no_such_key\": 3}")
    assert main(["run", "--config", str(bad)]) == 2
    assert "bad config" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# CLI: bench command and report arithmetic
# ---------------------------------------------------------------------------

def test_throughput_report_arithmetic():
    report = throughput_report(agents=128, ticks=1000, wall_seconds=8.0,
                               cores=2)
    assert report["agent_steps"] == 128000
    assert report["agent_steps_per_sec"] == pytest.approx(16000.0)
    assert report["agent_steps_per_core_per_sec"] == pytest.approx(8000.0)


def test_cli_bench_reports_and_preserves_agents(capsys):
    assert main(["bench", "--agents", "8", "--ticks", "30",
                 "--no-mortality"]) == 0
    out = capsys.readouterr().out
    assert "agents: 8" in out
    assert "ticks: 30" in out
    assert "agent_steps: 240" in out
    assert "agent_steps_per_core_per_sec:" in out
    assert "live agents at end: 8" in out


# ---------------------------------------------------------------------------
# CLI: usage
# ---------------------------------------------------------------------------

def test_cli_usage_errors_exit_2(capsys):
    assert main([]) == 2
    assert main(["run", "--policy", "bogus"]) == 2
    assert main(["no-such-command"]) == 2
    capsys.readouterr()
