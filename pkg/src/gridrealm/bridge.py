"""Stdio bridge: a versioned create/reset/step/close surface for bindings.

Frames are a u32 little-endian byte length followed by a UTF-8 JSON body.
Requests carry an "op"; replies carry "ok" plus either the result fields
or an error name and message. Observations travel as base64 of the flat
float64 buffers, decoded on the far side via the schema returned by
"create", so bindings never hard-code layout offsets. One server process
can hold many independent handles.
"""

from __future__ import annotations

import base64
import json
import struct
import sys

from .config import SimConfig
from .env import Env
from .errors import GridRealmError, LifecycleError
from .obs import build_schema

PROTOCOL_VERSION = 1


def read_frame(stream) -> dict | None:
    head = stream.read(4)
    if not head:
        return None
    if len(head) < 4:
        raise EOFError("truncated frame length")
    (length,) = struct.unpack("<I", head)
    body = stream.read(length)
    if len(body) < length:
        raise EOFError("truncated frame body")
    return json.loads(body.decode("utf-8"))


def write_frame(stream, message: dict) -> None:
    body = json.dumps(message).encode("utf-8")
    stream.write(struct.pack("<I", len(body)))
    stream.write(body)
    stream.flush()


class BridgeServer:
    def __init__(self):
        self._envs: dict[int, Env] = {}
        self._next_handle = 1

    def _env(self, request) -> Env:
        handle = request.get("handle")
        env = self._envs.get(handle)
        if env is None:
            raise LifecycleError(f"unknown or closed handle {handle!r}")
        return env

    def _encode_obs(self, observations) -> dict:
        return {str(aid): base64.b64encode(buf.tobytes()).decode("ascii")
                for aid, buf in observations.items()}

    def handle(self, request: dict) -> dict:
        op = request.get("op")
        if op == "ping":
            return {"ok": True, "protocol_version": PROTOCOL_VERSION}
        if op == "create":
            if "config_path" in request:
                config = SimConfig.from_file(request["config_path"])
            elif "config" in request:
                config = SimConfig.from_dict(request["config"])
            else:
                config = SimConfig()
            env = Env(config, seed=int(request.get("seed", 0)),
                      num_agents=request.get("num_agents"))
            handle = self._next_handle
            self._next_handle += 1
            self._envs[handle] = env
            return {"ok": True, "handle": handle,
                    "protocol_version": PROTOCOL_VERSION,
                    "num_agents": env.num_agents,
                    "schema": build_schema(config)}
        if op == "reset":
            env = self._env(request)
            observations, infos = env.reset(request.get("seed"))
            return {"ok": True,
                    "agents": sorted(observations),
                    "obs": self._encode_obs(observations),
                    "infos": {str(a): i for a, i in infos.items()},
                    "digest": f"{env.gs.state_digest():016x}"}
        if op == "step":
            env = self._env(request)
            actions = {int(aid): act
                       for aid, act in request.get("actions", {}).items()}
            result = env.step(actions)
            return {"ok": True,
                    "obs": self._encode_obs(result.observations),
                    "rewards": {str(a): r for a, r in result.rewards.items()},
                    "terminated": {str(a): bool(t)
                                   for a, t in result.terminated.items()},
                    "infos": {str(a): i for a, i in result.infos.items()},
                    "digest": f"{env.gs.state_digest():016x}",
                    "done": env.done}
        if op == "close":
            handle = request.get("handle")
            if handle not in self._envs:
                raise LifecycleError(f"unknown or closed handle {handle!r}")
            del self._envs[handle]
            return {"ok": True}
        raise GridRealmError(f"unknown op {op!r}")


def serve(stdin=None, stdout=None) -> None:
    stdin = stdin or sys.stdin.buffer
    stdout = stdout or sys.stdout.buffer
    server = BridgeServer()
    while True:
        try:
            request = read_frame(stdin)
        except EOFError:
            break
        if request is None:
            break
        if request.get("op") == "shutdown":
            write_frame(stdout, {"ok": True})
            break
        try:
            reply = server.handle(request)
        except GridRealmError as exc:
            reply = {"ok": False, "error": type(exc).__name__,
                     "message": str(exc)}
        except Exception as exc:  # keep the server alive on bad input
            reply = {"ok": False, "error": "InternalError",
                     "message": f"{type(exc).__name__}: {exc}"}
        write_frame(stdout, reply)


if __name__ == "__main__":
    serve()
