"""Parallel multi-agent environment surface with reset/step semantics.

One Env drives one Engine. reset builds a fresh world from (config, seed)
and returns tick-0 observations; step decodes actions (invalid ones become
Noop plus an info flag), runs one engine tick, evaluates tasks, and returns
per-agent results keyed by the agents that were alive when the tick began.
An agent that dies appears once with terminated=True and is absent after.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .config import SimConfig
from .defs import ActionKind, EntityKind
from .engine import Action, Engine
from .errors import ConfigurationError, LifecycleError
from .obs import ObservationEncoder, build_schema
from .tasks import (BUILTIN_EVALUATORS, Task, evaluate_tasks, load_tasks,
                    make_predicate, tasks_from_specs)

_VALID_KINDS = set(int(k) for k in ActionKind)


def decode_action(raw) -> tuple[Action, bool]:
    """Normalize caller input to an Action; (Noop, False) when malformed."""
    if raw is None:
        return Action.noop(), True
    if isinstance(raw, Action):
        candidate = raw
    elif isinstance(raw, (tuple, list)) and 1 <= len(raw) <= 3:
        try:
            parts = [int(v) for v in raw]
        except (TypeError, ValueError):
            return Action.noop(), False
        parts += [0] * (3 - len(parts))
        candidate = Action(parts[0], parts[1], parts[2])
    else:
        return Action.noop(), False
    if candidate.kind not in _VALID_KINDS:
        return Action.noop(), False
    return candidate, True


@dataclass
class StepResult:
    """Per-agent outcome of one tick, keyed by agent id."""

    observations: dict[int, np.ndarray]
    rewards: dict[int, float]
    terminated: dict[int, bool]
    infos: dict[int, dict] = field(default_factory=dict)

    @property
    def done(self) -> bool:
        return all(self.terminated.values()) if self.terminated else True


class Env:
    """PettingZoo-parallel-style lifecycle around one engine instance."""

    def __init__(self, config: SimConfig | None = None, seed: int = 0,
                 num_agents: int | None = None, task_specs=None,
                 task_file=None, encode_observations: bool = True,
                 schema_path=None):
        self.config = config or SimConfig()
        self.seed = seed
        self.num_agents = num_agents if num_agents is not None \
            else self.config.max_agents
        if task_specs is not None and task_file is not None:
            raise ConfigurationError("pass task_specs or task_file, not both")
        self._task_specs = task_specs
        self._task_file = task_file
        self.encode_observations = encode_observations
        self.schema_path = schema_path
        self.engine: Engine | None = None
        self.tasks: list[Task] = []
        self._done = False
        self._buffers: dict[int, np.ndarray] = {}

    # ------------------------------------------------------------------

    @property
    def gs(self):
        return self.engine.gs

    @property
    def done(self) -> bool:
        return self._done

    @property
    def agents(self) -> list[int]:
        if self.engine is None:
            return []
        return self.engine.live_ids(int(EntityKind.AGENT))

    def _install_tasks(self, agent_ids: list[int]) -> None:
        if self._task_file is not None:
            self.tasks = load_tasks(self._task_file)
        elif self._task_specs is not None:
            self.tasks = tasks_from_specs(self._task_specs)
        else:
            # default objective: each agent is rewarded for its own survival
            factory = make_predicate(BUILTIN_EVALUATORS["StayAlive"],
                                     "StayAlive")
            self.tasks = [factory(aid).create_task() for aid in agent_ids]
        self._agent_tasks = {}
        for task in self.tasks:
            for aid in task.assignee:
                self._agent_tasks.setdefault(aid, []).append(task)

    def reset(self, seed: int | None = None):
        """Build a fresh world; returns (observations, infos)."""
        if seed is not None:
            self.seed = seed
        self.engine = Engine(self.config, self.seed)
        agent_ids = self.engine.spawn_agents(self.num_agents)
        self.engine.spawn_npcs(self.config.npc_count)
        self._install_tasks(agent_ids)
        self._done = False
        self._encoder = ObservationEncoder(self.engine)
        self._buffers = {aid: np.zeros(self._encoder.length)
                         for aid in agent_ids}
        if self.schema_path:
            with open(self.schema_path, "w", encoding="utf-8") as fh:
                json.dump(build_schema(self.config), fh, indent=2)
                fh.write("\n")
        observations = self._observe(agent_ids)
        return observations, {aid: {} for aid in agent_ids}

    def _task_progress(self, aid: int) -> list[float]:
        return [t.progress for t in self._agent_tasks.get(aid, [])]

    def _observe(self, agent_ids) -> dict[int, np.ndarray]:
        if not self.encode_observations:
            return {aid: None for aid in agent_ids}
        self._encoder.prepare()
        out = {}
        for aid in agent_ids:
            buf = self._buffers.get(aid)
            out[aid] = self._encoder.encode(aid, self._task_progress(aid),
                                            out=buf)
        return out

    def step(self, actions: dict) -> StepResult:
        if self.engine is None:
            raise LifecycleError("step before reset")
        if self._done:
            raise LifecycleError("step after episode end")
        engine = self.engine
        live_before = self.agents
        decode_failed = set()
        decoded: dict[int, Action] = {}
        for aid in live_before:
            action, ok = decode_action(actions.get(aid))
            if not ok:
                decode_failed.add(aid)
            decoded[aid] = action

        engine.tick(decoded)
        reward_map = evaluate_tasks(engine.gs, self.tasks)

        cols = engine.gs.entity_table.columns
        entity_row = engine.gs.entity_row
        terminated = {}
        for aid in live_before:
            row = entity_row.get(aid)
            terminated[aid] = row is None or cols["alive"][row] == 0
        horizon_hit = engine.gs.current_tick >= self.config.horizon
        if horizon_hit:
            terminated = {aid: True for aid in live_before}

        invalid = engine.invalid | decode_failed
        infos = {}
        for aid in live_before:
            infos[aid] = {
                "invalid_action": aid in invalid,
                "tasks_completed": sum(
                    1 for t in self._agent_tasks.get(aid, []) if t.completed),
            }
        for aid in actions:
            if aid not in decoded:  # dead or never-spawned actor: ignored
                infos[aid] = {"invalid_action": True, "tasks_completed": 0}
        observations = self._observe(live_before)
        rewards = {aid: reward_map.get(aid, 0.0) for aid in live_before}
        result = StepResult(observations, rewards, terminated, infos)
        all_gone = all(terminated.values()) if terminated else True
        self._done = horizon_hit or all_gone
        return result
