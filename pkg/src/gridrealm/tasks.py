"""Float-valued predicates over game state and the task reward system.

A predicate evaluator is a plain function (gs, subject, **params) -> float.
make_predicate wraps it into a factory; calling the factory with a subject
and parameter bindings yields a Predicate, and predicate.create_task(...)
yields a Task. Each tick evaluate_tasks pays every assignee the positive
progress delta against the task's running best, so the reward stream for a
task telescopes to its final progress.
"""

from __future__ import annotations

import json
import math

from .datastore import GameState, SKILL_LEVEL_COLS
from .defs import EventType, ItemType, Material, STYLE_AMMO, STYLE_WEAPON, Skill
from .errors import ConfigurationError, ParameterError, TaskError

_ARMOR_SET = (int(ItemType.HAT), int(ItemType.TOP), int(ItemType.BOTTOM))


def _clamp(value: float) -> float:
    return max(0.0, min(1.0, value))


def _ratio(achieved: float, required: float) -> float:
    if required <= 0:
        return 1.0
    return _clamp(achieved / required)


class Predicate:
    """An evaluator bound to a subject and fixed parameters."""

    def __init__(self, name, evaluator, subject, params):
        self.name = name
        self.evaluator = evaluator
        self.subject = _as_ids(subject)
        self.params = dict(params)

    def __call__(self, gs: GameState) -> float:
        view = gs.group_view(self.subject)
        value = float(self.evaluator(gs, view, **self.params))
        if not math.isfinite(value):
            raise TaskError(f"predicate {self.name} returned {value!r}")
        return _clamp(value)

    def create_task(self, assignee=None, multiplier: float = 1.0) -> "Task":
        return Task(self, assignee=assignee, multiplier=multiplier)


def _as_ids(subject) -> tuple[int, ...]:
    if isinstance(subject, int):
        return (subject,)
    return tuple(int(i) for i in subject)


def make_predicate(evaluator, name: str | None = None):
    """Wrap an evaluator function into a Predicate factory."""
    pred_name = name or evaluator.__name__

    def factory(subject, **params) -> Predicate:
        return Predicate(pred_name, evaluator, subject, params)

    factory.__name__ = pred_name
    return factory


class Task:
    """One predicate instance plus reward bookkeeping for an episode."""

    def __init__(self, predicate: Predicate, assignee=None,
                 multiplier: float = 1.0):
        self.predicate = predicate
        self.subject = predicate.subject
        self.assignee = _as_ids(assignee) if assignee is not None \
            else predicate.subject
        self.multiplier = float(multiplier)
        self.progress = 0.0
        self.best = 0.0
        self.completed = False
        self.flagged = False

    def to_spec(self) -> dict:
        return {"predicate": self.predicate.name,
                "params": dict(self.predicate.params),
                "subject": list(self.subject),
                "assignee": list(self.assignee),
                "multiplier": self.multiplier}


def evaluate_tasks(gs: GameState, tasks) -> dict[int, float]:
    """Advance every task one tick; returns summed reward per assignee."""
    rewards: dict[int, float] = {}
    for task in tasks:
        try:
            p = task.predicate(gs)
        except TaskError:
            task.flagged = True
            continue
        task.progress = p
        delta = task.multiplier * max(0.0, p - task.best)
        task.best = max(task.best, p)
        if p == 1.0:
            task.completed = True
        if delta > 0.0:
            for aid in task.assignee:
                rewards[aid] = rewards.get(aid, 0.0) + delta
    return rewards


# ----------------------------------------------------------------------
# built-in evaluators
# ----------------------------------------------------------------------

def TickGE(gs, subject, num_tick: int):
    if num_tick < 1:
        raise ParameterError("num_tick must be >= 1")
    return _clamp(gs.current_tick / num_tick)


def CanSeeTile(gs, subject, tile_type: int):
    if tile_type not in set(int(m) for m in Material):
        raise ParameterError(f"unknown material {tile_type}")
    tm = gs.tilemap
    radius = gs.config.vision_radius
    cols = gs.entity_table.columns
    for row in subject._rows():
        if cols["health"][row] <= 0:
            continue
        r, c = int(cols["row"][row]), int(cols["col"][row])
        crop = tm.material[max(0, r - radius): r + radius + 1,
                           max(0, c - radius): c + radius + 1]
        if (crop == tile_type).any():
            return 1.0
    return 0.0


def StayAlive(gs, subject):
    health = subject.health
    return 1.0 if health.size and (health > 0).all() else 0.0


def AllDead(gs, subject):
    total = len(subject)
    if total == 0:
        return 1.0
    dead = total - int((subject.health > 0).sum())
    return _clamp(dead / total)


def DistanceTraveled(gs, subject, dist: int):
    if dist < 1:
        raise ParameterError("dist must be >= 1")
    health = subject.health
    if not (health > 0).any():
        return 0.0
    total = 0
    cols = gs.entity_table.columns
    for eid, row in zip(subject.present_ids, subject._rows()):
        sr, sc = gs.spawn_pos[eid]
        total += max(abs(int(cols["row"][row]) - sr),
                     abs(int(cols["col"][row]) - sc))
    return _clamp(total / dist)


def FullyArmed(gs, subject, combat_style: int, level: int, num_agent: int):
    if combat_style not in (1, 2, 3):
        raise ParameterError(f"unknown combat style {combat_style}")
    style = Skill(combat_style)
    required = set(_ARMOR_SET) | {int(STYLE_WEAPON[style]),
                                  int(STYLE_AMMO[style])}
    if num_agent == 0:
        return 1.0
    count = 0
    items = subject.item
    for eid in subject.present_ids:
        mask = ((items.owner_id == eid) & (items.equipped > 0)
                & (items.level >= level))
        types = set(int(t) for t in items.type_id[mask])
        if required <= types:
            count += 1
    return _ratio(count, num_agent)


def CountEvent(gs, subject, event_type: int, N: int):
    return _ratio(subject.event_count(int(event_type)), N)


def ScoreHit(gs, subject, combat_style: int, N: int):
    if combat_style not in (1, 2, 3):
        raise ParameterError(f"unknown combat style {combat_style}")
    hits = subject.event_count(int(EventType.SCORE_HIT),
                               combat_style=combat_style)
    return _ratio(hits, N)


def HoardGold(gs, subject, amount: int):
    return _ratio(int(subject.gold.sum()), amount)


def OwnItem(gs, subject, type_id: int, level: int, quantity: int):
    items = subject.item
    mask = (items.type_id == type_id) & (items.level >= level)
    return _ratio(int(items.quantity[mask].sum()), quantity)


def EquipItem(gs, subject, type_id: int, level: int, num_agent: int):
    items = subject.item
    mask = ((items.type_id == type_id) & (items.level >= level)
            & (items.equipped > 0))
    count = len(set(int(o) for o in items.owner_id[mask]))
    return _ratio(count, num_agent)


def AttainSkill(gs, subject, skill: int, level: int, num_agent: int):
    if int(skill) not in SKILL_LEVEL_COLS:
        raise ParameterError(f"unknown skill {skill}")
    levels = subject.levels(int(skill))
    return _ratio(int((levels >= level).sum()), num_agent)


def KillPredicate(gs, subject):
    """Per-kill progress with bonus jumps at the first and third kills;
    reaches 1.0 at exactly ten kills."""
    num_kills = subject.event_count(int(EventType.PLAYER_KILL))
    progress = num_kills * 0.06
    if num_kills >= 1:
        progress += 0.1
    if num_kills >= 3:
        progress += 0.3
    return min(progress, 1.0)


BUILTIN_EVALUATORS = {fn.__name__: fn for fn in (
    TickGE, CanSeeTile, StayAlive, AllDead, DistanceTraveled, FullyArmed,
    CountEvent, ScoreHit, HoardGold, OwnItem, EquipItem, AttainSkill,
    KillPredicate)}


# ----------------------------------------------------------------------
# declarative task files
# ----------------------------------------------------------------------

def tasks_from_specs(specs) -> list[Task]:
    """Build tasks from a list of {predicate, params, subject, assignee,
    multiplier} mappings."""
    tasks = []
    for spec in specs:
        try:
            name = spec["predicate"]
            evaluator = BUILTIN_EVALUATORS[name]
            factory = make_predicate(evaluator, name)
            pred = factory(spec["subject"], **spec.get("params", {}))
            tasks.append(pred.create_task(
                assignee=spec.get("assignee"),
                multiplier=spec.get("multiplier", 1.0)))
        except KeyError as exc:
            raise ConfigurationError(f"bad task spec {spec!r}: {exc}") from exc
    return tasks


def load_tasks(path) -> list[Task]:
    with open(path, "r", encoding="utf-8") as fh:
        specs = json.load(fh)
    if not isinstance(specs, list):
        raise ConfigurationError("task file must hold a list of task specs")
    return tasks_from_specs(specs)


def save_tasks(tasks, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([t.to_spec() for t in tasks], fh, indent=2)
        fh.write("\n")
