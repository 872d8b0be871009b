"""Deterministic action policies used by the CLI, benchmark, and tests.

Both policies draw every choice from the counter-based generator keyed on
(episode seed, agent id, tick), so a (seed, policy) pair reproduces the
same action stream on any machine with no generator state to carry.
"""

from __future__ import annotations

import numpy as np

from .datastore import SKILL_LEVEL_COLS
from .defs import (ARMOR_TYPES, CONSUMABLE_TYPES, DIR_DELTA, Dir,
                   GATHERABLE_MATERIALS, ITEM_GOVERNING_SKILL, ItemType,
                   Material, NEIGHBORS_8, STYLE_AMMO, Skill)
from .engine import Action, Engine
from .rng import mix_below

_STYLES = (int(Skill.MELEE), int(Skill.RANGE), int(Skill.MAGE))


def _has_gather_target(engine: Engine, r: int, c: int) -> bool:
    tm = engine.tilemap
    if int(tm.material[r, c]) in GATHERABLE_MATERIALS and tm.depletion[r, c] == 0:
        return True
    for dr, dc in NEIGHBORS_8:
        nr, nc = r + dr, c + dc
        if tm.in_bounds(nr, nc) and tm.material[nr, nc] == int(Material.FISH) \
                and tm.depletion[nr, nc] == 0:
            return True
    return False


def _owned_rows(engine: Engine, aid: int) -> np.ndarray:
    table = engine.gs.item_table
    return np.nonzero(table.live & (table.col("owner") == aid))[0]


def _legal_styles(engine: Engine, arow: int, dist: int) -> list[int]:
    cfg = engine.config
    cols = engine.gs.entity_table.columns
    icols = engine.gs.item_table.columns
    styles = []
    if dist <= cfg.melee_reach:
        styles.append(int(Skill.MELEE))
    if dist <= cfg.ranged_reach:
        ammo_id = int(cols["eq_ammo"][arow])
        if ammo_id:
            ammo_type = int(icols["type_id"][engine.gs.item_row[ammo_id]])
            for style in (Skill.RANGE, Skill.MAGE):
                if ammo_type == int(STYLE_AMMO[style]):
                    styles.append(int(style))
    return styles


class RandomPolicy:
    """Uniform choice over each agent's currently legal actions."""

    def __init__(self, seed: int):
        self.seed = seed

    def action(self, engine: Engine, aid: int) -> Action:
        gs = engine.gs
        cfg = engine.config
        cols = gs.entity_table.columns
        row = gs.entity_row[aid]
        r, c = int(cols["row"][row]), int(cols["col"][row])
        tick = gs.current_tick
        pad = engine._pad

        candidates: list[Action] = [Action.noop()]
        for d in Dir:
            dr, dc = DIR_DELTA[d]
            if engine.tilemap.passable(r + dr, c + dc) \
                    and engine.occupancy[r + dr + pad, c + dc + pad] == 0:
                candidates.append(Action.move(int(d)))

        reach = cfg.ranged_reach
        crop = engine.occupancy[r + pad - reach: r + pad + reach + 1,
                                c + pad - reach: c + pad + reach + 1]
        for rr, cc in np.argwhere(crop != 0):
            target = int(crop[rr, cc])
            if target == aid:
                continue
            dist = max(abs(int(rr) - reach), abs(int(cc) - reach))
            for style in _legal_styles(engine, row, dist):
                candidates.append(Action.attack(style, target))

        if _has_gather_target(engine, r, c):
            candidates.append(Action.gather())

        icols = gs.item_table.columns
        for irow in _owned_rows(engine, aid):
            iid = int(icols["id"][irow])
            type_id = int(icols["type_id"][irow])
            if type_id in CONSUMABLE_TYPES:
                candidates.append(Action.use(iid))
            elif not icols["equipped"][irow]:
                if type_id in ARMOR_TYPES:
                    gate = max(int(cols[SKILL_LEVEL_COLS[int(s)]][row])
                               for s in Skill)
                else:
                    skill = ITEM_GOVERNING_SKILL[ItemType(type_id)]
                    gate = int(cols[SKILL_LEVEL_COLS[int(skill)]][row])
                if gate >= int(icols["level"][irow]):
                    candidates.append(Action.use(iid))
                candidates.append(Action.sell(iid, 1 + int(icols["level"][irow])))

        mtable = gs.market_table
        live = np.nonzero(mtable.live)[0]
        if live.size:
            gold = int(cols["gold"][row])
            prices = mtable.col("price")[live]
            sellers = mtable.col("seller")[live]
            ids = mtable.col("id")[live]
            affordable = (prices <= gold) & (sellers != aid)
            for lid in ids[affordable][:8]:
                candidates.append(Action.buy(int(lid)))

        pick = mix_below(self.seed, "policy", len(candidates), aid, tick)
        return candidates[pick]


class ScriptedPolicy:
    """Half the agents trade (gather, sell, buy), half fight (chase and
    attack); roles alternate by id so every run exercises both flows."""

    def __init__(self, seed: int):
        self.seed = seed

    def action(self, engine: Engine, aid: int) -> Action:
        if aid % 2 == 0:
            return self._fighter(engine, aid)
        return self._trader(engine, aid)

    def _wander(self, engine: Engine, aid: int, row: int) -> Action:
        gs = engine.gs
        cols = gs.entity_table.columns
        r, c = int(cols["row"][row]), int(cols["col"][row])
        pad = engine._pad
        roll = mix_below(self.seed, "wander", 4, aid, gs.current_tick)
        for offset in range(4):
            d = (roll + offset) % 4
            dr, dc = DIR_DELTA[Dir(d)]
            if engine.tilemap.passable(r + dr, c + dc) \
                    and engine.occupancy[r + dr + pad, c + dc + pad] == 0:
                return Action.move(d)
        return Action.noop()

    def _fighter(self, engine: Engine, aid: int) -> Action:
        gs = engine.gs
        cols = gs.entity_table.columns
        row = gs.entity_row[aid]
        r, c = int(cols["row"][row]), int(cols["col"][row])
        pad = engine._pad
        reach = engine.config.ranged_reach
        crop = engine.occupancy[r + pad - reach: r + pad + reach + 1,
                                c + pad - reach: c + pad + reach + 1]
        best = None
        for rr, cc in np.argwhere(crop != 0):
            target = int(crop[rr, cc])
            if target == aid:
                continue
            dist = max(abs(int(rr) - reach), abs(int(cc) - reach))
            key = (dist, target)
            if best is None or key < best:
                best = key
        if best is not None:
            dist, target = best
            styles = _legal_styles(engine, row, dist)
            if styles:
                pick = mix_below(self.seed, "style", len(styles), aid,
                                 gs.current_tick)
                return Action.attack(styles[pick], target)
        return self._wander(engine, aid, row)

    def _trader(self, engine: Engine, aid: int) -> Action:
        gs = engine.gs
        cols = gs.entity_table.columns
        icols = gs.item_table.columns
        row = gs.entity_row[aid]
        r, c = int(cols["row"][row]), int(cols["col"][row])
        tick = gs.current_tick

        phase = mix_below(self.seed, "trade", 4, aid, tick)
        owned = _owned_rows(engine, aid)
        unlisted = [irow for irow in owned if not icols["equipped"][irow]]
        if phase == 0 and unlisted:
            irow = unlisted[0]
            return Action.sell(int(icols["id"][irow]),
                               1 + int(icols["level"][irow]))
        if phase == 1:
            mtable = gs.market_table
            live = np.nonzero(mtable.live)[0]
            if live.size:
                gold = int(cols["gold"][row])
                prices = mtable.col("price")[live]
                sellers = mtable.col("seller")[live]
                mask = (prices <= gold) & (sellers != aid)
                rows = live[mask]
                if rows.size:
                    order = np.lexsort((mtable.col("id")[rows],
                                        mtable.col("price")[rows]))
                    return Action.buy(int(mtable.col("id")[rows[order[0]]]))
        if _has_gather_target(engine, r, c) and len(owned) \
                < engine.config.inventory_slots:
            return Action.gather()
        return self._wander(engine, aid, row)


POLICIES = {"random": RandomPolicy, "scripted": ScriptedPolicy}
