"""Per-tick game systems: survival, movement, NPCs, combat, professions,
progression, and the global market.

All mutation happens inside Engine.tick in a fixed phase order (NPC policy,
moves, attacks, gather/use, market, survival, respawn, death cleanup, tick
increment). Ties are broken by ascending entity id and agents always resolve
before NPCs, so a (seed, action sequence) pair fully determines the run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SimConfig
from .datastore import (EventRecord, GameState, SKILL_LEVEL_COLS,
                        SKILL_XP_COLS)
from .defs import (ARMOR_TYPES, ActionKind, DIR_DELTA, Dir, Disposition,
                   EntityKind, EventType, GATHERABLE_MATERIALS,
                   ITEM_GOVERNING_SKILL, ItemType, Material,
                   MATERIAL_PRODUCT, MATERIAL_PROFESSION, NEIGHBORS_8,
                   PROFESSION_TOOL, STACKABLE_TYPES, STYLE_AMMO, STYLE_BEATS,
                   STYLE_WEAPON, Skill, WEAPON_TYPES, TOOL_TYPES)
from .errors import ConfigurationError
from .rng import mix64
from .worldgen import TileMap, generate_map, spawn_ring_positions

_SLOT_FOR_TYPE = {int(ItemType.HAT): "eq_hat", int(ItemType.TOP): "eq_top",
                  int(ItemType.BOTTOM): "eq_bottom"}
for _t in WEAPON_TYPES | TOOL_TYPES:
    _SLOT_FOR_TYPE[int(_t)] = "eq_weapon"
for _t in STYLE_AMMO.values():
    _SLOT_FOR_TYPE[int(_t)] = "eq_ammo"

_ALL_SKILLS = tuple(int(s) for s in Skill)


@dataclass(frozen=True)
class Action:
    """One agent action per tick; (kind, a, b) carry the variant payload.

    MOVE: a=direction. ATTACK: a=style, b=target id. USE: a=item id.
    SELL: a=item id, b=unit price. BUY: a=listing id. GATHER/NOOP: none.
    """

    kind: int = int(ActionKind.NOOP)
    a: int = 0
    b: int = 0

    @classmethod
    def noop(cls):
        return cls()

    @classmethod
    def move(cls, direction: int):
        return cls(int(ActionKind.MOVE), int(direction))

    @classmethod
    def attack(cls, style: int, target: int):
        return cls(int(ActionKind.ATTACK), int(style), int(target))

    @classmethod
    def use(cls, item: int):
        return cls(int(ActionKind.USE), int(item))

    @classmethod
    def gather(cls):
        return cls(int(ActionKind.GATHER))

    @classmethod
    def sell(cls, item: int, price: int):
        return cls(int(ActionKind.SELL), int(item), int(price))

    @classmethod
    def buy(cls, listing: int):
        return cls(int(ActionKind.BUY), int(listing))


class Engine:
    """Owns one GameState plus the derived indexes the systems need."""

    def __init__(self, config: SimConfig, seed: int,
                 tilemap: TileMap | None = None):
        self.config = config
        self.seed = seed
        self.gs = GameState(config)
        if tilemap is None:
            tilemap = generate_map(seed, config.map_size, config)
        self.tilemap = tilemap
        self.gs.tile_table = tilemap.table
        self.gs.tilemap = tilemap

        pad = config.vision_radius
        self._pad = pad
        self.occupancy = np.zeros((tilemap.size + 2 * pad,) * 2, dtype=np.int64)
        self.kind_of: dict[int, int] = {}
        self.ground_items: dict[tuple[int, int], list[int]] = {}
        self.invalid: set[int] = set()
        self._newly_dead: list[int] = []
        self._pending_free: list[int] = []

    # ------------------------------------------------------------------
    # spawning
    # ------------------------------------------------------------------

    def _spawn_entity(self, kind: int, disposition: int, row: int, col: int,
                      combat_level: int, gold: int) -> int:
        gs = self.gs
        table = gs.entity_table
        r = table.alloc()
        eid = gs.next_entity_id
        gs.next_entity_id += 1
        cols = table.columns
        cols["id"][r] = eid
        cols["kind"][r] = kind
        cols["disposition"][r] = disposition
        cols["row"][r] = row
        cols["col"][r] = col
        cols["health"][r] = 100
        cols["food"][r] = 100
        cols["water"][r] = 100
        cols["gold"][r] = gold
        for skill in _ALL_SKILLS:
            cols[SKILL_LEVEL_COLS[skill]][r] = 1
        for skill in (Skill.MELEE, Skill.RANGE, Skill.MAGE):
            cols[SKILL_LEVEL_COLS[int(skill)]][r] = combat_level
        cols["alive"][r] = 1
        gs.entity_row[eid] = r
        gs.ever_entity_ids.add(eid)
        gs.spawn_pos[eid] = (row, col)
        self.kind_of[eid] = kind
        p = self._pad
        self.occupancy[row + p, col + p] = eid
        return eid

    def spawn_agents(self, n: int) -> list[int]:
        """Place n agents evenly around the innermost passable ring."""
        cfg = self.config
        if n > cfg.max_agents:
            raise ConfigurationError(f"{n} agents exceeds max_agents {cfg.max_agents}")
        ring = spawn_ring_positions(self.tilemap.size, cfg.border_width)
        if n > len(ring):
            raise ConfigurationError(f"{n} agents exceed spawn ring capacity {len(ring)}")
        ids = []
        for i in range(n):
            row, col = ring[(i * len(ring)) // n]
            ids.append(self._spawn_entity(int(EntityKind.AGENT),
                                          int(Disposition.NONE), row, col,
                                          combat_level=1,
                                          gold=cfg.agent_start_gold))
        return ids

    def spawn_npcs(self, n: int) -> list[int]:
        """Scatter n NPCs over passable interior tiles; disposition by the
        configured ratio, levels high near the map center and low far out."""
        cfg = self.config
        tm = self.tilemap
        border = cfg.border_width
        interior = np.zeros((tm.size, tm.size), dtype=bool)
        interior[border + 1: tm.size - border - 1,
                 border + 1: tm.size - border - 1] = True
        candidates = np.argwhere(tm.passable_mask & interior)
        if candidates.size == 0 and n > 0:
            raise ConfigurationError("no passable interior tiles for NPCs")
        center = (tm.size - 1) / 2.0
        max_d = max(1.0, tm.size / 2.0 - border)
        p = self._pad
        ids = []
        for i in range(n):
            for attempt in range(64):
                idx = mix64(self.seed, "npcpos", i, attempt) % len(candidates)
                row, col = (int(candidates[idx][0]), int(candidates[idx][1]))
                if self.occupancy[row + p, col + p] == 0:
                    break
            else:
                continue  # map too crowded; skip this NPC
            u = mix64(self.seed, "npcdisp", i) % 100
            if u < cfg.npc_passive_pct:
                disp = Disposition.PASSIVE
            elif u < cfg.npc_passive_pct + cfg.npc_neutral_pct:
                disp = Disposition.NEUTRAL
            else:
                disp = Disposition.HOSTILE
            d = max(abs(row - center), abs(col - center))
            level = int(round(1 + 9 * (1.0 - min(d, max_d) / max_d)))
            level = max(1, min(cfg.max_level, level))
            ids.append(self._spawn_entity(int(EntityKind.NPC), int(disp),
                                          row, col, combat_level=level,
                                          gold=cfg.npc_gold_per_level * level))
        return ids

    # ------------------------------------------------------------------
    # shared helpers
    # ------------------------------------------------------------------

    def _emit(self, type_: int, actor: int, **attrs) -> None:
        self.gs.log_event(EventRecord(tick=self.gs.current_tick,
                                      type=int(type_), actor=int(actor),
                                      **attrs))

    def _flag(self, agent_id: int) -> None:
        self.invalid.add(agent_id)

    def live_ids(self, kind: int | None = None) -> list[int]:
        table = self.gs.entity_table
        mask = table.live & (table.col("alive") == 1)
        if kind is not None:
            mask = mask & (table.col("kind") == kind)
        ids = table.col("id")[mask]
        return sorted(int(i) for i in ids)

    def _is_live(self, eid: int) -> bool:
        row = self.gs.entity_row.get(eid)
        return row is not None and self.gs.entity_table.col("alive")[row] == 1

    def _owned_count(self, eid: int) -> int:
        table = self.gs.item_table
        return int(np.count_nonzero((table.col("owner") == eid) & table.live))

    def _find_stack(self, eid: int, type_id: int, level: int,
                    extra: int = 1) -> int | None:
        """Row of a mergeable unequipped stack, or None."""
        table = self.gs.item_table
        cols = table.columns
        mask = (table.live & (cols["owner"] == eid) & (cols["type_id"] == type_id)
                & (cols["level"] == level) & (cols["equipped"] == 0)
                & (cols["listed"] == 0)
                & (cols["quantity"] + extra <= self.config.ammo_stack_max))
        rows = np.nonzero(mask)[0]
        return int(rows[0]) if rows.size else None

    def _new_item(self, owner: int, type_id: int, level: int,
                  quantity: int = 1) -> int:
        gs = self.gs
        row = gs.item_table.alloc()
        cols = gs.item_table.columns
        iid = gs.next_item_id
        gs.next_item_id += 1
        cols["id"][row] = iid
        cols["type_id"][row] = type_id
        cols["level"][row] = level
        cols["owner"][row] = owner
        cols["quantity"][row] = quantity
        gs.item_row[iid] = row
        return iid

    def give_item(self, eid: int, type_id: int, level: int,
                  quantity: int = 1) -> int | None:
        """Add an item to an inventory, merging ammo stacks; None if full."""
        if type_id in STACKABLE_TYPES:
            stack = self._find_stack(eid, type_id, level, quantity)
            if stack is not None:
                self.gs.item_table.columns["quantity"][stack] += quantity
                return int(self.gs.item_table.columns["id"][stack])
        if self._owned_count(eid) >= self.config.inventory_slots:
            return None
        return self._new_item(eid, type_id, level, quantity)

    def _destroy_item(self, item_id: int) -> None:
        gs = self.gs
        row = gs.item_row.pop(item_id)
        gs.item_table.free(row)

    # ------------------------------------------------------------------
    # movement
    # ------------------------------------------------------------------

    def _move_entity(self, eid: int, direction: int) -> bool:
        if direction not in (0, 1, 2, 3):
            return False
        gs = self.gs
        row = gs.entity_row[eid]
        cols = gs.entity_table.columns
        r, c = int(cols["row"][row]), int(cols["col"][row])
        dr, dc = DIR_DELTA[Dir(direction)]
        nr, nc = r + dr, c + dc
        if not self.tilemap.passable(nr, nc):
            return False
        p = self._pad
        if self.occupancy[nr + p, nc + p] != 0:
            return False
        self.occupancy[r + p, c + p] = 0
        self.occupancy[nr + p, nc + p] = eid
        cols["row"][row] = nr
        cols["col"][row] = nc
        return True

    def _pickup(self, eid: int) -> None:
        """Collect ground gold and as many ground items as fit."""
        gs = self.gs
        cols = gs.entity_table.columns
        row = gs.entity_row[eid]
        r, c = int(cols["row"][row]), int(cols["col"][row])
        pile = int(self.tilemap.gold[r, c])
        if pile > 0:
            cols["gold"][row] += pile
            self.tilemap.gold[r, c] = 0
            self._emit(EventType.EARN_GOLD, eid, amount=pile)
        items = self.ground_items.get((r, c))
        if not items:
            return
        remaining = []
        icols = gs.item_table.columns
        for iid in items:
            irow = gs.item_row[iid]
            type_id = int(icols["type_id"][irow])
            level = int(icols["level"][irow])
            if type_id in STACKABLE_TYPES:
                stack = self._find_stack(eid, type_id, level,
                                         int(icols["quantity"][irow]))
                if stack is not None:
                    icols["quantity"][stack] += icols["quantity"][irow]
                    self._destroy_item(iid)
                    continue
            if self._owned_count(eid) < self.config.inventory_slots:
                icols["owner"][irow] = eid
                icols["row"][irow] = 0
                icols["col"][irow] = 0
            else:
                remaining.append(iid)
        if remaining:
            self.ground_items[(r, c)] = remaining
        else:
            del self.ground_items[(r, c)]

    # ------------------------------------------------------------------
    # combat
    # ------------------------------------------------------------------

    def resolve_attack(self, attacker: int, style: int, target: int) -> int:
        """Apply one attack; returns effective damage (0 if rejected)."""
        gs = self.gs
        cfg = self.config
        cols = gs.entity_table.columns
        arow = gs.entity_row.get(attacker)
        trow = gs.entity_row.get(target)
        if arow is None or cols["alive"][arow] == 0:
            return 0
        style = int(style)
        if style not in (1, 2, 3) or trow is None or cols["alive"][trow] == 0 \
                or target == attacker:
            self._flag(attacker)
            return 0
        ar, ac = int(cols["row"][arow]), int(cols["col"][arow])
        tr, tc = int(cols["row"][trow]), int(cols["col"][trow])
        dist = max(abs(ar - tr), abs(ac - tc))
        reach = cfg.melee_reach if style == int(Skill.MELEE) else cfg.ranged_reach
        if dist > reach:
            self._flag(attacker)
            return 0

        icols = gs.item_table.columns
        ammo_level = 0
        ammo_row = -1
        ammo_id = int(cols["eq_ammo"][arow])
        if ammo_id:
            irow = gs.item_row[ammo_id]
            if int(icols["type_id"][irow]) == int(STYLE_AMMO[Skill(style)]):
                ammo_level = int(icols["level"][irow])
                ammo_row = irow
        if style != int(Skill.MELEE) and ammo_level == 0:
            self._flag(attacker)
            return 0

        weapon_bonus = 0
        weapon_id = int(cols["eq_weapon"][arow])
        if weapon_id:
            irow = gs.item_row[weapon_id]
            if int(icols["type_id"][irow]) == int(STYLE_WEAPON[Skill(style)]):
                weapon_bonus = int(icols["level"][irow]) * cfg.weapon_level_coef

        mult = 1.0
        if int(STYLE_BEATS[Skill(style)]) == int(cols["last_style"][trow]):
            mult = cfg.style_multiplier
        defense = 0
        for slot in ("eq_hat", "eq_top", "eq_bottom"):
            slot_id = int(cols[slot][trow])
            if slot_id:
                defense += int(icols["level"][gs.item_row[slot_id]])
        level = int(cols[SKILL_LEVEL_COLS[style]][arow])
        base = cfg.combat_base_damage + cfg.combat_level_coef * level
        damage = max(1, int(np.floor(mult * (base + weapon_bonus + ammo_level)
                                     - defense)))

        if ammo_level:
            icols["quantity"][ammo_row] -= 1
            if icols["quantity"][ammo_row] <= 0:
                cols["eq_ammo"][arow] = 0
                self._destroy_item(ammo_id)

        old_health = int(cols["health"][trow])
        floor = 0 if cfg.mortality else 1
        new_health = max(floor, old_health - damage)
        effective = old_health - new_health
        cols["health"][trow] = new_health
        cols["last_style"][arow] = style
        cols["last_attacker"][trow] = attacker
        self._emit(EventType.SCORE_HIT, attacker, combat_style=style,
                   target=target, amount=effective)
        cols[SKILL_XP_COLS[style]][arow] += 1
        self.progression_check(attacker, style)
        if new_health == 0:
            self._on_death(target, killer=attacker)
        return effective

    def _on_death(self, victim: int, killer: int | None) -> None:
        """Drops, loot transfer, listing cleanup; the row stays readable
        until the next tick's cleanup phase frees it."""
        gs = self.gs
        cols = gs.entity_table.columns
        vrow = gs.entity_row[victim]
        r, c = int(cols["row"][vrow]), int(cols["col"][vrow])
        cols["health"][vrow] = 0
        cols["alive"][vrow] = 0
        p = self._pad
        if self.occupancy[r + p, c + p] == victim:
            self.occupancy[r + p, c + p] = 0

        # market listings die with their seller
        mtable = gs.market_table
        mcols = mtable.columns
        listing_rows = np.nonzero(mtable.live & (mcols["seller"] == victim))[0]
        for lrow in listing_rows:
            self._destroy_item(int(mcols["item"][lrow]))
            gs.listing_row.pop(int(mcols["id"][lrow]))
            mtable.free(int(lrow))

        gold = int(cols["gold"][vrow])
        cols["gold"][vrow] = 0
        if killer is not None and gold > 0:
            krow = gs.entity_row[killer]
            cols["gold"][krow] += gold
        elif gold > 0:
            self.tilemap.gold[r, c] += gold

        if killer is not None:
            self._emit(EventType.PLAYER_KILL, killer, target=victim,
                       amount=gold)

        itable = gs.item_table
        icols = itable.columns
        owned = np.nonzero(itable.live & (icols["owner"] == victim))[0]
        for irow in owned:
            iid = int(icols["id"][irow])
            if icols["equipped"][irow] and killer is not None:
                self._destroy_item(iid)  # combat kills burn worn gear
            else:
                icols["equipped"][irow] = 0
                icols["owner"][irow] = 0
                icols["row"][irow] = r
                icols["col"][irow] = c
                self.ground_items.setdefault((r, c), []).append(iid)
        for slot in ("eq_hat", "eq_top", "eq_bottom", "eq_weapon", "eq_ammo"):
            cols[slot][vrow] = 0
        self._newly_dead.append(victim)

    # ------------------------------------------------------------------
    # survival
    # ------------------------------------------------------------------

    def survival_step(self, eid: int) -> None:
        gs = self.gs
        cfg = self.config
        cols = gs.entity_table.columns
        row = gs.entity_row[eid]
        if cols["alive"][row] == 0:
            return
        food = int(cols["food"][row])
        water = int(cols["water"][row])
        if gs.current_tick % cfg.decay_period == cfg.decay_period - 1:
            food = max(0, food - 1)
            water = max(0, water - 1)
        r, c = int(cols["row"][row]), int(cols["col"][row])
        tm = self.tilemap
        if food < 100 and tm.material[r, c] == int(Material.FOREST) \
                and tm.depletion[r, c] == 0:
            self._emit(EventType.EAT_FOOD, eid, amount=100 - food)
            food = 100
            tm.harvest(r, c)
        if water < 100 and tm.near_water[r, c]:
            self._emit(EventType.DRINK_WATER, eid, amount=100 - water)
            water = 100
        health = int(cols["health"][row])
        if food == 0:
            health -= cfg.starve_damage
        if water == 0:
            health -= cfg.starve_damage
        if food > cfg.regen_threshold and water > cfg.regen_threshold:
            health = min(100, health + cfg.regen_amount)
        cols["food"][row] = food
        cols["water"][row] = water
        if not cfg.mortality:
            health = max(1, health)
        if health <= 0:
            self._on_death(eid, killer=None)
        else:
            cols["health"][row] = health

    # ------------------------------------------------------------------
    # professions
    # ------------------------------------------------------------------

    def gather(self, eid: int) -> int | None:
        """Harvest the resource under (or, for fish, next to) the agent.
        Returns the produced item id, or None when rejected."""
        gs = self.gs
        cols = gs.entity_table.columns
        row = gs.entity_row[eid]
        r, c = int(cols["row"][row]), int(cols["col"][row])
        tm = self.tilemap
        mat = int(tm.material[r, c])
        tile = None
        if mat in GATHERABLE_MATERIALS and tm.depletion[r, c] == 0:
            tile = (r, c)
        else:
            for dr, dc in NEIGHBORS_8:
                nr, nc = r + dr, c + dc
                if tm.in_bounds(nr, nc) and tm.material[nr, nc] == int(Material.FISH) \
                        and tm.depletion[nr, nc] == 0:
                    tile, mat = (nr, nc), int(Material.FISH)
                    break
        if tile is None:
            self._flag(eid)
            return None
        skill = MATERIAL_PROFESSION[Material(mat)]
        product = MATERIAL_PRODUCT[Material(mat)]
        level = min(self.config.max_level,
                    int(cols[SKILL_LEVEL_COLS[int(skill)]][row]))
        item_id = self.give_item(eid, int(product), level)
        if item_id is None:
            self._flag(eid)
            return None
        tm.harvest(*tile)
        self._emit(EventType.HARVEST_ITEM, eid, item_type=int(product),
                   item_level=level, amount=1)
        xp = 1
        weapon_id = int(cols["eq_weapon"][row])
        if weapon_id:
            irow = gs.item_row[weapon_id]
            icols = gs.item_table.columns
            if int(icols["type_id"][irow]) == int(PROFESSION_TOOL[skill]):
                xp += int(icols["level"][irow])
        cols[SKILL_XP_COLS[int(skill)]][row] += xp
        self.progression_check(eid, int(skill))
        return item_id

    def use_item(self, eid: int, item_id: int) -> bool:
        """Consume a ration/potion or equip gear; False when rejected."""
        gs = self.gs
        cfg = self.config
        cols = gs.entity_table.columns
        icols = gs.item_table.columns
        row = gs.entity_row[eid]
        irow = gs.item_row.get(item_id)
        if irow is None or icols["owner"][irow] != eid:
            self._flag(eid)
            return False
        type_id = int(icols["type_id"][irow])
        level = int(icols["level"][irow])
        if type_id == int(ItemType.RATION) or type_id == int(ItemType.POTION):
            if type_id == int(ItemType.RATION):
                cols["food"][row] = min(100, int(cols["food"][row]) + cfg.ration_food)
            else:
                cols["health"][row] = min(100, int(cols["health"][row]) + cfg.potion_heal)
            self._emit(EventType.CONSUME_ITEM, eid, item_type=type_id,
                       item_level=level, amount=1)
            icols["quantity"][irow] -= 1
            if icols["quantity"][irow] <= 0:
                self._destroy_item(item_id)
            return True
        if icols["equipped"][irow]:
            self._flag(eid)
            return False
        if type_id in ARMOR_TYPES:
            gate = max(int(cols[SKILL_LEVEL_COLS[s]][row]) for s in _ALL_SKILLS)
        else:
            gate = int(cols[SKILL_LEVEL_COLS[int(ITEM_GOVERNING_SKILL[ItemType(type_id)])]][row])
        if gate < level:
            self._flag(eid)
            return False
        slot = _SLOT_FOR_TYPE[type_id]
        prev = int(cols[slot][row])
        if prev:
            icols["equipped"][gs.item_row[prev]] = 0
        cols[slot][row] = item_id
        icols["equipped"][irow] = 1
        self._emit(EventType.EQUIP_ITEM, eid, item_type=type_id,
                   item_level=level)
        return True

    def progression_check(self, eid: int, skill: int) -> int:
        """Advance the skill while total xp clears 10x the current level."""
        gs = self.gs
        cfg = self.config
        cols = gs.entity_table.columns
        row = gs.entity_row[eid]
        level_col = SKILL_LEVEL_COLS[int(skill)]
        level = int(cols[level_col][row])
        xp = int(cols[SKILL_XP_COLS[int(skill)]][row])
        while level < cfg.max_level and xp >= cfg.xp_per_level * level:
            level += 1
            cols[level_col][row] = level
            self._emit(EventType.LEVEL_UP, eid, item_type=int(skill),
                       amount=level)
        return level

    # ------------------------------------------------------------------
    # market
    # ------------------------------------------------------------------

    def market_sell(self, eid: int, item_id: int, price: int) -> int | None:
        """List an owned, unequipped item; returns listing id or None."""
        gs = self.gs
        icols = gs.item_table.columns
        irow = gs.item_row.get(item_id)
        if irow is None or icols["owner"][irow] != eid \
                or icols["equipped"][irow] or icols["listed"][irow] \
                or price < self.config.min_price:
            self._flag(eid)
            return None
        lrow = gs.market_table.alloc()
        mcols = gs.market_table.columns
        lid = gs.next_listing_id
        gs.next_listing_id += 1
        mcols["id"][lrow] = lid
        mcols["seller"][lrow] = eid
        mcols["item"][lrow] = item_id
        mcols["price"][lrow] = price
        mcols["tick"][lrow] = gs.current_tick
        gs.listing_row[lid] = lrow
        icols["listed"][irow] = 1
        icols["owner"][irow] = 0
        self._emit(EventType.LIST_ITEM, eid,
                   item_type=int(icols["type_id"][irow]),
                   item_level=int(icols["level"][irow]), price=price)
        return lid

    def market_buy(self, eid: int, listing_id: int) -> bool:
        gs = self.gs
        cols = gs.entity_table.columns
        icols = gs.item_table.columns
        row = gs.entity_row[eid]
        lrow = gs.listing_row.get(listing_id)
        if lrow is None:
            self._flag(eid)
            return False
        mcols = gs.market_table.columns
        seller = int(mcols["seller"][lrow])
        price = int(mcols["price"][lrow])
        item_id = int(mcols["item"][lrow])
        irow = gs.item_row[item_id]
        type_id = int(icols["type_id"][irow])
        level = int(icols["level"][irow])
        stack = None
        if type_id in STACKABLE_TYPES:
            stack = self._find_stack(eid, type_id, level,
                                     int(icols["quantity"][irow]))
        if seller == eid or int(cols["gold"][row]) < price \
                or (stack is None
                    and self._owned_count(eid) >= self.config.inventory_slots):
            self._flag(eid)
            return False
        cols["gold"][row] -= price
        cols["gold"][gs.entity_row[seller]] += price
        if stack is not None:
            icols["quantity"][stack] += icols["quantity"][irow]
            self._destroy_item(item_id)
        else:
            icols["owner"][irow] = eid
            icols["listed"][irow] = 0
        gs.listing_row.pop(listing_id)
        gs.market_table.free(lrow)
        self._emit(EventType.BUY_ITEM, eid, item_type=type_id,
                   item_level=level, price=price)
        self._emit(EventType.EARN_GOLD, seller, amount=price)
        return True

    # ------------------------------------------------------------------
    # NPC behavior
    # ------------------------------------------------------------------

    def _random_walk(self, eid: int) -> Action:
        roll = mix64(self.seed, "npcwalk", eid, self.gs.current_tick) % 5
        return Action.noop() if roll == 4 else Action.move(roll)

    def _nearest_agent(self, row: int, col: int, radius: int) -> int | None:
        p = self._pad
        crop = self.occupancy[row + p - radius: row + p + radius + 1,
                              col + p - radius: col + p + radius + 1]
        best = None
        for rr, cc in np.argwhere(crop != 0):
            eid = int(crop[rr, cc])
            if self.kind_of.get(eid) != int(EntityKind.AGENT):
                continue
            dist = max(abs(int(rr) - radius), abs(int(cc) - radius))
            key = (dist, eid)
            if best is None or key < best:
                best = key
        return best[1] if best else None

    def npc_policy(self, eid: int) -> Action:
        """Scripted NPC action: passive wanders, neutral retaliates,
        hostile hunts the nearest agent in aggro range."""
        gs = self.gs
        cfg = self.config
        cols = gs.entity_table.columns
        row = gs.entity_row[eid]
        disp = int(cols["disposition"][row])
        r, c = int(cols["row"][row]), int(cols["col"][row])
        if disp == int(Disposition.NEUTRAL):
            attacker = int(cols["last_attacker"][row])
            if attacker and self._is_live(attacker):
                arow = gs.entity_row[attacker]
                dist = max(abs(int(cols["row"][arow]) - r),
                           abs(int(cols["col"][arow]) - c))
                if dist <= cfg.npc_neutral_aggro_radius:
                    return Action.attack(int(Skill.MELEE), attacker)
        elif disp == int(Disposition.HOSTILE):
            target = self._nearest_agent(r, c, cfg.npc_hostile_aggro_radius)
            if target is not None:
                return Action.attack(int(Skill.MELEE), target)
        return self._random_walk(eid)

    def _chase_action(self, eid: int, target: int) -> Action:
        """One step toward the target, preferring the longer axis."""
        gs = self.gs
        cols = gs.entity_table.columns
        row, trow = gs.entity_row[eid], gs.entity_row[target]
        r, c = int(cols["row"][row]), int(cols["col"][row])
        dr = int(cols["row"][trow]) - r
        dc = int(cols["col"][trow]) - c
        options = []
        if dr:
            options.append(Dir.SOUTH if dr > 0 else Dir.NORTH)
        if dc:
            options.append(Dir.EAST if dc > 0 else Dir.WEST)
        if abs(dc) > abs(dr):
            options.reverse()
        p = self._pad
        for d in options:
            ddr, ddc = DIR_DELTA[d]
            if self.tilemap.passable(r + ddr, c + ddc) \
                    and self.occupancy[r + ddr + p, c + ddc + p] == 0:
                return Action.move(int(d))
        return Action.noop()

    # ------------------------------------------------------------------
    # the tick
    # ------------------------------------------------------------------

    def tick(self, actions: dict[int, Action]) -> None:
        """Advance the world one tick; see the module docstring for the
        phase order and tie-break rules."""
        gs = self.gs
        cols = gs.entity_table.columns
        self.invalid.clear()

        agent_actions: list[tuple[int, Action]] = []
        for aid in sorted(actions):
            row = gs.entity_row.get(aid)
            if row is None or cols["alive"][row] == 0 \
                    or cols["kind"][row] != int(EntityKind.AGENT):
                continue
            agent_actions.append((aid, actions[aid]))

        # 1. NPC action selection (attacks out of melee reach become pursuit)
        npc_actions: list[tuple[int, Action]] = []
        for nid in self.live_ids(int(EntityKind.NPC)):
            act = self.npc_policy(nid)
            if act.kind == int(ActionKind.ATTACK):
                row, trow = gs.entity_row[nid], gs.entity_row.get(act.b)
                if trow is not None:
                    dist = max(abs(int(cols["row"][row]) - int(cols["row"][trow])),
                               abs(int(cols["col"][row]) - int(cols["col"][trow])))
                    if dist > self.config.melee_reach:
                        act = self._chase_action(nid, act.b)
            npc_actions.append((nid, act))

        # 2. moves: agents first, then NPCs, each ascending id
        for aid, act in agent_actions:
            if act.kind == int(ActionKind.MOVE):
                if self._move_entity(aid, act.a):
                    self._pickup(aid)
                else:
                    self._flag(aid)
        for nid, act in npc_actions:
            if act.kind == int(ActionKind.MOVE):
                self._move_entity(nid, act.a)

        # 3. attacks
        for aid, act in agent_actions:
            if act.kind == int(ActionKind.ATTACK):
                self.resolve_attack(aid, act.a, act.b)
        for nid, act in npc_actions:
            if act.kind == int(ActionKind.ATTACK):
                self.resolve_attack(nid, act.a, act.b)

        # 4. gather / use
        for aid, act in agent_actions:
            if not self._is_live(aid):
                continue
            if act.kind == int(ActionKind.GATHER):
                self.gather(aid)
            elif act.kind == int(ActionKind.USE):
                self.use_item(aid, act.a)

        # 5. market: all sells, then all buys
        for aid, act in agent_actions:
            if act.kind == int(ActionKind.SELL) and self._is_live(aid):
                self.market_sell(aid, act.a, act.b)
        for aid, act in agent_actions:
            if act.kind == int(ActionKind.BUY) and self._is_live(aid):
                self.market_buy(aid, act.a)
        for aid, act in agent_actions:
            if act.kind not in (int(ActionKind.NOOP), int(ActionKind.MOVE),
                                int(ActionKind.ATTACK), int(ActionKind.GATHER),
                                int(ActionKind.USE), int(ActionKind.SELL),
                                int(ActionKind.BUY)):
                self._flag(aid)

        # 6. survival (agents only; NPCs neither eat nor starve)
        for aid in self.live_ids(int(EntityKind.AGENT)):
            self.survival_step(aid)

        # 7. resource respawn
        self.tilemap.respawn_tick()

        # 8. rows of entities dead since last tick are freed now, so views
        # and observations can still read an entity the tick it died
        for eid in self._pending_free:
            row = gs.entity_row.pop(eid, None)
            if row is not None:
                gs.entity_table.free(row)
        self._pending_free = self._newly_dead
        self._newly_dead = []

        # 9. advance time
        gs.current_tick += 1
