"""Flat fixed-shape observation encoding.

Every agent sees one float64 buffer per tick with the same layout: a tile
crop around its position, the nearest visible entities, its own stats, its
inventory, the cheapest market listings, and its task progress. The layout
is published as a versioned machine-readable schema so other runtimes can
decode the buffer without duplicating offsets.
"""

from __future__ import annotations

import numpy as np

from .config import SimConfig
from .datastore import SKILL_LEVEL_COLS, SKILL_XP_COLS
from .defs import ActionKind, Dir, Skill

SCHEMA_VERSION = 1

TILE_FEATURES = ("material", "occupant_kind", "depleted")
ENTITY_FEATURES = ("id", "kind", "row_offset", "col_offset", "health",
                   "melee_level", "range_level", "mage_level", "weapon_type")
SELF_FEATURES = (("id", "row", "col", "health", "food", "water", "gold")
                 + tuple(f"{s.name.lower()}_level" for s in Skill)
                 + tuple(f"{s.name.lower()}_xp" for s in Skill)
                 + ("alive", "tick"))
INVENTORY_FEATURES = ("type_id", "level", "quantity", "equipped", "listed")
MARKET_FEATURES = ("listing_id", "type_id", "level", "price")


def block_layout(config: SimConfig) -> list[dict]:
    """(name, offset, shape, features) for each block, in buffer order."""
    side = 2 * config.vision_radius + 1
    blocks = []
    offset = 0
    for name, shape, features in (
            ("tiles", (side, side, len(TILE_FEATURES)), TILE_FEATURES),
            ("entities", (config.obs_num_entities, len(ENTITY_FEATURES)),
             ENTITY_FEATURES),
            ("self", (len(SELF_FEATURES),), SELF_FEATURES),
            ("inventory", (config.inventory_slots, len(INVENTORY_FEATURES)),
             INVENTORY_FEATURES),
            ("market", (config.obs_num_listings, len(MARKET_FEATURES)),
             MARKET_FEATURES),
            ("tasks", (config.obs_num_tasks,), ("progress",))):
        length = int(np.prod(shape))
        blocks.append({"name": name, "offset": offset, "length": length,
                       "shape": list(shape), "features": list(features)})
        offset += length
    return blocks


def obs_length(config: SimConfig) -> int:
    return sum(b["length"] for b in block_layout(config))


def obs_size_bytes(config: SimConfig) -> int:
    return obs_length(config) * 8


def build_schema(config: SimConfig) -> dict:
    """The machine-readable layout contract emitted for bindings."""
    return {
        "version": SCHEMA_VERSION,
        "dtype": "float64",
        "byte_order": "little",
        "length": obs_length(config),
        "byte_length": obs_size_bytes(config),
        "blocks": block_layout(config),
        "action_kinds": {k.name: int(k) for k in ActionKind},
        "action_payload": {
            "NOOP": [], "MOVE": ["direction"], "ATTACK": ["style", "target"],
            "USE": ["item"], "GATHER": [], "SELL": ["item", "price"],
            "BUY": ["listing"]},
        "directions": {d.name: int(d) for d in Dir},
        "combat_styles": {"MELEE": int(Skill.MELEE), "RANGE": int(Skill.RANGE),
                          "MAGE": int(Skill.MAGE)},
    }


def decode_observation(buf, config: SimConfig) -> dict[str, np.ndarray]:
    """Split one flat buffer back into named, shaped blocks."""
    flat = np.frombuffer(np.asarray(buf, dtype=np.float64).tobytes(),
                         dtype=np.float64)
    out = {}
    for block in block_layout(config):
        piece = flat[block["offset"]: block["offset"] + block["length"]]
        out[block["name"]] = piece.reshape(block["shape"]).copy()
    return out


class ObservationEncoder:
    """Fills per-agent buffers from one engine's state.

    prepare() refreshes the per-tick shared parts (depletion, occupant
    kinds, the global market block); encode() then fills one agent.
    """

    def __init__(self, engine):
        self.engine = engine
        config = engine.config
        self.config = config
        self.length = obs_length(config)
        self.radius = config.vision_radius
        self.side = 2 * self.radius + 1
        blocks = {b["name"]: b for b in block_layout(config)}
        self._off = {name: b["offset"] for name, b in blocks.items()}

        size = engine.tilemap.size
        pad = engine._pad
        assert pad == self.radius
        padded = size + 2 * pad
        self._mat_pad = np.zeros((padded, padded), dtype=np.int64)
        self._mat_pad[pad: pad + size, pad: pad + size] = engine.tilemap.material
        self._dep_pad = np.zeros((padded, padded), dtype=np.int64)
        self._kind_pad = np.zeros((padded, padded), dtype=np.int64)
        self._market_block = np.zeros((config.obs_num_listings,
                                       len(MARKET_FEATURES)))

    def prepare(self) -> None:
        engine = self.engine
        gs = engine.gs
        pad = engine._pad
        size = engine.tilemap.size
        self._dep_pad[pad: pad + size, pad: pad + size] = \
            engine.tilemap.depletion > 0

        self._kind_pad.fill(0)
        occ = engine.occupancy
        rows, cols = np.nonzero(occ)
        for r, c in zip(rows, cols):
            self._kind_pad[r, c] = engine.kind_of[int(occ[r, c])]

        block = self._market_block
        block.fill(0.0)
        table = gs.market_table
        live = np.nonzero(table.live)[0]
        if live.size:
            prices = table.col("price")[live]
            ids = table.col("id")[live]
            order = live[np.lexsort((ids, prices))][:block.shape[0]]
            icols = gs.item_table.columns
            mcols = table.columns
            for i, lrow in enumerate(order):
                irow = gs.item_row[int(mcols["item"][lrow])]
                block[i, 0] = mcols["id"][lrow]
                block[i, 1] = icols["type_id"][irow]
                block[i, 2] = icols["level"][irow]
                block[i, 3] = mcols["price"][lrow]

    def encode(self, agent_id: int, task_progress=(),
               out: np.ndarray | None = None) -> np.ndarray:
        engine = self.engine
        gs = engine.gs
        cfg = self.config
        if out is None:
            out = np.zeros(self.length)
        else:
            out.fill(0.0)
        row = gs.entity_row[agent_id]
        cols = gs.entity_table.columns
        r, c = int(cols["row"][row]), int(cols["col"][row])
        side = self.side

        tiles = out[self._off["tiles"]:
                    self._off["tiles"] + side * side * 3].reshape(side, side, 3)
        tiles[:, :, 0] = self._mat_pad[r: r + side, c: c + side]
        tiles[:, :, 1] = self._kind_pad[r: r + side, c: c + side]
        tiles[:, :, 2] = self._dep_pad[r: r + side, c: c + side]

        crop = engine.occupancy[r: r + side, c: c + side]
        occupants = []
        for rr, cc in np.argwhere(crop != 0):
            eid = int(crop[rr, cc])
            if eid == agent_id:
                continue
            dist = max(abs(int(rr) - self.radius), abs(int(cc) - self.radius))
            occupants.append((dist, eid, int(rr) - self.radius,
                              int(cc) - self.radius))
        occupants.sort()
        width = len(ENTITY_FEATURES)
        base = self._off["entities"]
        for i, (dist, eid, dr, dc) in enumerate(
                occupants[:cfg.obs_num_entities]):
            erow = gs.entity_row[eid]
            weapon_type = 0.0
            weapon_id = int(cols["eq_weapon"][erow])
            if weapon_id:
                weapon_type = gs.item_table.columns["type_id"][
                    gs.item_row[weapon_id]]
            out[base + i * width: base + (i + 1) * width] = (
                eid, cols["kind"][erow], dr, dc, cols["health"][erow],
                cols[SKILL_LEVEL_COLS[int(Skill.MELEE)]][erow],
                cols[SKILL_LEVEL_COLS[int(Skill.RANGE)]][erow],
                cols[SKILL_LEVEL_COLS[int(Skill.MAGE)]][erow], weapon_type)

        base = self._off["self"]
        values = [agent_id, r, c, cols["health"][row], cols["food"][row],
                  cols["water"][row], cols["gold"][row]]
        values += [cols[SKILL_LEVEL_COLS[int(s)]][row] for s in Skill]
        values += [cols[SKILL_XP_COLS[int(s)]][row] for s in Skill]
        values += [cols["alive"][row], gs.current_tick]
        out[base: base + len(SELF_FEATURES)] = values

        itable = gs.item_table
        owned = np.nonzero(itable.live & (itable.col("owner") == agent_id))[0]
        if owned.size:
            owned = owned[np.argsort(itable.col("id")[owned])]
        icols = itable.columns
        width = len(INVENTORY_FEATURES)
        base = self._off["inventory"]
        for i, irow in enumerate(owned[:cfg.inventory_slots]):
            out[base + i * width: base + (i + 1) * width] = (
                icols["type_id"][irow], icols["level"][irow],
                icols["quantity"][irow], icols["equipped"][irow],
                icols["listed"][irow])

        base = self._off["market"]
        out[base: base + self._market_block.size] = self._market_block.ravel()

        base = self._off["tasks"]
        for i, p in enumerate(task_progress[:cfg.obs_num_tasks]):
            out[base + i] = p
        return out
