"""Columnar game-state storage.

All live state lives in flat per-column int64/float64 arrays (one ColumnTable
per concern: entities, tiles, items, market, events) instead of object
graphs. Rows are allocated from a lowest-index-first free list, freed rows
are zeroed on reuse, and a per-row generation counter catches stale ids.

The event table is append-only within an episode and feeds a running hash so
state digests stay O(live state) per call instead of O(history).
"""

from __future__ import annotations

import hashlib
import heapq
import struct
from dataclasses import dataclass

import numpy as np

from .config import SimConfig
from .defs import EventType
from .errors import ConfigurationError, LogicError, QueryError

INT = "int"
REAL = "real"

_DTYPES = {INT: np.int64, REAL: np.float64}

ENTITY_SCHEMA = [
    ("id", INT), ("kind", INT), ("disposition", INT),
    ("row", INT), ("col", INT),
    ("health", INT), ("food", INT), ("water", INT), ("gold", INT),
    ("melee_level", INT), ("range_level", INT), ("mage_level", INT),
    ("herbalism_level", INT), ("fishing_level", INT), ("prospecting_level", INT),
    ("carving_level", INT), ("alchemy_level", INT),
    ("melee_xp", INT), ("range_xp", INT), ("mage_xp", INT),
    ("herbalism_xp", INT), ("fishing_xp", INT), ("prospecting_xp", INT),
    ("carving_xp", INT), ("alchemy_xp", INT),
    ("eq_hat", INT), ("eq_top", INT), ("eq_bottom", INT),
    ("eq_weapon", INT), ("eq_ammo", INT),
    ("alive", INT), ("last_style", INT), ("last_attacker", INT),
]

TILE_SCHEMA = [("material", INT), ("depletion", INT), ("gold", INT)]

ITEM_SCHEMA = [
    ("id", INT), ("type_id", INT), ("level", INT), ("owner", INT),
    ("equipped", INT), ("listed", INT), ("quantity", INT),
    ("row", INT), ("col", INT),
]

MARKET_SCHEMA = [
    ("id", INT), ("seller", INT), ("item", INT), ("price", INT), ("tick", INT),
]

EVENT_SCHEMA = [
    ("id", INT), ("tick", INT), ("type", INT), ("actor", INT),
    ("combat_style", INT), ("target", INT), ("item_type", INT),
    ("item_level", INT), ("price", INT), ("amount", INT),
]

# Event attribute columns usable as equality filters in queries.
EVENT_FILTER_COLUMNS = frozenset(
    {"combat_style", "target", "item_type", "item_level", "price", "amount",
     "actor", "tick"}
)

# Column name per skill id (defs.Skill order).
SKILL_LEVEL_COLS = {
    1: "melee_level", 2: "range_level", 3: "mage_level",
    4: "herbalism_level", 5: "fishing_level", 6: "prospecting_level",
    7: "carving_level", 8: "alchemy_level",
}
SKILL_XP_COLS = {
    1: "melee_xp", 2: "range_xp", 3: "mage_xp",
    4: "herbalism_xp", 5: "fishing_xp", 6: "prospecting_xp",
    7: "carving_xp", 8: "alchemy_xp",
}


class ColumnTable:
    """Dense columnar table with a live-row bitmap and a reusable free list.

    Every column has length == capacity at all times; live rows always hold
    defined values (allocation zero-fills). Freeing bumps the row's
    generation counter so stale (row, generation) handles can be detected.
    """

    def __init__(self, schema):
        if not schema:
            raise ConfigurationError("table schema must not be empty")
        names = [name for name, _ in schema]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"duplicate column names in schema: {names}")
        for name, kind in schema:
            if kind not in _DTYPES:
                raise ConfigurationError(f"unknown cell kind {kind!r} for column {name!r}")
        self.schema = list(schema)
        self.capacity = 0
        self.columns = {name: np.empty(0, dtype=_DTYPES[kind]) for name, kind in schema}
        self.live = np.zeros(0, dtype=bool)
        self.generation = np.zeros(0, dtype=np.int64)
        self._free: list[int] = []
        self._num_live = 0

    def __len__(self) -> int:
        return self._num_live

    def col(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise QueryError(f"unknown column {name!r}") from None

    def _grow(self, minimum: int) -> None:
        new_cap = max(16, self.capacity * 2, minimum)
        for name in self.columns:
            old = self.columns[name]
            arr = np.zeros(new_cap, dtype=old.dtype)
            arr[: self.capacity] = old
            self.columns[name] = arr
        live = np.zeros(new_cap, dtype=bool)
        live[: self.capacity] = self.live
        self.live = live
        gen = np.zeros(new_cap, dtype=np.int64)
        gen[: self.capacity] = self.generation
        self.generation = gen
        for row in range(self.capacity, new_cap):
            heapq.heappush(self._free, row)
        self.capacity = new_cap

    def alloc(self) -> int:
        """Allocate the lowest free row, zero-filled."""
        if not self._free:
            self._grow(self.capacity + 1)
        row = heapq.heappop(self._free)
        for arr in self.columns.values():
            arr[row] = 0
        self.live[row] = True
        self._num_live += 1
        return row

    def alloc_many(self, count: int) -> np.ndarray:
        if self.capacity == 0:
            # Bulk init of an empty table skips the per-row free-list walk.
            self.capacity = count
            self.columns = {name: np.zeros(count, dtype=_DTYPES[kind])
                            for name, kind in self.schema}
            self.live = np.ones(count, dtype=bool)
            self.generation = np.zeros(count, dtype=np.int64)
            self._free = []
            self._num_live = count
            return np.arange(count, dtype=np.int64)
        return np.array([self.alloc() for _ in range(count)], dtype=np.int64)

    def free(self, row: int) -> None:
        if row < 0 or row >= self.capacity or not self.live[row]:
            raise LogicError(f"free of dead or out-of-range row {row}")
        self.live[row] = False
        self.generation[row] += 1
        self._num_live -= 1
        heapq.heappush(self._free, row)

    def live_rows(self) -> np.ndarray:
        return np.nonzero(self.live)[0]

    def where_in(self, column: str, values) -> np.ndarray:
        """Live rows whose cell is in `values`, ascending."""
        arr = self.col(column)
        vals = np.asarray(list(values) if isinstance(values, (set, frozenset)) else values)
        if vals.size == 0:
            return np.empty(0, dtype=np.int64)
        mask = np.isin(arr, vals) & self.live
        return np.nonzero(mask)[0]

    def digest_into(self, hasher, label: bytes) -> None:
        """Feed live rows in (row, column) order into `hasher`."""
        hasher.update(label)
        hasher.update(";".join(name for name, _ in self.schema).encode())
        rows = self.live_rows()
        hasher.update(struct.pack("<QQ", rows.size, len(self.schema)))
        if rows.size == 0:
            return
        mat = np.empty((rows.size, len(self.schema)), dtype=np.int64)
        for j, (name, _) in enumerate(self.schema):
            col = self.columns[name]
            mat[:, j] = col[rows] if col.dtype == np.int64 else col[rows].view(np.int64)
        hasher.update(mat.tobytes())


def table_digest(table: ColumnTable) -> int:
    """64-bit digest of a single table's live content."""
    h = hashlib.blake2b(digest_size=8)
    table.digest_into(h, b"table")
    return int.from_bytes(h.digest(), "little")


@dataclass
class EventRecord:
    """One event-log row; unused attributes stay zero."""

    tick: int
    type: int
    actor: int
    combat_style: int = 0
    target: int = 0
    item_type: int = 0
    item_level: int = 0
    price: int = 0
    amount: int = 0
    id: int = -1

    def as_row(self) -> tuple:
        return (self.id, self.tick, self.type, self.actor, self.combat_style,
                self.target, self.item_type, self.item_level, self.price,
                self.amount)


class GameState:
    """Tick counter, config, the columnar tables, and spawn positions."""

    def __init__(self, config: SimConfig):
        self.config = config
        self.current_tick = 0
        self.entity_table = ColumnTable(ENTITY_SCHEMA)
        self.tile_table = ColumnTable(TILE_SCHEMA)
        self.item_table = ColumnTable(ITEM_SCHEMA)
        self.market_table = ColumnTable(MARKET_SCHEMA)
        self.event_table = ColumnTable(EVENT_SCHEMA)
        self.spawn_pos: dict[int, tuple[int, int]] = {}
        self.tilemap = None  # set by the engine after map generation

        # id -> live row indexes; ids are never reused within an episode
        self.entity_row: dict[int, int] = {}
        self.item_row: dict[int, int] = {}
        self.listing_row: dict[int, int] = {}
        self.ever_entity_ids: set[int] = set()
        self.next_entity_id = 1
        self.next_item_id = 1
        self.next_listing_id = 1

        self._event_hasher = hashlib.blake2b(digest_size=16)

    # -- events ---------------------------------------------------------

    def log_event(self, record: EventRecord) -> int:
        """Append an event; returns its id (strictly increasing from 0)."""
        if record.tick != self.current_tick:
            raise LogicError(
                f"event tick {record.tick} != current tick {self.current_tick}")
        row = self.event_table.alloc()
        record.id = row
        cols = self.event_table.columns
        for (name, _), value in zip(EVENT_SCHEMA, record.as_row()):
            cols[name][row] = value
        self._event_hasher.update(struct.pack("<10q", *record.as_row()))
        return row

    def event_log_digest(self) -> int:
        """Digest of the append-only event stream so far."""
        return int.from_bytes(self._event_hasher.copy().digest()[:8], "little")

    def event_record(self, row: int) -> EventRecord:
        cols = self.event_table.columns
        return EventRecord(
            id=int(cols["id"][row]), tick=int(cols["tick"][row]),
            type=int(cols["type"][row]), actor=int(cols["actor"][row]),
            combat_style=int(cols["combat_style"][row]),
            target=int(cols["target"][row]), item_type=int(cols["item_type"][row]),
            item_level=int(cols["item_level"][row]), price=int(cols["price"][row]),
            amount=int(cols["amount"][row]))

    # -- views ----------------------------------------------------------

    def group_view(self, ids) -> "GroupView":
        return GroupView(self, ids)

    # -- digest ---------------------------------------------------------

    def state_digest(self) -> int:
        """64-bit digest over the clock and all live rows of all tables."""
        h = hashlib.blake2b(digest_size=8)
        h.update(struct.pack("<q", self.current_tick))
        self.entity_table.digest_into(h, b"entity")
        self.tile_table.digest_into(h, b"tile")
        self.item_table.digest_into(h, b"item")
        self.market_table.digest_into(h, b"market")
        h.update(b"event")
        h.update(self._event_hasher.copy().digest())
        return int.from_bytes(h.digest(), "little")


def state_digest(gs: GameState) -> int:
    return gs.state_digest()


class GroupItems:
    """Vectorized accessors over the items owned by a group's members."""

    def __init__(self, gs: GameState, ids: tuple):
        table = gs.item_table
        owners = table.col("owner")
        mask = np.isin(owners, np.fromiter(ids, dtype=np.int64, count=len(ids)))
        mask &= table.live
        self._rows = np.nonzero(mask)[0]
        self._table = table

    def __len__(self) -> int:
        return self._rows.size

    def _get(self, name: str) -> np.ndarray:
        return self._table.col(name)[self._rows]

    @property
    def type_id(self) -> np.ndarray:
        return self._get("type_id")

    @property
    def level(self) -> np.ndarray:
        return self._get("level")

    @property
    def owner_id(self) -> np.ndarray:
        return self._get("owner")

    @property
    def equipped(self) -> np.ndarray:
        return self._get("equipped")

    @property
    def listed(self) -> np.ndarray:
        return self._get("listed")

    @property
    def quantity(self) -> np.ndarray:
        return self._get("quantity")


class GroupView:
    """An ordered set of entity ids with index-aligned vector accessors.

    Members whose rows have been freed (dead and removed) drop out and the
    view shrinks; a member that died this tick still yields its final row.
    """

    def __init__(self, gs: GameState, ids):
        ids = (ids,) if isinstance(ids, int) else tuple(ids)
        for id_ in ids:
            if id_ not in gs.ever_entity_ids:
                raise QueryError(f"unknown entity id {id_}")
        self.gs = gs
        self.ids = ids

    def _rows(self) -> np.ndarray:
        lookup = self.gs.entity_row
        return np.fromiter(
            (lookup[i] for i in self.ids if i in lookup), dtype=np.int64)

    def __len__(self) -> int:
        lookup = self.gs.entity_row
        return sum(1 for i in self.ids if i in lookup)

    @property
    def present_ids(self) -> tuple:
        lookup = self.gs.entity_row
        return tuple(i for i in self.ids if i in lookup)

    def _get(self, name: str) -> np.ndarray:
        return self.gs.entity_table.col(name)[self._rows()]

    @property
    def row(self) -> np.ndarray:
        return self._get("row")

    @property
    def col(self) -> np.ndarray:
        return self._get("col")

    @property
    def health(self) -> np.ndarray:
        return self._get("health")

    @property
    def gold(self) -> np.ndarray:
        return self._get("gold")

    def levels(self, skill: int) -> np.ndarray:
        return self._get(SKILL_LEVEL_COLS[int(skill)])

    @property
    def item(self) -> GroupItems:
        return GroupItems(self.gs, self.ids)

    # -- event sub-view ---------------------------------------------------

    def _event_mask(self, event_type: int, filters: dict) -> np.ndarray:
        table = self.gs.event_table
        n = len(table)  # append-only: live rows are exactly 0..n-1
        types = table.col("type")[:n]
        mask = types == int(event_type)
        actors = table.col("actor")[:n]
        mask &= np.isin(actors, np.fromiter(self.ids, dtype=np.int64,
                                            count=len(self.ids)))
        for name, value in filters.items():
            if name not in EVENT_FILTER_COLUMNS:
                raise QueryError(f"unknown event filter attribute {name!r}")
            mask &= table.col(name)[:n] == int(value)
        return mask

    def event_count(self, event_type: int, **filters) -> int:
        return int(np.count_nonzero(self._event_mask(event_type, filters)))

    def event_query(self, event_type: int, **filters) -> list[EventRecord]:
        """Matching records, in tick (append) order."""
        rows = np.nonzero(self._event_mask(event_type, filters))[0]
        return [self.gs.event_record(int(r)) for r in rows]

    def event_amount_sum(self, event_type: int, **filters) -> int:
        mask = self._event_mask(event_type, filters)
        n = mask.size
        return int(self.gs.event_table.col("amount")[:n][mask].sum())


def event_query(view: GroupView, event_type: int, **filters) -> list[EventRecord]:
    if int(event_type) not in set(int(e) for e in EventType):
        raise QueryError(f"unknown event type {event_type}")
    return view.event_query(event_type, **filters)
