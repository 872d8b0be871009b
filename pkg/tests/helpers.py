"""Shared world-building helpers: a featureless all-grass map plus direct
state accessors keep system-level tests small and deterministic."""

from gridrealm import SimConfig
from gridrealm.datastore import ColumnTable, TILE_SCHEMA
from gridrealm.defs import EntityKind, Material
from gridrealm.engine import Engine
from gridrealm.worldgen import TileMap


def flat_map(size: int, border: int, respawn_delay: int = 30) -> TileMap:
    table = ColumnTable(TILE_SCHEMA)
    table.alloc_many(size * size)
    tm = TileMap(size, seed=0, table=table, respawn_delay=respawn_delay)
    tm.material[:] = int(Material.GRASS)
    tm.material[:border, :] = int(Material.VOID)
    tm.material[-border:, :] = int(Material.VOID)
    tm.material[:, :border] = int(Material.VOID)
    tm.material[:, -border:] = int(Material.VOID)
    tm._refresh_masks()
    return tm


def flat_engine(seed: int = 0, size: int = 32, **overrides) -> Engine:
    defaults = dict(map_size=size, npc_count=0, max_agents=32)
    defaults.update(overrides)
    cfg = SimConfig(**defaults)
    return Engine(cfg, seed, tilemap=flat_map(size, cfg.border_width,
                                              cfg.respawn_delay))


def place(engine: Engine, eid: int, r: int, c: int) -> None:
    gs = engine.gs
    cols = gs.entity_table.columns
    row = gs.entity_row[eid]
    p = engine._pad
    old_r, old_c = int(cols["row"][row]), int(cols["col"][row])
    if engine.occupancy[old_r + p, old_c + p] == eid:
        engine.occupancy[old_r + p, old_c + p] = 0
    cols["row"][row] = r
    cols["col"][row] = c
    engine.occupancy[r + p, c + p] = eid


def ent(engine: Engine, eid: int, col: str) -> int:
    gs = engine.gs
    return int(gs.entity_table.col(col)[gs.entity_row[eid]])


def set_ent(engine: Engine, eid: int, **cols) -> None:
    gs = engine.gs
    row = gs.entity_row[eid]
    for name, value in cols.items():
        gs.entity_table.columns[name][row] = value


def item(engine: Engine, iid: int, col: str) -> int:
    gs = engine.gs
    return int(gs.item_table.col(col)[gs.item_row[iid]])


def events_of(engine: Engine, event_type) -> list:
    gs = engine.gs
    return [gs.event_record(int(row)) for row in gs.event_table.live_rows()
            if gs.event_table.col("type")[row] == int(event_type)]


def pair(engine: Engine, r1=(10, 10), r2=(10, 11)) -> tuple[int, int]:
    a, b = engine.spawn_agents(2)
    place(engine, a, *r1)
    place(engine, b, *r2)
    return a, b


def spawn_npc_at(engine: Engine, r: int, c: int, disposition, level=1) -> int:
    nid = engine._spawn_entity(int(EntityKind.NPC), int(disposition), 0, 0,
                               combat_level=level, gold=0)
    place(engine, nid, r, c)
    return nid


def put_material(engine: Engine, r: int, c: int, material) -> None:
    engine.tilemap.material[r, c] = int(material)
    engine.tilemap._refresh_masks()
