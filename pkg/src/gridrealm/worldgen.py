"""Procedural square tile maps.

Terrain comes from 3-octave seeded value noise thresholded at field
quantiles (water lowest band, stone highest, forest just below stone);
profession resources are scattered over grass by a per-tile seeded hash and
fish over water. A fixed-width void ring seals the border and the ring just
inside it is forced to grass so spawns always land on passable ground.

Tile storage is columnar (material, depletion, gold per tile, row-major);
the grids exposed here are views over the same arrays, so the tile table
and the map can never disagree.
"""

from __future__ import annotations

import struct

import numpy as np

from .config import SimConfig
from .datastore import TILE_SCHEMA, ColumnTable
from .defs import Material, PASSABLE_MATERIALS, RESOURCE_MATERIALS
from .errors import ConfigurationError, FormatError
from .rng import mix_grid, unit_grid

_MAGIC = b"GRM1"
_MIN_SIZE = 32
_OCTAVE_SPACING = (32, 16, 8)
_OCTAVE_WEIGHT = (1.0, 0.5, 0.25)

_PASSABLE_LUT = np.zeros(len(Material), dtype=bool)
for _m in PASSABLE_MATERIALS:
    _PASSABLE_LUT[int(_m)] = True
_RESOURCE_LUT = np.zeros(len(Material), dtype=bool)
for _m in RESOURCE_MATERIALS:
    _RESOURCE_LUT[int(_m)] = True


def _dilate8(mask: np.ndarray) -> np.ndarray:
    """8-neighbor dilation with zero boundary."""
    out = np.zeros_like(mask)
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr == 0 and dc == 0:
                continue
            src = mask[max(0, -dr): mask.shape[0] - max(0, dr),
                       max(0, -dc): mask.shape[1] - max(0, dc)]
            out[max(0, dr): mask.shape[0] - max(0, -dr),
                max(0, dc): mask.shape[1] - max(0, -dc)] |= src
    return out


class TileMap:
    """Square grid of materials with per-tile depletion timers.

    `material`, `depletion` and `gold` are 2-D views over the columnar tile
    table, so mutations through either surface are one and the same.
    """

    def __init__(self, size: int, seed: int, table: ColumnTable,
                 respawn_delay: int):
        self.size = size
        self.seed = seed
        self.table = table
        self.respawn_delay = respawn_delay
        n = size * size
        self.material = table.col("material")[:n].reshape(size, size)
        self.depletion = table.col("depletion")[:n].reshape(size, size)
        self.gold = table.col("gold")[:n].reshape(size, size)
        self._refresh_masks()

    def _refresh_masks(self) -> None:
        self.passable_mask = _PASSABLE_LUT[self.material]
        self.resource_mask = _RESOURCE_LUT[self.material]
        self.near_water = _dilate8(self.material == int(Material.WATER))

    def in_bounds(self, row: int, col: int) -> bool:
        return 0 <= row < self.size and 0 <= col < self.size

    def passable(self, row: int, col: int) -> bool:
        if not self.in_bounds(row, col):
            return False
        return bool(self.passable_mask[row, col])

    def available(self, row: int, col: int) -> bool:
        """True for a resource tile whose depletion timer has expired."""
        if not self.in_bounds(row, col):
            return False
        return bool(self.resource_mask[row, col]) and self.depletion[row, col] == 0

    def harvest(self, row: int, col: int) -> None:
        self.depletion[row, col] = self.respawn_delay

    def respawn_tick(self) -> None:
        """Advance every depletion timer by one tick toward availability."""
        dep = self.depletion
        np.subtract(dep, 1, out=dep, where=dep > 0)

    # -- serialization ----------------------------------------------------

    def export_bytes(self) -> bytes:
        """Header (size, seed) + one material byte and two timer bytes per tile."""
        n = self.size * self.size
        body = np.empty((n, 3), dtype=np.uint8)
        body[:, 0] = self.material.reshape(n).astype(np.uint8)
        timers = self.depletion.reshape(n).astype(np.uint16)
        body[:, 1] = timers & 0xFF
        body[:, 2] = timers >> 8
        return _MAGIC + struct.pack("<IQ", self.size, self.seed) + body.tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes, respawn_delay: int = 30) -> "TileMap":
        head = len(_MAGIC) + 12
        if len(blob) < head or blob[:4] != _MAGIC:
            raise FormatError("bad map header")
        size, seed = struct.unpack_from("<IQ", blob, 4)
        n = size * size
        if size < _MIN_SIZE or len(blob) != head + 3 * n:
            raise FormatError(f"map blob length {len(blob)} does not match size {size}")
        body = np.frombuffer(blob, dtype=np.uint8, offset=head).reshape(n, 3)
        if body[:, 0].max(initial=0) >= len(Material):
            raise FormatError("map blob holds unknown material codes")
        table = ColumnTable(TILE_SCHEMA)
        table.alloc_many(n)
        table.col("material")[:n] = body[:, 0]
        table.col("depletion")[:n] = (body[:, 1].astype(np.int64)
                                      | (body[:, 2].astype(np.int64) << 8))
        return cls(size, seed, table, respawn_delay)


def _noise_field(seed: int, size: int, octaves: int) -> np.ndarray:
    """Layered value noise in [0, 1), bilinear with smoothstep easing."""
    field = np.zeros((size, size), dtype=np.float64)
    total_w = 0.0
    idx = np.arange(size)
    for octave in range(octaves):
        sp = _OCTAVE_SPACING[octave % len(_OCTAVE_SPACING)]
        w = _OCTAVE_WEIGHT[octave % len(_OCTAVE_WEIGHT)]
        gi, fi = idx // sp, (idx % sp) / sp
        lat_n = size // sp + 2
        lattice = unit_grid(mix_grid(seed, "terrain", np.arange(lat_n),
                                     np.arange(lat_n), extra=octave + 1))
        ti = fi * fi * (3.0 - 2.0 * fi)
        v00 = lattice[np.ix_(gi, gi)]
        v10 = lattice[np.ix_(gi + 1, gi)]
        v01 = lattice[np.ix_(gi, gi + 1)]
        v11 = lattice[np.ix_(gi + 1, gi + 1)]
        a, b = ti[:, None], ti[None, :]
        field += w * ((v00 * (1 - a) + v10 * a) * (1 - b)
                      + (v01 * (1 - a) + v11 * a) * b)
        total_w += w
    return field / total_w


def generate_map(seed: int, size: int, config: SimConfig | None = None) -> TileMap:
    """Deterministic map from (seed, size); see module docstring for layout."""
    if size < _MIN_SIZE:
        raise ConfigurationError(f"map size must be >= {_MIN_SIZE}, got {size}")
    cfg = config if config is not None else SimConfig()
    border = cfg.border_width

    field = _noise_field(seed, size, cfg.noise_octaves)
    interior = field[border: size - border, border: size - border]
    q_water = np.quantile(interior, cfg.water_fraction)
    q_stone = np.quantile(interior, 1.0 - cfg.stone_fraction)
    q_forest = np.quantile(interior, 1.0 - cfg.stone_fraction - cfg.forest_fraction)

    material = np.full((size, size), int(Material.GRASS), dtype=np.int64)
    material[field < q_water] = int(Material.WATER)
    material[field >= q_stone] = int(Material.STONE)
    material[(field >= q_forest) & (field < q_stone)] = int(Material.FOREST)

    # Profession resources replace grass tiles in place, so the passable
    # count is unchanged and per-kind density is exactly the grass-hash rate.
    scatter = unit_grid(mix_grid(seed, "scatter", np.arange(size), np.arange(size)))
    grass = material == int(Material.GRASS)
    d = cfg.resource_density
    for i, mat in enumerate((Material.HERB, Material.ORE, Material.TREE,
                             Material.CRYSTAL)):
        material[grass & (scatter >= i * d) & (scatter < (i + 1) * d)] = int(mat)

    water = material == int(Material.WATER)
    n_passable = int(_PASSABLE_LUT[material].sum())
    n_water = int(water.sum())
    if n_water:
        fish_rate = min(1.0, d * n_passable / n_water)
        fish_hash = unit_grid(mix_grid(seed, "fish", np.arange(size), np.arange(size)))
        material[water & (fish_hash < fish_rate)] = int(Material.FISH)

    material[:border, :] = int(Material.VOID)
    material[size - border:, :] = int(Material.VOID)
    material[:, :border] = int(Material.VOID)
    material[:, size - border:] = int(Material.VOID)

    ring = size - 1 - border
    material[border, border: ring + 1] = int(Material.GRASS)
    material[ring, border: ring + 1] = int(Material.GRASS)
    material[border: ring + 1, border] = int(Material.GRASS)
    material[border: ring + 1, ring] = int(Material.GRASS)

    n = size * size
    table = ColumnTable(TILE_SCHEMA)
    table.alloc_many(n)
    table.col("material")[:n] = material.reshape(n)
    return TileMap(size, seed, table, cfg.respawn_delay)


def passable(tilemap: TileMap, row: int, col: int) -> bool:
    return tilemap.passable(row, col)


def respawn_tick(tilemap: TileMap) -> None:
    tilemap.respawn_tick()


def spawn_ring_positions(size: int, border: int) -> list[tuple[int, int]]:
    """The innermost passable ring adjacent to the void border, clockwise
    from the top-left corner."""
    lo, hi = border, size - 1 - border
    cells = [(lo, c) for c in range(lo, hi + 1)]
    cells += [(r, hi) for r in range(lo + 1, hi + 1)]
    cells += [(hi, c) for c in range(hi - 1, lo - 1, -1)]
    cells += [(r, lo) for r in range(hi - 1, lo, -1)]
    return cells
