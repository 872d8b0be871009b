"""Simulation constants.

Every tunable rule of the engine is a named key with a default here, and can
be overridden from a JSON key-value file. Unknown keys are rejected so typos
fail loudly.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass

from .errors import ConfigurationError


@dataclass(frozen=True)
class SimConfig:
    # World
    map_size: int = 140            # tiles per side, border included
    border_width: int = 6          # void ring, impassable
    noise_octaves: int = 3
    water_fraction: float = 0.15   # of interior tiles
    stone_fraction: float = 0.10
    forest_fraction: float = 0.10
    resource_density: float = 0.01  # per resource kind, of passable tiles
    respawn_delay: int = 30        # ticks until a harvested tile restores

    # Population
    max_agents: int = 128
    npc_count: int = 32
    npc_passive_pct: int = 50
    npc_neutral_pct: int = 30
    npc_hostile_pct: int = 20
    npc_gold_per_level: int = 3
    npc_neutral_aggro_radius: int = 3
    npc_hostile_aggro_radius: int = 4

    # Episode
    horizon: int = 1024
    mortality: bool = True         # False clamps health at 1 (benchmark mode)

    # Survival
    decay_period: int = 2          # food/water tick down every N ticks
    starve_damage: int = 5         # per empty resource, per tick
    regen_amount: int = 1
    regen_threshold: int = 50      # food and water must exceed this
    ration_food: int = 50
    potion_heal: int = 50

    # Combat
    combat_base_damage: int = 5
    combat_level_coef: int = 2
    weapon_level_coef: int = 2
    style_multiplier: float = 1.5
    melee_reach: int = 1           # Chebyshev
    ranged_reach: int = 3

    # Progression
    xp_per_level: int = 10         # advance from L when total xp >= L * this
    max_level: int = 10

    # Inventory / market
    inventory_slots: int = 12
    ammo_stack_max: int = 99
    min_price: int = 1
    agent_start_gold: int = 0

    # Observation
    vision_radius: int = 7
    obs_num_entities: int = 64
    obs_num_listings: int = 32
    obs_num_tasks: int = 4

    def __post_init__(self):
        if self.map_size < 32:
            raise ConfigurationError(f"map_size must be >= 32, got {self.map_size}")
        if self.border_width < 1:
            raise ConfigurationError("border_width must be >= 1")
        if self.vision_radius < 1:
            raise ConfigurationError("vision_radius must be >= 1")
        if self.max_agents < 1:
            raise ConfigurationError("max_agents must be >= 1")
        if self.npc_passive_pct + self.npc_neutral_pct + self.npc_hostile_pct != 100:
            raise ConfigurationError("npc disposition percentages must sum to 100")

    @property
    def interior_size(self) -> int:
        return self.map_size - 2 * self.border_width

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **overrides) -> "SimConfig":
        return dataclasses.replace(self, **overrides)

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path: str) -> "SimConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigurationError(f"config {path} must hold a JSON object")
        return cls.from_dict(data)

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def digest(self) -> str:
        """Stable hex digest over the full key-value set."""
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.blake2b(blob, digest_size=8).hexdigest()
