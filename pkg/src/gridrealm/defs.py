"""Shared game constants: materials, items, skills, events, actions.

Everything is a small integer so it can live in int64 table columns and in
flat observation buffers.
"""

from __future__ import annotations

import enum


class Material(enum.IntEnum):
    VOID = 0
    WATER = 1
    GRASS = 2
    STONE = 3
    FOREST = 4
    HERB = 5
    FISH = 6
    ORE = 7
    TREE = 8
    CRYSTAL = 9


PASSABLE_MATERIALS = frozenset(
    {Material.GRASS, Material.FOREST, Material.HERB, Material.ORE,
     Material.TREE, Material.CRYSTAL}
)

# Tiles that carry a depletion timer when harvested.
RESOURCE_MATERIALS = frozenset(
    {Material.FOREST, Material.HERB, Material.FISH, Material.ORE,
     Material.TREE, Material.CRYSTAL}
)

# Resources collected through a profession (forest is eaten, not gathered).
GATHERABLE_MATERIALS = frozenset(
    {Material.HERB, Material.FISH, Material.ORE, Material.TREE,
     Material.CRYSTAL}
)


class ItemType(enum.IntEnum):
    RATION = 1
    HAT = 2
    TOP = 3
    BOTTOM = 4
    SPEAR = 5
    BOW = 6
    WAND = 7
    ROD = 8
    PICKAXE = 9
    AXE = 10
    CHISEL = 11
    SICKLE = 12
    WHETSTONE = 13
    ARROWS = 14
    RUNES = 15
    POTION = 16


ARMOR_TYPES = frozenset({ItemType.HAT, ItemType.TOP, ItemType.BOTTOM})
WEAPON_TYPES = frozenset({ItemType.SPEAR, ItemType.BOW, ItemType.WAND})
TOOL_TYPES = frozenset(
    {ItemType.ROD, ItemType.PICKAXE, ItemType.AXE, ItemType.CHISEL,
     ItemType.SICKLE}
)
AMMO_TYPES = frozenset({ItemType.WHETSTONE, ItemType.ARROWS, ItemType.RUNES})
CONSUMABLE_TYPES = frozenset({ItemType.RATION, ItemType.POTION})
STACKABLE_TYPES = AMMO_TYPES


class Skill(enum.IntEnum):
    MELEE = 1
    RANGE = 2
    MAGE = 3
    HERBALISM = 4
    FISHING = 5
    PROSPECTING = 6
    CARVING = 7
    ALCHEMY = 8


COMBAT_SKILLS = (Skill.MELEE, Skill.RANGE, Skill.MAGE)
PROFESSION_SKILLS = (Skill.HERBALISM, Skill.FISHING, Skill.PROSPECTING,
                     Skill.CARVING, Skill.ALCHEMY)

# Combat style == the matching combat skill id.
STYLE_WEAPON = {
    Skill.MELEE: ItemType.SPEAR,
    Skill.RANGE: ItemType.BOW,
    Skill.MAGE: ItemType.WAND,
}
STYLE_AMMO = {
    Skill.MELEE: ItemType.WHETSTONE,
    Skill.RANGE: ItemType.ARROWS,
    Skill.MAGE: ItemType.RUNES,
}
# style -> the style it has an advantage over (melee > range > mage > melee)
STYLE_BEATS = {Skill.MELEE: Skill.RANGE, Skill.RANGE: Skill.MAGE,
               Skill.MAGE: Skill.MELEE}

# Gathering: tile material -> (profession, product item type)
MATERIAL_PROFESSION = {
    Material.HERB: Skill.HERBALISM,
    Material.FISH: Skill.FISHING,
    Material.ORE: Skill.PROSPECTING,
    Material.TREE: Skill.CARVING,
    Material.CRYSTAL: Skill.ALCHEMY,
}
MATERIAL_PRODUCT = {
    Material.HERB: ItemType.POTION,
    Material.FISH: ItemType.RATION,
    Material.ORE: ItemType.WHETSTONE,
    Material.TREE: ItemType.ARROWS,
    Material.CRYSTAL: ItemType.RUNES,
}
PROFESSION_TOOL = {
    Skill.HERBALISM: ItemType.SICKLE,
    Skill.FISHING: ItemType.ROD,
    Skill.PROSPECTING: ItemType.PICKAXE,
    Skill.CARVING: ItemType.AXE,
    Skill.ALCHEMY: ItemType.CHISEL,
}

# Equip gate: which skill governs an item type (armor is gated by the
# wearer's best skill, handled separately in systems).
ITEM_GOVERNING_SKILL = {
    ItemType.SPEAR: Skill.MELEE,
    ItemType.BOW: Skill.RANGE,
    ItemType.WAND: Skill.MAGE,
    ItemType.WHETSTONE: Skill.MELEE,
    ItemType.ARROWS: Skill.RANGE,
    ItemType.RUNES: Skill.MAGE,
    ItemType.ROD: Skill.FISHING,
    ItemType.PICKAXE: Skill.PROSPECTING,
    ItemType.AXE: Skill.CARVING,
    ItemType.CHISEL: Skill.ALCHEMY,
    ItemType.SICKLE: Skill.HERBALISM,
}


class EventType(enum.IntEnum):
    SCORE_HIT = 1
    PLAYER_KILL = 2
    HARVEST_ITEM = 3
    CONSUME_ITEM = 4
    EQUIP_ITEM = 5
    LEVEL_UP = 6
    EAT_FOOD = 7
    DRINK_WATER = 8
    LIST_ITEM = 9
    BUY_ITEM = 10
    EARN_GOLD = 11


class EntityKind(enum.IntEnum):
    NONE = 0
    AGENT = 1
    NPC = 2


class Disposition(enum.IntEnum):
    NONE = 0
    PASSIVE = 1
    NEUTRAL = 2
    HOSTILE = 3


class Dir(enum.IntEnum):
    NORTH = 0
    SOUTH = 1
    EAST = 2
    WEST = 3


DIR_DELTA = {
    Dir.NORTH: (-1, 0),
    Dir.SOUTH: (1, 0),
    Dir.EAST: (0, 1),
    Dir.WEST: (0, -1),
}

# 8-neighborhood scan order, fixed for determinism.
NEIGHBORS_8 = ((-1, -1), (-1, 0), (-1, 1), (0, -1),
               (0, 1), (1, -1), (1, 0), (1, 1))


class ActionKind(enum.IntEnum):
    NOOP = 0
    MOVE = 1
    ATTACK = 2
    USE = 3
    GATHER = 4
    SELL = 5
    BUY = 6
