"""Deterministic multi-agent grid-world simulation with a columnar game
state, float-valued task rewards, and a parallel environment API."""

__version__ = "0.1.0"

from .config import SimConfig
from .datastore import GameState, GroupView, event_query, state_digest
from .engine import Action, Engine
from .env import Env, StepResult, decode_action
from .errors import (ConfigurationError, FormatError, GridRealmError,
                     LifecycleError, LogicError, ParameterError, QueryError,
                     TaskError)
from .obs import build_schema, decode_observation, obs_size_bytes
from .tasks import (Task, evaluate_tasks, load_tasks, make_predicate,
                    save_tasks, tasks_from_specs)
from .worldgen import TileMap, generate_map

__all__ = [
    "__version__", "SimConfig", "GameState", "GroupView", "event_query",
    "state_digest", "Action", "Engine", "Env", "StepResult", "decode_action",
    "GridRealmError", "ConfigurationError", "FormatError", "LifecycleError",
    "LogicError", "ParameterError", "QueryError", "TaskError",
    "build_schema", "decode_observation", "obs_size_bytes", "Task",
    "evaluate_tasks", "load_tasks", "make_predicate", "save_tasks",
    "tasks_from_specs", "TileMap", "generate_map",
]
