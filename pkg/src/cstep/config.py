"""JSON experiment configuration.

One document with sections ``system``, ``map``, ``env``, ``reward``,
``empowerment``, ``ppo`` and ``eval``. Only ``system.kind`` and ``map.kind``
are required; every other value has a default. Unknown keys are errors so
that a typo cannot silently fall back to a default.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, fields
from typing import Optional

from .dynamics import SystemSpec, system_from_dict
from .empowerment import EmpowermentParams
from .envs import EnvConfig
from .errors import ConfigError
from .reward import RewardConfig
from .rl.ppo import PpoConfig
from .world import CorridorTemplate, LidarConfig, WorldMap, point_maze

SECTIONS = ("system", "map", "env", "reward", "empowerment", "ppo", "eval")
MAP_KINDS = ("point_maze", "corridor", "fixed")
ENV_KEYS = ("control_dt", "substeps", "max_steps", "lidar")
LIDAR_KEYS = ("beam_count", "max_range")
FIXED_MAP_KEYS = ("bounds", "obstacles", "start_region", "goal_position", "goal_radius",
                  "agent_radius", "regions", "clear_x")


@dataclass(frozen=True)
class EvalConfig:
    episodes: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.episodes < 1:
            raise ConfigError("must be >= 1", "eval.episodes")


@dataclass(frozen=True)
class ExperimentConfig:
    env: EnvConfig
    ppo: PpoConfig
    eval: EvalConfig
    resolved: dict

    @property
    def hash(self) -> str:
        return config_hash(self.resolved)


def _names(cls) -> list:
    return [f.name for f in fields(cls) if f.init]


def _check_keys(d, allowed, section: str) -> dict:
    if not isinstance(d, dict):
        raise ConfigError("must be an object", section)
    for k in d:
        if k not in allowed:
            raise ConfigError(f"unknown key {k!r}", f"{section}.{k}" if section else k)
    return d


def _build(cls, d: dict, section: str):
    _check_keys(d, _names(cls), section)
    try:
        return cls(**d)
    except TypeError as e:
        raise ConfigError(str(e), section) from None


def _jsonable(d: dict) -> dict:
    return json.loads(json.dumps(d))


def _map_section(d: dict):
    if "kind" not in d:
        raise ConfigError("required field missing", "map.kind")
    kind = d["kind"]
    if kind not in MAP_KINDS:
        raise ConfigError(f"unknown map kind {kind!r}; expected one of {MAP_KINDS}", "map.kind")
    rest = {k: v for k, v in d.items() if k != "kind"}
    if kind == "point_maze":
        _check_keys(rest, (), "map")
        return point_maze(), {"kind": kind}
    if kind == "corridor":
        rest = {k: tuple(v) if isinstance(v, list) else v for k, v in rest.items()}
        t = _build(CorridorTemplate, rest, "map")
        return t, {"kind": kind, **_jsonable(t.to_dict())}
    _check_keys(rest, FIXED_MAP_KEYS, "map")
    for req in ("bounds", "goal_position"):
        if req not in rest:
            raise ConfigError("required field missing", f"map.{req}")
    w = WorldMap.from_dict(rest)
    return w, {"kind": kind, **_jsonable(w.to_dict())}


def parse_config(doc: dict) -> ExperimentConfig:
    """Validate a config document and materialise every default."""
    _check_keys(doc, SECTIONS, "")
    sys_d = dict(doc.get("system") or {})
    if "kind" not in sys_d:
        raise ConfigError("required field missing", "system.kind")
    _check_keys(sys_d, _names(SystemSpec), "system")
    try:
        system = system_from_dict(sys_d)
    except TypeError as e:
        raise ConfigError(str(e), "system") from None
    world, map_resolved = _map_section(dict(doc.get("map") or {}))

    env_d = dict(_check_keys(doc.get("env") or {}, ENV_KEYS, "env"))
    lidar_default = LidarConfig() if isinstance(world, CorridorTemplate) else None
    if "lidar" in env_d:
        lid = env_d.pop("lidar")
        lidar = None if lid is None else _build(LidarConfig, lid, "env.lidar")
    else:
        lidar = lidar_default
    reward = _build(RewardConfig, dict(doc.get("reward") or {}), "reward")
    emp = _build(EmpowermentParams, dict(doc.get("empowerment") or {}), "empowerment")
    env = EnvConfig(system=system, world=world, reward=reward, empowerment=emp, lidar=lidar,
                    **{k: env_d[k] for k in env_d})
    ppo_d = dict(doc.get("ppo") or {})
    ppo = _build(PpoConfig, ppo_d, "ppo")
    ev = _build(EvalConfig, dict(doc.get("eval") or {}), "eval")

    resolved = {
        "system": system.to_dict(),
        "map": map_resolved,
        "env": {"control_dt": env.control_dt, "substeps": env.substeps, "max_steps": env.max_steps,
                "lidar": None if lidar is None else {"beam_count": lidar.beam_count, "max_range": lidar.max_range}},
        "reward": reward.to_dict(),
        "empowerment": emp.to_dict(),
        "ppo": ppo.to_dict(),
        "eval": {"episodes": ev.episodes, "seed": ev.seed},
    }
    return ExperimentConfig(env, ppo, ev, _jsonable(resolved))


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from None
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from None
    return parse_config(doc)


def config_hash(resolved: dict) -> str:
    blob = json.dumps(resolved, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def dump_resolved(cfg: ExperimentConfig, path: Optional[str] = None) -> str:
    text = json.dumps(cfg.resolved, indent=2, sort_keys=True) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
