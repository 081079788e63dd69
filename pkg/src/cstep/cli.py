"""Command line front-end: ``cstep train|eval|empmap|reachset``.

Exit codes: 0 ok, 2 configuration error, 3 dimension or state error,
4 training diverged (the last good snapshot is still written).
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from .config import ExperimentConfig, dump_resolved, load_config
from .dynamics import SystemState
from .empowerment import empowerment_field, field_to_dict, reachable_set
from .errors import ConfigError, ContractViolation, TrainingError
from .evaluation import evaluate, write_episodes
from .rl.nets import ActorCritic
from .rl.ppo import STATS_FIELDS, train
from .rl.snapshot import load_snapshot, save_snapshot
from .world import CorridorTemplate, WorldMap, point_free, randomize_map

EXIT_CONFIG = 2
EXIT_DIMENSION = 3
EXIT_DIVERGED = 4

log = logging.getLogger("cstep")


def _floats(text: str, what: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}", what) from None


def _write_json(path, doc) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else v


def write_stats(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(STATS_FIELDS)
        for r in rows:
            w.writerow([_fmt(r[k]) for k in STATS_FIELDS])


def _world_for(cfg: ExperimentConfig, seed: int) -> WorldMap:
    """The fixed map, or one corridor draw from ``seed``."""
    w = cfg.env.world
    if isinstance(w, CorridorTemplate):
        return randomize_map(np.random.default_rng(seed), w)
    return w


def cmd_train(args) -> int:
    cfg = load_config(args.config)
    os.makedirs(args.out, exist_ok=True)
    dump_resolved(cfg, os.path.join(args.out, "resolved_config.json"))
    try:
        ac, rows = train(cfg.env, cfg.ppo, args.seed)
    except TrainingError as e:
        last = e.diagnostics.get("last_good_params")
        if last is not None:
            from .rl.ppo import init_actor_critic
            ac = init_actor_critic(cfg.env, cfg.ppo, np.random.default_rng(0))
            for p, q in zip(ac.params, last):
                p[...] = q
            save_snapshot(os.path.join(args.out, "snapshot.bin"), ac, cfg.hash, args.seed)
        log.error("training diverged: %s", e)
        return EXIT_DIVERGED
    save_snapshot(os.path.join(args.out, "snapshot.bin"), ac, cfg.hash, args.seed)
    write_stats(os.path.join(args.out, "stats.csv"), rows)
    return 0


def check_dims(ac: ActorCritic, header: dict, cfg: ExperimentConfig) -> None:
    if header["obs_dim"] != cfg.env.obs_dim or header["act_dim"] != cfg.env.act_dim:
        raise ContractViolation(
            f"snapshot expects obs/act dims {header['obs_dim']}/{header['act_dim']}, "
            f"environment has {cfg.env.obs_dim}/{cfg.env.act_dim}")


def cmd_eval(args) -> int:
    cfg = load_config(args.config)
    ac, header = load_snapshot(args.snapshot)
    check_dims(ac, header, cfg)
    n = args.episodes if args.episodes is not None else cfg.eval.episodes
    seed = args.seed if args.seed is not None else cfg.eval.seed
    recs = []
    rep = evaluate(ac.policy, cfg.env, n, seed, records=recs)
    if args.out:
        write_episodes(args.out, recs)
    json.dump(rep.to_dict(), sys.stdout, sort_keys=True, indent=1)
    sys.stdout.write("\n")
    return 0


def _grid(text: str) -> tuple:
    parts = text.split(",")
    try:
        vals = [int(p) for p in parts]
    except ValueError:
        raise ConfigError(f"expected N or NX,NY, got {text!r}", "--grid") from None
    if len(vals) == 1:
        vals = vals * 2
    if len(vals) != 2 or min(vals) < 2:
        raise ConfigError("need at least 2 points per axis", "--grid")
    return vals[0], vals[1]


def cmd_empmap(args) -> int:
    cfg = load_config(args.config)
    nx, ny = _grid(args.grid)
    vel = _floats(args.velocity, "--velocity")
    if vel.shape[0] != cfg.env.system.state_dim:
        raise ContractViolation(f"velocity has {vel.shape[0]} components, system has {cfg.env.system.state_dim}")
    world = _world_for(cfg, args.seed)
    b = world.bounds_array
    xs = np.linspace(b[0], b[2], nx)
    ys = np.linspace(b[1], b[3], ny)
    vals = empowerment_field(cfg.env.system, world, xs, ys, vel, cfg.env.empowerment, args.seed)
    doc = field_to_dict(xs, ys, vel, vals)
    doc.update(seed=args.seed, floor=float(np.log(cfg.env.empowerment.volume_floor)), map=world.to_polygons())
    _write_json(args.out, doc)
    return 0


def cmd_reachset(args) -> int:
    cfg = load_config(args.config)
    x = _floats(args.state, "--state")
    if x.shape[0] != 4:
        raise ContractViolation(f"state needs 4 components (x, y, vx, vy), got {x.shape[0]}")
    world = _world_for(cfg, args.seed)
    if not point_free(world, x[:2]):
        raise ContractViolation(f"state position {x[:2].tolist()} is in collision")
    rs = reachable_set(cfg.env.system, world, SystemState.from_vector(x), cfg.env.empowerment,
                       np.random.default_rng(args.seed))
    doc = rs.to_dict()
    doc.update(state=x.tolist(), seed=args.seed, map=world.to_polygons())
    _write_json(args.out, doc)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cstep", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a policy and write snapshot, stats and resolved config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a snapshot; JSON report on stdout")
    p.add_argument("--config", required=True)
    p.add_argument("--snapshot", required=True)
    p.add_argument("--episodes", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="per-episode CSV")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("empmap", help="empowerment heatmap over the map at a fixed velocity")
    p.add_argument("--config", required=True)
    p.add_argument("--grid", default="20", help="N or NX,NY")
    p.add_argument("--velocity", default="0,0", help="vx,vy")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_empmap)

    p = sub.add_parser("reachset", help="reachable set geometry at one state")
    p.add_argument("--config", required=True)
    p.add_argument("--state", required=True, help="x,y,vx,vy")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_reachset)
    return ap


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("CSTEP_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ContractViolation as e:
        print(f"dimension/state error: {e}", file=sys.stderr)
        return EXIT_DIMENSION


if __name__ == "__main__":
    sys.exit(main())
