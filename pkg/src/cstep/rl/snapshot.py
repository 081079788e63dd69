"""Policy snapshot files.

Layout: ``b"CSTEPSN1"``, a little-endian uint32 header length, a UTF-8 JSON
header, then every parameter as little-endian float32 in the order of
``ActorCritic.params`` (mean net layers, log_std, value net layers).
"""
from __future__ import annotations

import json
import struct

import numpy as np

from ..errors import ContractViolation
from .nets import ActorCritic, DenseNet, GaussianPolicy

MAGIC = b"CSTEPSN1"


def _rng_free_net(sizes, input_scale) -> DenseNet:
    # weights are overwritten on load; a fixed generator keeps construction cheap and pure
    return DenseNet(sizes, np.random.default_rng(0), input_scale=input_scale)


def snapshot_bytes(ac: ActorCritic, config_hash: str = "", seed: int = 0) -> bytes:
    pol = ac.policy
    header = {
        "format": 1,
        "policy_sizes": pol.mean_net.sizes,
        "value_sizes": ac.value_net.sizes,
        "obs_dim": pol.mean_net.sizes[0],
        "act_dim": pol.mean_net.sizes[-1],
        "low": pol.low.tolist(),
        "high": pol.high.tolist(),
        "input_scale": pol.mean_net.input_scale.tolist(),
        "config_hash": config_hash,
        "seed": int(seed),
        "n_params": int(sum(p.size for p in ac.params)),
    }
    head = json.dumps(header, sort_keys=True).encode()
    blob = np.concatenate([p.ravel() for p in ac.params]).astype("<f4").tobytes()
    return MAGIC + struct.pack("<I", len(head)) + head + blob


def save_snapshot(path, ac: ActorCritic, config_hash: str = "", seed: int = 0) -> None:
    with open(path, "wb") as fh:
        fh.write(snapshot_bytes(ac, config_hash, seed))


def read_header(data: bytes) -> tuple:
    if data[:8] != MAGIC:
        raise ContractViolation("not a policy snapshot (bad magic)")
    (n,) = struct.unpack("<I", data[8:12])
    return json.loads(data[12:12 + n].decode()), 12 + n


def load_snapshot(path) -> tuple:
    """Returns ``(actor_critic, header)``; parameters come back as float64."""
    with open(path, "rb") as fh:
        data = fh.read()
    header, off = read_header(data)
    flat = np.frombuffer(data[off:], dtype="<f4").astype(np.float64)
    if flat.size != header["n_params"]:
        raise ContractViolation(f"snapshot holds {flat.size} parameters, header says {header['n_params']}")
    scale = header["input_scale"]
    mean_net = _rng_free_net(header["policy_sizes"], scale)
    value_net = _rng_free_net(header["value_sizes"], scale)
    ac = ActorCritic(GaussianPolicy(mean_net, header["low"], header["high"]), value_net)
    k = 0
    for p in ac.params:
        p[...] = flat[k:k + p.size].reshape(p.shape)
        k += p.size
    return ac, header
