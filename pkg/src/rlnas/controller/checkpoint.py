"""Binary policy checkpoints.

Layout: 8-byte magic ``RLNASPOL``, little-endian u32 format version,
u32 header length, UTF-8 JSON header (partition map and dimensions), then
the parameter vector as little-endian float64.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .policy import PolicyParams

MAGIC = b"RLNASPOL"
VERSION = 1


class CheckpointError(ValueError):
    pass


def save_policy(policy, path):
    header = json.dumps({
        "layout": [[name, off, list(shape)] for name, off, shape in policy.layout],
        "arities": list(policy.arities),
        "hidden": policy.hidden,
        "embed": policy.embed,
        "separate_critic": policy.separate_critic,
        "size": policy.size,
    }, sort_keys=True).encode("utf-8")
    blob = MAGIC + struct.pack("<II", VERSION, len(header)) + header
    blob += np.asarray(policy.theta, dtype="<f8").tobytes()
    Path(path).write_bytes(blob)


def load_policy(path):
    data = Path(path).read_bytes()
    if data[:8] != MAGIC:
        raise CheckpointError(f"{path}: not a policy checkpoint")
    version, hlen = struct.unpack("<II", data[8:16])
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
    header = json.loads(data[16:16 + hlen].decode("utf-8"))
    theta = np.frombuffer(data[16 + hlen:], dtype="<f8").astype(np.float64)
    if len(theta) != header["size"]:
        raise CheckpointError(f"{path}: expected {header['size']} values, found {len(theta)}")
    layout = tuple((name, off, tuple(shape)) for name, off, shape in header["layout"])
    return PolicyParams(theta, layout, tuple(header["arities"]), header["hidden"], header["embed"],
                        header["separate_critic"])
