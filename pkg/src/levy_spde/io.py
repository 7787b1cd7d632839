"""Serialization of noise realizations, fields and reports.

Noise binary container (all fields little-endian)::

    magic   4 bytes  b"SASN"
    version uint32
    dim     uint32
    origin  dim x float64
    extent  dim x float64
    cells   dim x uint64
    alpha   float64
    seed    uint64
    payload n_cells x float64   (C order)
"""

import csv
import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ParameterError
from .noise import GridSpec, NoiseRealization

MAGIC = b"SASN"
FORMAT_VERSION = 1


def _fmt(x):
    return repr(float(x))


def write_noise_binary(noise, path):
    g = noise.grid
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, g.dim))
        fh.write(struct.pack(f"<{g.dim}d", *g.origin))
        fh.write(struct.pack(f"<{g.dim}d", *g.extent))
        fh.write(struct.pack(f"<{g.dim}Q", *g.cells))
        fh.write(struct.pack("<dQ", noise.alpha, noise.seed))
        fh.write(np.asarray(noise.increments, dtype="<f8").tobytes())


def read_noise_binary(path):
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise ParameterError(f"{path}: not a noise container")
    version, dim = struct.unpack_from("<II", data, 4)
    if version != FORMAT_VERSION:
        raise ParameterError(f"{path}: unsupported container version {version}")
    off = 12
    origin = struct.unpack_from(f"<{dim}d", data, off)
    off += 8 * dim
    extent = struct.unpack_from(f"<{dim}d", data, off)
    off += 8 * dim
    cells = struct.unpack_from(f"<{dim}Q", data, off)
    off += 8 * dim
    alpha, seed = struct.unpack_from("<dQ", data, off)
    off += 16
    grid = GridSpec(dim, origin, extent, cells)
    inc = np.frombuffer(data, dtype="<f8", offset=off)
    if inc.size != grid.n_cells:
        raise ParameterError(f"{path}: payload has {inc.size} values, expected {grid.n_cells}")
    return NoiseRealization(grid, alpha, inc.astype(float), seed)


def write_noise_csv(noise, path):
    """One row per cell: index vector then increment."""
    idx = noise.grid.cell_indices()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"i{k}" for k in range(noise.grid.dim)] + ["increment"])
        for row, val in zip(idx, noise.increments):
            w.writerow([int(v) for v in row] + [_fmt(val)])


def read_noise_csv(path, grid, alpha, seed):
    """Read increments written by :func:`write_noise_csv` (grid metadata is external)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    flat = np.ravel_multi_index(np.array([[int(v) for v in r[:-1]] for r in rows]).T, grid.cells)
    inc = np.zeros(grid.n_cells)
    inc[flat] = [float(r[-1]) for r in rows]
    return NoiseRealization(grid, alpha, inc, seed)


def field_columns(ndim, space_time=True):
    if space_time:
        return ["t"] + [f"x{k}" for k in range(1, ndim)] + ["value"]
    return [f"x{k}" for k in range(1, ndim + 1)] + ["value"]


def write_field_csv(fld, path, space_time=True):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(field_columns(fld.eval_points.shape[1], space_time))
        for p, v in zip(fld.eval_points, fld.values):
            w.writerow([_fmt(x) for x in p] + [_fmt(v)])


def read_field_csv(path):
    from .solutions import Field
    arr = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return Field(arr[:, :-1], arr[:, -1])


def grid_to_dict(grid):
    return {"dim": grid.dim, "origin": list(grid.origin), "extent": list(grid.extent),
            "cells": list(grid.cells)}


def grid_from_dict(d):
    return GridSpec(int(d["dim"]), tuple(d["origin"]), tuple(d["extent"]), tuple(d["cells"]))


def dumps(obj):
    """Canonical JSON text (sorted keys, trailing newline)."""
    return json.dumps(obj, indent=2, sort_keys=True, default=_default) + "\n"


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if hasattr(o, "to_dict"):
        return o.to_dict()
    if hasattr(o, "value") and isinstance(getattr(o, "value"), str):
        return o.value
    raise TypeError(f"cannot serialize {type(o).__name__}")


def write_json(obj, path):
    Path(path).write_text(dumps(obj))


def read_json(path):
    return json.loads(Path(path).read_text())


def field_manifest(fld, green, grid, alpha, seed, tolerances=None):
    return {"green": green.to_dict(), "green_id": green.id, "grid": grid_to_dict(grid),
            "alpha": float(alpha), "seed": int(seed), "tolerances": tolerances or {},
            "n_points": len(fld), "version": __version__}


def sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
