"""Output file formats: '#'-headed CSV tables and a raw binary grid layout.

Every text output starts with a self-describing header block (tool version,
config digest, column schema). Grid outputs are binary (magic, dims, counts,
bounds, float64 planes row-major) with a text sidecar carrying the same
header block. Headers contain no timestamps, so identical runs produce
byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__

GRID_MAGIC = b"FRGD"
GRID_VERSION = 1


def config_digest(normalized: dict) -> str:
    blob = json.dumps(normalized, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _header_lines(digest: str, schema: Sequence[str], extra: Optional[dict] = None) -> list[str]:
    lines = [
        f"# fracfield {__version__}",
        f"# config_digest {digest}",
        f"# columns {','.join(schema)}",
    ]
    for k, v in (extra or {}).items():
        lines.append(f"# {k} {v}")
    return lines


def write_table(path: Path, digest: str, schema: Sequence[str],
                rows: Sequence[Sequence], footer: Optional[dict] = None,
                extra: Optional[dict] = None) -> None:
    """Comma-separated table with a '#'-prefixed header block and footer."""
    out = _header_lines(digest, schema, extra)
    out.append(",".join(schema))
    for row in rows:
        out.append(",".join(_fmt(v) for v in row))
    for k, v in (footer or {}).items():
        out.append(f"# {k} {_fmt(v)}")
    Path(path).write_text("\n".join(out) + "\n")


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_grid(path: Path, digest: str, lower: Sequence[float],
               upper: Sequence[float], counts: Sequence[int],
               planes: dict[str, np.ndarray], extra: Optional[dict] = None) -> None:
    """Binary grid: magic, version, ndim, nplanes, counts, bounds, f64 planes.

    planes map names to arrays shaped like counts (row-major / C order);
    the sidecar '<path>.header.txt' documents the layout and plane names.
    """
    path = Path(path)
    nd = len(counts)
    names = list(planes.keys())
    with open(path, "wb") as fh:
        fh.write(GRID_MAGIC)
        fh.write(struct.pack("<III", GRID_VERSION, nd, len(names)))
        fh.write(struct.pack(f"<{nd}I", *counts))
        fh.write(struct.pack(f"<{nd}d", *lower))
        fh.write(struct.pack(f"<{nd}d", *upper))
        for name in names:
            arr = np.ascontiguousarray(planes[name], dtype="<f8")
            if arr.shape != tuple(counts):
                raise ValueError(f"plane {name} has shape {arr.shape}, want {tuple(counts)}")
            fh.write(arr.tobytes(order="C"))
    side = _header_lines(digest, names, extra)
    side.append(f"# layout magic={GRID_MAGIC.decode()} version={GRID_VERSION} "
                f"ndim={nd} nplanes={len(names)} counts={list(counts)} "
                "dtype=float64 order=C")
    Path(str(path) + ".header.txt").write_text("\n".join(side) + "\n")


def read_grid(path: Path) -> tuple[dict, dict[str, np.ndarray]]:
    """Inverse of write_grid; plane names come from the sidecar."""
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] != GRID_MAGIC:
        raise ValueError("not a fracfield grid file")
    ver, nd, np_ = struct.unpack("<III", raw[4:16])
    off = 16
    counts = struct.unpack(f"<{nd}I", raw[off : off + 4 * nd])
    off += 4 * nd
    lower = struct.unpack(f"<{nd}d", raw[off : off + 8 * nd])
    off += 8 * nd
    upper = struct.unpack(f"<{nd}d", raw[off : off + 8 * nd])
    off += 8 * nd
    side = Path(str(path) + ".header.txt").read_text().splitlines()
    names = next(l.split(" ", 2)[2] for l in side if l.startswith("# columns")).split(",")
    size = int(np.prod(counts))
    planes = {}
    for name in names:
        arr = np.frombuffer(raw, dtype="<f8", count=size, offset=off)
        planes[name] = arr.reshape(counts).copy()
        off += 8 * size
    meta = {"version": ver, "counts": counts, "lower": lower, "upper": upper}
    return meta, planes
