"""Feature cache files: one CSV per (dataset, descriptor).

Layout::

    # mer-feature-cache v1; descriptor=hoof; layout=25x8; config_hash=...; config={...}
    descriptor,subject_id,clip_id,v0,v1,...
    hoof,s01,EP19_03f,0.125,...

Values are written with ``repr`` so a reload is bit-exact. The config hash
covers the descriptor id, its parameters and the block grid; a mismatch
means the cache is stale.
"""

from __future__ import annotations

import csv
import hashlib
import json
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .core_data import GRID_COLS, GRID_ROWS
from .errors import FormatError

CACHE_MAGIC = "mer-feature-cache v1"


def config_hash(descriptor: str, config) -> str:
    payload = {"descriptor": descriptor, "grid": [GRID_ROWS, GRID_COLS],
               "config": asdict(config) if not isinstance(config, dict) else config}
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class FeatureCache:
    descriptor: str
    layout: tuple[int, ...]
    config: dict
    config_hash: str
    rows: dict[tuple[str, str], np.ndarray] = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return int(np.prod(self.layout))


def cache_path(cache_dir, dataset: str, descriptor: str) -> Path:
    safe = re.sub(r"[^A-Za-z0-9_.-]+", "_", dataset).strip("_") or "dataset"
    return Path(cache_dir) / f"{safe}__{descriptor}.csv"


def _header_line(cache: FeatureCache) -> str:
    layout = "x".join(str(d) for d in cache.layout)
    cfg = json.dumps(cache.config, sort_keys=True, separators=(",", ":"))
    return f"# {CACHE_MAGIC}; descriptor={cache.descriptor}; layout={layout}; config_hash={cache.config_hash}; config={cfg}"


def write_cache(path, cache: FeatureCache) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with tmp.open("w", newline="", encoding="utf-8") as fh:
        fh.write(_header_line(cache) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["descriptor", "subject_id", "clip_id"] + [f"v{i}" for i in range(cache.dimension)])
        for (subject, clip), values in sorted(cache.rows.items()):
            w.writerow([cache.descriptor, subject, clip] + [repr(float(v)) for v in values])
    tmp.replace(path)


def _parse_header(line: str) -> dict:
    if not line.startswith("# " + CACHE_MAGIC):
        raise FormatError("not a mer feature cache (missing header line)")
    fields_ = {}
    for part in line[2 + len(CACHE_MAGIC):].split("; "):
        part = part.strip().lstrip(";").strip()
        if not part:
            continue
        k, _, v = part.partition("=")
        fields_[k] = v
    for k in ("descriptor", "layout", "config_hash", "config"):
        if k not in fields_:
            raise FormatError(f"feature cache header lacks {k!r}")
    return fields_


def read_cache(path) -> FeatureCache:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        meta = _parse_header(fh.readline().rstrip("\n"))
        layout = tuple(int(d) for d in meta["layout"].split("x"))
        cache = FeatureCache(meta["descriptor"], layout, json.loads(meta["config"]), meta["config_hash"])
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:3] != ["descriptor", "subject_id", "clip_id"]:
            raise FormatError(f"{path}: bad column header")
        if len(header) - 3 != cache.dimension:
            raise FormatError(f"{path}: {len(header) - 3} value columns but layout {layout}")
        for row in reader:
            if not row:
                continue
            if len(row) != len(header):
                raise FormatError(f"{path}:{reader.line_num}: expected {len(header)} fields, got {len(row)}")
            cache.rows[(row[1], row[2])] = np.array([float(v) for v in row[3:]], dtype=np.float64)
    return cache


def load_if_current(path, descriptor: str, config) -> Optional[FeatureCache]:
    """Return the cache at ``path`` if it exists and was built with ``config``; otherwise None."""
    path = Path(path)
    if not path.is_file():
        return None
    try:
        cache = read_cache(path)
    except (FormatError, ValueError):
        return None
    if cache.descriptor != descriptor or cache.config_hash != config_hash(descriptor, config):
        return None
    return cache
