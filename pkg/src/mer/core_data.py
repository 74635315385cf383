"""Manifest ingestion, frame loading and the shared 5x5 block grid.

Frame volumes are held as ``numpy`` arrays of shape ``(T, H, W)`` with
``uint8`` intensities. Frames of a clip are read from a directory in
lexicographic filename order.
"""

from __future__ import annotations

import csv
import os
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional, Sequence

import numpy as np
from PIL import Image

from .errors import FormatError, MerWarning, ValidationError

MANIFEST_COLUMNS = ("subject_id", "clip_id", "frames_dir", "au_code", "emotion")
REQUIRED_COLUMNS = MANIFEST_COLUMNS[:4]  # emotion may be absent; objective schemes do not need it
IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg"}
DATA_ROOT_ENV = "MER_DATA_ROOT"

GRID_ROWS = 5
GRID_COLS = 5
MIN_FRAME_SIDE = 10  # 5 cells of at least 2 pixels


@dataclass(frozen=True)
class ManifestEntry:
    subject_id: str
    clip_id: str
    frames_dir: str
    au_code: str
    emotion: Optional[str] = None
    line: int = 0  # line number in the source CSV, 0 when built in code

    @property
    def key(self) -> tuple[str, str]:
        return (self.subject_id, self.clip_id)


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]
    dataset_name: str = ""
    root: Optional[Path] = None  # base directory for relative frames_dir

    def __post_init__(self):
        seen: dict[tuple[str, str], ManifestEntry] = {}
        clashes = []
        for entry in self.entries:
            if entry.key in seen:
                clashes.append((seen[entry.key], entry))
            else:
                seen[entry.key] = entry
        if clashes:
            detail = "; ".join(
                f"({a.subject_id}, {a.clip_id}) on rows {a.line} and {b.line}" for a, b in clashes
            )
            raise ValidationError(f"duplicate (subject_id, clip_id) pairs: {detail}")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[ManifestEntry]:
        return iter(self.entries)

    def resolve_frames_dir(self, entry: ManifestEntry) -> Path:
        path = Path(entry.frames_dir)
        if path.is_absolute():
            return path
        data_root = os.environ.get(DATA_ROOT_ENV)
        if data_root:
            return Path(data_root) / path
        if self.root is not None:
            return self.root / path
        return path


@dataclass(frozen=True, eq=False)
class VideoClip:
    """A grayscale clip. ``frames`` has shape ``(T, H, W)``."""

    subject_id: str
    clip_id: str
    frames: np.ndarray
    au_code: str = ""
    emotion: Optional[str] = None
    fps: int = 200

    def __post_init__(self):
        frames = np.asarray(self.frames)
        if frames.ndim != 3:
            raise ValidationError(f"frames must be a 3-D (T, H, W) volume, got shape {frames.shape}")
        t, h, w = frames.shape
        if t < 2:
            raise ValidationError(f"clip {self.clip_id!r} has {t} frame(s); at least 2 required")
        if w < MIN_FRAME_SIDE or h < MIN_FRAME_SIDE:
            raise ValidationError(f"clip {self.clip_id!r} frames are {w}x{h}; minimum is 10x10")
        if self.fps <= 0:
            raise ValidationError("fps must be positive")
        frames = frames.astype(np.uint8, copy=True) if frames.dtype != np.uint8 else frames.copy()
        frames.setflags(write=False)
        object.__setattr__(self, "frames", frames)

    @property
    def key(self) -> tuple[str, str]:
        return (self.subject_id, self.clip_id)

    @property
    def width(self) -> int:
        return self.frames.shape[2]

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    @property
    def length(self) -> int:
        return self.frames.shape[0]


@dataclass(frozen=True)
class BlockGrid:
    """Non-overlapping spatial partition of a ``width`` x ``height`` frame.

    ``col_edges``/``row_edges`` hold the ``cols + 1``/``rows + 1`` floor
    boundaries; cell ``(r, c)`` spans columns ``col_edges[c]:col_edges[c+1]``.
    """

    width: int
    height: int
    rows: int = GRID_ROWS
    cols: int = GRID_COLS
    col_edges: tuple[int, ...] = field(init=False)
    row_edges: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "col_edges", tuple(c * self.width // self.cols for c in range(self.cols + 1)))
        object.__setattr__(self, "row_edges", tuple(r * self.height // self.rows for r in range(self.rows + 1)))

    @property
    def n_cells(self) -> int:
        return self.rows * self.cols

    def cell(self, r: int, c: int) -> tuple[slice, slice]:
        """(row slice, column slice) of cell ``(r, c)``."""
        return (slice(self.row_edges[r], self.row_edges[r + 1]),
                slice(self.col_edges[c], self.col_edges[c + 1]))

    def cells(self) -> Iterator[tuple[slice, slice]]:
        for r in range(self.rows):
            for c in range(self.cols):
                yield self.cell(r, c)

    @property
    def col_widths(self) -> tuple[int, ...]:
        return tuple(np.diff(self.col_edges).tolist())

    @property
    def row_heights(self) -> tuple[int, ...]:
        return tuple(np.diff(self.row_edges).tolist())

    def cell_of(self, x: int, y: int) -> int:
        """Row-major index of the cell containing pixel ``(x, y)``."""
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise ValidationError(f"pixel ({x}, {y}) outside {self.width}x{self.height} frame")
        c = int(np.searchsorted(self.col_edges, x, side="right")) - 1
        r = int(np.searchsorted(self.row_edges, y, side="right")) - 1
        return r * self.cols + c

    def label_map(self) -> np.ndarray:
        """``(H, W)`` array of row-major cell indices."""
        rows = np.searchsorted(self.row_edges, np.arange(self.height), side="right") - 1
        cols = np.searchsorted(self.col_edges, np.arange(self.width), side="right") - 1
        return (rows[:, None] * self.cols + cols[None, :]).astype(np.intp)


def make_grid(width: int, height: int) -> BlockGrid:
    if width < MIN_FRAME_SIDE or height < MIN_FRAME_SIDE:
        raise ValidationError(f"frame {width}x{height} too small for a 5x5 grid (minimum 10x10)")
    return BlockGrid(int(width), int(height))


def load_manifest(path, dataset_name: Optional[str] = None) -> DatasetManifest:
    """Read a manifest CSV with header ``subject_id,clip_id,frames_dir,au_code,emotion``."""
    path = Path(path)
    if not path.is_file():
        raise FormatError(f"manifest not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise FormatError(f"{path}: empty file, expected header {','.join(MANIFEST_COLUMNS)}") from None
        dupes = sorted({h for h in header if header.count(h) > 1})
        if dupes:
            raise FormatError(f"{path}: duplicate columns {dupes}")
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise FormatError(f"{path}: missing columns {missing}")
        idx = {name: header.index(name) for name in MANIFEST_COLUMNS if name in header}
        entries = []
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < len(header):
                raise FormatError(f"{path}:{line}: expected {len(header)} fields, got {len(row)}")
            get = lambda name: row[idx[name]].strip()
            entries.append(ManifestEntry(
                subject_id=get("subject_id"),
                clip_id=get("clip_id"),
                frames_dir=get("frames_dir"),
                au_code=get("au_code"),
                emotion=(get("emotion") or None) if "emotion" in idx else None,
                line=line,
            ))
    if not entries:
        warnings.warn(f"{path}: manifest has no data rows", MerWarning, stacklevel=2)
    return DatasetManifest(tuple(entries), dataset_name or path.stem, root=path.parent.resolve())


def to_luma(rgb: np.ndarray) -> np.ndarray:
    """ITU-R 601 luma with round-half-up to ``uint8``."""
    rgb = np.asarray(rgb, dtype=np.float64)
    y = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return np.clip(np.floor(y + 0.5), 0, 255).astype(np.uint8)


def read_frame(path) -> np.ndarray:
    with Image.open(path) as img:
        if img.mode == "L":
            return np.asarray(img, dtype=np.uint8)
        if img.mode in ("I;16", "I;16B", "I"):
            raise ValidationError(f"{path}: only 8-bit images are supported (mode {img.mode})")
        if img.mode == "LA":
            return np.asarray(img.getchannel("L"), dtype=np.uint8)
        return to_luma(np.asarray(img.convert("RGB")))


def list_frames(frames_dir) -> list[Path]:
    frames_dir = Path(frames_dir)
    if not frames_dir.is_dir():
        raise ValidationError(f"frames directory not found: {frames_dir}")
    return sorted((p for p in frames_dir.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES),
                  key=lambda p: p.name)


def load_frames(frames_dir) -> np.ndarray:
    files = list_frames(frames_dir)
    if len(files) < 2:
        raise ValidationError(f"{frames_dir}: {len(files)} image file(s); at least 2 required")
    frames = []
    for f in files:
        img = read_frame(f)
        if frames and img.shape != frames[0].shape:
            h0, w0 = frames[0].shape
            h, w = img.shape
            raise ValidationError(
                f"{frames_dir}: frame {f.name} is {w}x{h}, expected {w0}x{h0} like {files[0].name}")
        frames.append(img)
    return np.stack(frames)


def load_clip(entry: ManifestEntry, manifest: Optional[DatasetManifest] = None, fps: int = 200) -> VideoClip:
    if manifest is not None:
        frames_dir = manifest.resolve_frames_dir(entry)
    else:
        frames_dir = DatasetManifest((), root=None).resolve_frames_dir(entry)
    return VideoClip(entry.subject_id, entry.clip_id, load_frames(frames_dir),
                     au_code=entry.au_code, emotion=entry.emotion, fps=fps)


def save_frames(frames: np.ndarray, frames_dir, prefix: str = "img") -> list[Path]:
    """Write a ``(T, H, W)`` volume as zero-padded grayscale PNGs."""
    frames = np.asarray(frames)
    frames_dir = Path(frames_dir)
    frames_dir.mkdir(parents=True, exist_ok=True)
    width = max(3, len(str(len(frames))))
    paths = []
    for i, frame in enumerate(frames):
        p = frames_dir / f"{prefix}{i:0{width}d}.png"
        Image.fromarray(np.ascontiguousarray(frame, dtype=np.uint8)).save(p)
        paths.append(p)
    return paths


def write_manifest(entries: Sequence[ManifestEntry], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(MANIFEST_COLUMNS)
        for e in entries:
            w.writerow([e.subject_id, e.clip_id, e.frames_dir, e.au_code, e.emotion or ""])
