"""LBP-TOP: local binary patterns on the XY, XT and YT planes.

With four neighbours per plane the sampling points sit on the axes, at
angles 0, pi/2, pi and 3*pi/2, so no interpolation is needed. For a centre
``(x, y, t)`` the neighbour ``p`` of each plane is

====  ===============  ===============  ===============  ===============
plane p=0              p=1              p=2              p=3
====  ===============  ===============  ===============  ===============
XY    (x+Rx, y, t)     (x, y-Ry, t)     (x-Rx, y, t)     (x, y+Ry, t)
XT    (x+Rx, y, t)     (x, y, t+Rt)     (x-Rx, y, t)     (x, y, t-Rt)
YT    (x, y+Ry, t)     (x, y, t+Rt)     (x, y-Ry, t)     (x, y, t-Rt)
====  ===============  ===============  ===============  ===============

Bit ``p`` is set when the neighbour is >= the centre.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core_data import BlockGrid, VideoClip, make_grid
from ..errors import ExtractionError, ValidationError
from .base import FeatureVector, l1_normalize

PLANES = ("XY", "XT", "YT")


@dataclass(frozen=True)
class LbpTopConfig:
    radius_x: int = 1
    radius_y: int = 1
    radius_t: int = 4
    neighbors: int = 4

    def __post_init__(self):
        if self.neighbors != 4:
            raise ValidationError("only 4 neighbours per plane (axis-aligned sampling) are supported")
        if min(self.radius_x, self.radius_y, self.radius_t) < 1:
            raise ValidationError("LBP-TOP radii must be >= 1")

    @property
    def bins_per_plane(self) -> int:
        return 2 ** self.neighbors

    def offsets(self, plane: str) -> list[tuple[int, int, int]]:
        """Neighbour offsets ``(dx, dy, dt)`` for bits 0..3 of ``plane``."""
        rx, ry, rt = self.radius_x, self.radius_y, self.radius_t
        table = {
            "XY": [(rx, 0, 0), (0, -ry, 0), (-rx, 0, 0), (0, ry, 0)],
            "XT": [(rx, 0, 0), (0, 0, rt), (-rx, 0, 0), (0, 0, -rt)],
            "YT": [(0, ry, 0), (0, 0, rt), (0, -ry, 0), (0, 0, -rt)],
        }
        try:
            return table[plane]
        except KeyError:
            raise ValidationError(f"unknown plane {plane!r}") from None


def lbp_code(volume: np.ndarray, center: tuple[int, int, int], plane: str, cfg: LbpTopConfig = LbpTopConfig()) -> int:
    """Code in ``0..15`` at ``center = (x, y, t)`` of a ``(T, H, W)`` volume."""
    x, y, t = center
    n_t, h, w = volume.shape
    if not (cfg.radius_x <= x < w - cfg.radius_x and cfg.radius_y <= y < h - cfg.radius_y
            and cfg.radius_t <= t < n_t - cfg.radius_t):
        raise ValidationError(f"centre {center} is within the sampling radius of the volume border")
    c = volume[t, y, x]
    code = 0
    for p, (dx, dy, dt) in enumerate(cfg.offsets(plane)):
        if volume[t + dt, y + dy, x + dx] >= c:
            code |= 1 << p
    return code


def _check_extent(shape: tuple[int, int, int], cfg: LbpTopConfig) -> None:
    n_t, h, w = shape
    if n_t <= 2 * cfg.radius_t:
        raise ExtractionError(f"clip has {n_t} frames; LBP-TOP with R_T={cfg.radius_t} needs more than {2 * cfg.radius_t}")
    if w <= 2 * cfg.radius_x or h <= 2 * cfg.radius_y:
        raise ExtractionError("frame too small for the LBP-TOP spatial radii")


def plane_codes(volume: np.ndarray, cfg: LbpTopConfig = LbpTopConfig()) -> dict[str, np.ndarray]:
    """Codes for every interior centre, per plane, each of shape ``(T', H', W')``."""
    vol = np.asarray(volume)
    _check_extent(vol.shape, cfg)
    n_t, h, w = vol.shape
    rx, ry, rt = cfg.radius_x, cfg.radius_y, cfg.radius_t
    center = vol[rt:n_t - rt, ry:h - ry, rx:w - rx]
    out = {}
    for plane in PLANES:
        code = np.zeros(center.shape, dtype=np.intp)
        for p, (dx, dy, dt) in enumerate(cfg.offsets(plane)):
            nb = vol[rt + dt:n_t - rt + dt, ry + dy:h - ry + dy, rx + dx:w - rx + dx]
            code |= (nb >= center).astype(np.intp) << p
        out[plane] = code
    return out


def lbp_top_counts(volume: np.ndarray, grid: BlockGrid, cfg: LbpTopConfig = LbpTopConfig()) -> np.ndarray:
    """Un-normalised code counts, shape ``(blocks, 3, bins)``, binned by the centre's block."""
    vol = np.asarray(volume)
    n_t, h, w = vol.shape
    if (w, h) != (grid.width, grid.height):
        raise ValidationError(f"grid is {grid.width}x{grid.height} but frames are {w}x{h}")
    codes = plane_codes(vol, cfg)
    rx, ry = cfg.radius_x, cfg.radius_y
    blocks = grid.label_map()[ry:h - ry, rx:w - rx]
    n_blocks, n_bins = grid.n_cells, cfg.bins_per_plane
    counts = np.zeros((n_blocks, len(PLANES), n_bins), dtype=np.int64)
    for i, plane in enumerate(PLANES):
        flat = (blocks[None, :, :] * n_bins + codes[plane]).ravel()
        counts[:, i, :] = np.bincount(flat, minlength=n_blocks * n_bins).reshape(n_blocks, n_bins)
    return counts


def extract_lbp_top(clip: VideoClip | np.ndarray, grid: BlockGrid | None = None,
                    cfg: LbpTopConfig = LbpTopConfig()) -> FeatureVector:
    """1200-dimensional LBP-TOP vector (25 blocks x 3 planes x 16 bins) by default."""
    volume = clip.frames if isinstance(clip, VideoClip) else np.asarray(clip)
    if grid is None:
        grid = make_grid(volume.shape[2], volume.shape[1])
    counts = lbp_top_counts(volume, grid, cfg)
    hist = l1_normalize(counts, axis=-1)
    return FeatureVector("lbp_top", hist.ravel(), hist.shape)
