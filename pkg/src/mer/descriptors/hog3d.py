"""Plane-projected 3D gradient orientation histograms.

Each pixel's spatio-temporal gradient ``(Gx, Gy, Gt)`` is projected onto
the XY, XT and YT planes. Only interior pixels vote. The in-plane angle is hard-binned over
``[0, 2*pi)`` and the in-plane gradient norm is the vote weight.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core_data import BlockGrid, VideoClip, make_grid
from ..errors import ExtractionError, ValidationError
from .base import FeatureVector, angle_bins, l1_normalize


@dataclass(frozen=True)
class Hog3dConfig:
    bins_xy: int = 8
    bins_xt: int = 12
    bins_yt: int = 12

    def __post_init__(self):
        if min(self.bins_xy, self.bins_xt, self.bins_yt) < 2:
            raise ValidationError("HOG3D bin counts must be >= 2")

    @property
    def segments(self) -> tuple[int, int, int]:
        return (self.bins_xy, self.bins_xt, self.bins_yt)


def gradients(volume: VideoClip | np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Central differences inside, one-sided differences on the borders.

    Returns ``(Gx, Gy, Gt)``, each shaped like the ``(T, H, W)`` input.
    """
    vol = volume.frames if isinstance(volume, VideoClip) else np.asarray(volume)
    if vol.ndim != 3:
        raise ValidationError("expected a (T, H, W) volume")
    if vol.shape[0] < 3:
        raise ExtractionError(f"HOG3D needs at least 3 frames, got {vol.shape[0]}")
    gt, gy, gx = np.gradient(vol.astype(np.float64), edge_order=1)
    return gx, gy, gt


def _plane_terms(gx, gy, gt):
    # (angle numerator, angle denominator) per plane: XY, XT, YT
    return ((gy, gx), (gt, gx), (gt, gy))


def hog3d_histograms(volume: np.ndarray, grid: BlockGrid, cfg: Hog3dConfig = Hog3dConfig()) -> list[np.ndarray]:
    """Un-normalised per-plane histograms, each shaped ``(blocks, bins)``."""
    vol = np.asarray(volume)
    n_t, h, w = vol.shape
    if (w, h) != (grid.width, grid.height):
        raise ValidationError(f"grid is {grid.width}x{grid.height} but frames are {w}x{h}")
    # votes come from interior pixels only, where all three differences are central
    inner = (slice(1, -1),) * 3
    gx, gy, gt = (g[inner] for g in gradients(vol))
    blocks = np.broadcast_to(grid.label_map()[1:-1, 1:-1], gx.shape)
    out = []
    for (num, den), n_bins in zip(_plane_terms(gx, gy, gt), cfg.segments):
        weight = np.hypot(num, den)
        voting = weight > 0
        idx = angle_bins(np.arctan2(num[voting], den[voting]), n_bins)
        flat = blocks[voting] * n_bins + idx
        hist = np.bincount(flat, weights=weight[voting], minlength=grid.n_cells * n_bins)
        out.append(hist.reshape(grid.n_cells, n_bins))
    return out


def extract_hog3d(clip: VideoClip | np.ndarray, grid: BlockGrid | None = None,
                  cfg: Hog3dConfig = Hog3dConfig()) -> FeatureVector:
    """800-dimensional vector (25 blocks x (8 + 12 + 12) bins) by default."""
    volume = clip.frames if isinstance(clip, VideoClip) else np.asarray(clip)
    if grid is None:
        grid = make_grid(volume.shape[2], volume.shape[1])
    planes = [l1_normalize(h, axis=-1) for h in hog3d_histograms(volume, grid, cfg)]
    values = np.concatenate(planes, axis=1)
    return FeatureVector("hog3d", values.ravel(), values.shape, segments=cfg.segments)
