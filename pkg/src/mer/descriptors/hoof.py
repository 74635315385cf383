"""Dense optical flow and Histograms of Oriented Optical Flow (HOOF).

Flow between consecutive frames comes from a Horn-Schunck solver with a
fixed iteration count, so the output is deterministic. Each flow vector
votes its magnitude into an orientation bin; with ``fold_symmetry`` the
angle is mirrored about the vertical axis so that leftward and rightward
motion share bins, and the bins cover ``[-pi/2, pi/2]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..core_data import BlockGrid, VideoClip, make_grid
from ..errors import ExtractionError, ValidationError
from .base import FeatureVector, l1_normalize


@dataclass(frozen=True)
class HoofConfig:
    bins: int = 8
    alpha: float = 1.0
    iterations: int = 100
    fold_symmetry: bool = True
    solver: str = "horn_schunck"

    def __post_init__(self):
        if self.bins < 2:
            raise ValidationError("HOOF needs at least 2 bins")
        if self.iterations < 1:
            raise ValidationError("flow solver needs at least 1 iteration")
        if self.alpha <= 0:
            raise ValidationError("smoothness weight alpha must be positive")
        if self.solver not in FLOW_SOLVERS:
            raise ValidationError(f"unknown flow solver {self.solver!r}; known: {sorted(FLOW_SOLVERS)}")


@dataclass(frozen=True, eq=False)
class FlowField:
    """Per-pixel displacement; ``u`` is +x (right), ``v`` is +y (down). Arrays are ``(H, W)``."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        if self.u.shape != self.v.shape:
            raise ValidationError("u and v must share a shape")
        if not (np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.v))):
            raise ValidationError("flow contains non-finite values")

    @property
    def magnitude(self) -> np.ndarray:
        return np.hypot(self.u, self.v)


def _hs_derivatives(a: np.ndarray, b: np.ndarray):
    # 2x2x2 cube of forward differences; last row/column replicated
    pa = np.pad(a, ((0, 1), (0, 1)), mode="edge")
    pb = np.pad(b, ((0, 1), (0, 1)), mode="edge")
    ex = 0.25 * ((pa[:-1, 1:] - pa[:-1, :-1]) + (pa[1:, 1:] - pa[1:, :-1])
                 + (pb[:-1, 1:] - pb[:-1, :-1]) + (pb[1:, 1:] - pb[1:, :-1]))
    ey = 0.25 * ((pa[1:, :-1] - pa[:-1, :-1]) + (pa[1:, 1:] - pa[:-1, 1:])
                 + (pb[1:, :-1] - pb[:-1, :-1]) + (pb[1:, 1:] - pb[:-1, 1:]))
    et = 0.25 * ((pb[:-1, :-1] - pa[:-1, :-1]) + (pb[1:, :-1] - pa[1:, :-1])
                 + (pb[:-1, 1:] - pa[:-1, 1:]) + (pb[1:, 1:] - pa[1:, 1:]))
    return ex, ey, et


def _four_neighbour_mean(f: np.ndarray) -> np.ndarray:
    p = np.pad(f, 1, mode="edge")
    return 0.25 * (p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:])


def horn_schunck(frame_a: np.ndarray, frame_b: np.ndarray, alpha: float = 1.0, iterations: int = 100) -> FlowField:
    """Horn-Schunck flow from ``frame_a`` to ``frame_b`` (0..255 intensities, scaled to [0, 1])."""
    a = np.asarray(frame_a, dtype=np.float64) / 255.0
    b = np.asarray(frame_b, dtype=np.float64) / 255.0
    ex, ey, et = _hs_derivatives(a, b)
    denom = alpha ** 2 + ex ** 2 + ey ** 2
    u = np.zeros_like(a)
    v = np.zeros_like(a)
    for _ in range(iterations):
        u_bar = _four_neighbour_mean(u)
        v_bar = _four_neighbour_mean(v)
        common = (ex * u_bar + ey * v_bar + et) / denom
        u = u_bar - ex * common
        v = v_bar - ey * common
    return FlowField(u, v)


FLOW_SOLVERS: dict[str, Callable[..., FlowField]] = {"horn_schunck": horn_schunck}


def optical_flow(frame_a: np.ndarray, frame_b: np.ndarray, cfg: HoofConfig = HoofConfig()) -> FlowField:
    frame_a = np.asarray(frame_a)
    frame_b = np.asarray(frame_b)
    if frame_a.shape != frame_b.shape or frame_a.ndim != 2:
        raise ValidationError(f"frames must be 2-D with equal shapes, got {frame_a.shape} and {frame_b.shape}")
    return FLOW_SOLVERS[cfg.solver](frame_a, frame_b, alpha=cfg.alpha, iterations=cfg.iterations)


def orientation_bins(u: np.ndarray, v: np.ndarray, cfg: HoofConfig = HoofConfig()) -> np.ndarray:
    theta = np.arctan2(v, u)
    if cfg.fold_symmetry:
        theta = np.where(theta > np.pi / 2, np.pi - theta, theta)
        theta = np.where(theta < -np.pi / 2, -np.pi - theta, theta)
        idx = np.floor((theta + np.pi / 2) / (np.pi / cfg.bins)).astype(np.intp)
        return np.clip(idx, 0, cfg.bins - 1)  # theta == pi/2 lands in the top bin
    idx = np.floor((theta + np.pi) / (2 * np.pi / cfg.bins)).astype(np.intp)
    return np.mod(idx, cfg.bins)


def hoof_histogram(flow: FlowField, cell: tuple[slice, slice] | None = None,
                   cfg: HoofConfig = HoofConfig()) -> np.ndarray:
    """Magnitude-weighted orientation histogram of ``flow`` inside ``cell`` (not normalised)."""
    u, v = flow.u, flow.v
    if cell is not None:
        u, v = u[cell], v[cell]
    mag = np.hypot(u, v)
    moving = mag > 0
    idx = orientation_bins(u[moving], v[moving], cfg)
    return np.bincount(idx, weights=mag[moving], minlength=cfg.bins).astype(np.float64)


def hoof_block_histograms(volume: np.ndarray, grid: BlockGrid, cfg: HoofConfig = HoofConfig()) -> np.ndarray:
    """Per-block histograms summed over all consecutive frame pairs, shape ``(blocks, bins)``."""
    vol = np.asarray(volume)
    if vol.ndim != 3 or vol.shape[0] < 2:
        raise ExtractionError("HOOF needs a (T, H, W) volume with at least 2 frames")
    n_t, h, w = vol.shape
    if (w, h) != (grid.width, grid.height):
        raise ValidationError(f"grid is {grid.width}x{grid.height} but frames are {w}x{h}")
    blocks = grid.label_map()
    total = np.zeros((grid.n_cells, cfg.bins))
    for t in range(n_t - 1):
        flow = optical_flow(vol[t], vol[t + 1], cfg)
        mag = flow.magnitude
        moving = mag > 0
        idx = orientation_bins(flow.u[moving], flow.v[moving], cfg)
        flat = blocks[moving] * cfg.bins + idx
        total += np.bincount(flat, weights=mag[moving], minlength=grid.n_cells * cfg.bins).reshape(total.shape)
    return total


def extract_hoof(clip: VideoClip | np.ndarray, grid: BlockGrid | None = None,
                 cfg: HoofConfig = HoofConfig()) -> FeatureVector:
    """``25 * bins`` vector (200 by default); static blocks stay all-zero."""
    volume = clip.frames if isinstance(clip, VideoClip) else np.asarray(clip)
    if grid is None:
        grid = make_grid(volume.shape[2], volume.shape[1])
    hist = l1_normalize(hoof_block_histograms(volume, grid, cfg), axis=-1)
    return FeatureVector("hoof", hist.ravel(), hist.shape)
