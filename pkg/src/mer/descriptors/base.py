"""Feature-vector container and block-histogram helpers shared by the descriptors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import ValidationError

DESCRIPTOR_IDS = ("lbp_top", "hog3d", "hoof")


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Flat descriptor output.

    ``layout`` records the shape the flat ``values`` came from, e.g.
    ``(25, 3, 16)`` for (blocks, planes, bins). For HOG3D the planes have
    different bin counts, so ``layout`` is ``(25, 32)`` and ``segments``
    gives the per-plane bin counts ``(8, 12, 12)``.
    """

    descriptor_id: str
    values: np.ndarray
    layout: tuple[int, ...]
    segments: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        if self.descriptor_id not in DESCRIPTOR_IDS:
            raise ValidationError(f"unknown descriptor id {self.descriptor_id!r}")
        values = np.asarray(self.values, dtype=np.float64).ravel().copy()
        if values.size != int(np.prod(self.layout)):
            raise ValidationError(f"{values.size} values do not fit layout {self.layout}")
        if not np.all(np.isfinite(values)):
            raise ValidationError("feature vector contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "layout", tuple(int(d) for d in self.layout))

    def __len__(self):
        return self.values.size

    def slices(self) -> list[np.ndarray]:
        """Individual normalised histograms, in storage order."""
        seg = self.segments or (self.layout[-1],)
        per_block = sum(seg)
        out = []
        for block in self.values.reshape(-1, per_block):
            start = 0
            for n in seg:
                out.append(block[start:start + n])
                start += n
        return out


def l1_normalize(hist: np.ndarray, axis: int = -1) -> np.ndarray:
    """Normalise along ``axis`` to unit sum; all-zero slices stay zero."""
    hist = np.asarray(hist, dtype=np.float64)
    total = hist.sum(axis=axis, keepdims=True)
    safe = np.where(total > 0, total, 1.0)
    return np.where(total > 0, hist / safe, 0.0)


def angle_bins(theta: np.ndarray, n_bins: int) -> np.ndarray:
    """Hard bin index for angles in radians, wrapped onto [0, 2*pi)."""
    wrapped = np.mod(theta, 2.0 * np.pi)
    idx = np.floor(wrapped / (2.0 * np.pi / n_bins)).astype(np.intp)
    return np.mod(idx, n_bins)  # mod() can return exactly 2*pi for tiny negatives
