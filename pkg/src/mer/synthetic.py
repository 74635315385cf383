"""Synthetic three-class clip set with class-distinct motion.

Each subject gets its own texture. Classes:

* ``happiness`` (AU12, class I): texture translating right, 1 px/frame
* ``surprise`` (AU1+AU2, class II): texture translating up, 1 px/frame
* ``disgust`` (AU4, class III): static texture with random global flicker

Useful as a separable fixture for end-to-end runs without licensed data.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

import numpy as np

from .core_data import ManifestEntry, VideoClip, save_frames, write_manifest

MOTIONS = {
    "right": ("AU12", "happiness"),
    "up": ("AU1+AU2", "surprise"),
    "flicker": ("AU4", "disgust"),
}


def subject_texture(rng: np.random.Generator, size: int) -> np.ndarray:
    """Float texture in roughly [30, 225]: a few random gratings plus fine noise."""
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    tex = np.zeros((size, size))
    for _ in range(4):
        period = rng.uniform(6.0, 14.0)
        angle = rng.uniform(0.0, np.pi)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        k = 2.0 * np.pi / period
        tex += np.sin(k * (np.cos(angle) * xx + np.sin(angle) * yy) + phase)
    tex = tex / np.abs(tex).max()
    tex += 0.15 * rng.standard_normal((size, size))
    return 127.5 + 95.0 * np.clip(tex, -1.0, 1.0)


def make_volume(motion: str, texture: np.ndarray, frames: int, size: int,
                rng: np.random.Generator, noise: float = 2.0) -> np.ndarray:
    """``(frames, size, size)`` uint8 volume cut from a larger ``texture``."""
    if motion not in MOTIONS:
        raise ValueError(f"unknown motion {motion!r}")
    pad = texture.shape[0] - size
    if pad < frames:
        raise ValueError("texture too small for the requested number of frames")
    y0 = int(rng.integers(0, pad - frames + 1))
    x0 = int(rng.integers(0, pad - frames + 1))
    out = np.empty((frames, size, size))
    for t in range(frames):
        if motion == "right":
            # content moves right: the window slides left over the texture
            out[t] = texture[y0:y0 + size, x0 + frames - t:x0 + frames - t + size]
        elif motion == "up":
            out[t] = texture[y0 + t:y0 + t + size, x0:x0 + size]
        else:
            out[t] = texture[y0:y0 + size, x0:x0 + size] + rng.uniform(-25.0, 25.0)
    out += noise * rng.standard_normal(out.shape)
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def synthetic_clips(n_subjects: int = 10, clips_per_class: int = 3, size: int = 40, frames: int = 20,
                    seed: int = 0) -> list[VideoClip]:
    rng = np.random.default_rng(seed)
    clips = []
    for s in range(n_subjects):
        subject = f"s{s + 1:02d}"
        texture = subject_texture(rng, size + 2 * frames)
        for motion, (au, emotion) in MOTIONS.items():
            for c in range(clips_per_class):
                vol = make_volume(motion, texture, frames, size, rng)
                clips.append(VideoClip(subject, f"{motion}_{c + 1}", vol, au_code=au, emotion=emotion))
    return clips


def write_synthetic_dataset(out_dir, n_subjects: int = 10, clips_per_class: int = 3, size: int = 40,
                            frames: int = 20, seed: int = 0, manifest_name: Optional[str] = None) -> Path:
    """Write PNG frames and a manifest with relative ``frames_dir``; returns the manifest path."""
    out_dir = Path(out_dir)
    entries = []
    for clip in synthetic_clips(n_subjects, clips_per_class, size, frames, seed):
        rel = Path("frames") / clip.subject_id / clip.clip_id
        save_frames(clip.frames, out_dir / rel)
        entries.append(ManifestEntry(clip.subject_id, clip.clip_id, rel.as_posix(), clip.au_code, clip.emotion))
    path = out_dir / (manifest_name or "synthetic.csv")
    write_manifest(entries, path)
    return path
