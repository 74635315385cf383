"""Spatio-temporal descriptors computed over the 5x5 block grid."""

from dataclasses import fields

from ..errors import ValidationError
from .base import DESCRIPTOR_IDS, FeatureVector, l1_normalize
from .hog3d import Hog3dConfig, extract_hog3d
from .hoof import HoofConfig, extract_hoof
from .lbp_top import LbpTopConfig, extract_lbp_top

EXTRACTORS = {
    "lbp_top": (LbpTopConfig, extract_lbp_top),
    "hog3d": (Hog3dConfig, extract_hog3d),
    "hoof": (HoofConfig, extract_hoof),
}


def descriptor_id(name: str) -> str:
    """Accept CLI spellings (``lbp-top``, ``LBP_TOP``, ``hog3d``...) and return the canonical id."""
    key = name.strip().lower().replace("-", "_").replace(" ", "_")
    if key == "lbptop":
        key = "lbp_top"
    if key not in EXTRACTORS:
        raise ValidationError(f"unknown feature {name!r}; expected one of lbp-top, hog3d, hoof")
    return key


def make_config(name: str, **params):
    """Build the config dataclass for ``name``, rejecting unknown parameters."""
    cls, _ = EXTRACTORS[descriptor_id(name)]
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(params) - known)
    if unknown:
        raise ValidationError(f"unknown {name} parameter(s) {unknown}; known: {sorted(known)}")
    return cls(**params)


def extract(name: str, clip, grid=None, cfg=None) -> FeatureVector:
    cls, fn = EXTRACTORS[descriptor_id(name)]
    return fn(clip, grid, cfg if cfg is not None else cls())


__all__ = [
    "DESCRIPTOR_IDS", "EXTRACTORS", "FeatureVector", "Hog3dConfig", "HoofConfig", "LbpTopConfig",
    "descriptor_id", "extract", "extract_hog3d", "extract_hoof", "extract_lbp_top",
    "l1_normalize", "make_config",
]
