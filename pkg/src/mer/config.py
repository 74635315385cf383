"""Experiment configuration, read from a YAML file.

Example::

    manifest: data/casme2.csv
    dataset: CASME II          # optional; defaults to the manifest file stem
    features: [lbp-top, hog3d, hoof]
    schemes: [I-V, I-VI, I-VII]
    protocols: [kfold, loso]
    seed: 0
    cache_dir: cache
    out_dir: results
    descriptors:
      hoof: {bins: 8, iterations: 100}
    smo: {C: 1.0, kernel: linear}
    emotion_classes: [happiness, surprise, disgust, repression, others]  # original scheme only

Relative paths are taken relative to the directory holding the config file.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

import yaml

from .au_mapping import ClassScheme
from .descriptors import descriptor_id, make_config
from .errors import FormatError, ValidationError
from .evaluation import Protocol
from .svm import SmoConfig

FEATURE_NAMES = {"lbp_top": "lbp-top", "hog3d": "hog3d", "hoof": "hoof"}
_KNOWN_KEYS = {"manifest", "dataset", "features", "schemes", "protocols", "seed", "cache_dir", "out_dir",
               "descriptors", "smo", "emotion_classes"}


def feature_name(name: str) -> str:
    """CLI/report spelling of a descriptor (``lbp-top``, ``hog3d``, ``hoof``)."""
    return FEATURE_NAMES[descriptor_id(name)]


@dataclass
class ExperimentConfig:
    manifest: Optional[str] = None
    dataset: Optional[str] = None
    features: list[str] = field(default_factory=lambda: ["lbp-top", "hog3d", "hoof"])
    schemes: list[str] = field(default_factory=lambda: ["I-V", "I-VI", "I-VII"])
    protocols: list[str] = field(default_factory=lambda: ["kfold", "loso"])
    seed: int = 0
    cache_dir: str = "cache"
    out_dir: str = "results"
    descriptors: dict[str, dict[str, Any]] = field(default_factory=dict)
    smo: dict[str, Any] = field(default_factory=dict)
    emotion_classes: Optional[list[str]] = None  # restricts the original scheme; None keeps every emotion

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not self.features:
            raise ValidationError("config needs at least one feature")
        if not self.protocols:
            raise ValidationError("config needs at least one protocol")
        if not self.schemes:
            raise ValidationError("config needs at least one class scheme")
        self.features = [feature_name(f) for f in self.features]
        self.schemes = [ClassScheme.parse(s).value for s in self.schemes]
        self.protocols = [Protocol.parse(p).name for p in self.protocols]
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ValidationError(f"seed must be an integer, got {self.seed!r}")
        self.descriptors = {feature_name(k): dict(v or {}) for k, v in (self.descriptors or {}).items()}
        for name, params in self.descriptors.items():
            make_config(name, **params)
        self.smo_config()

    def descriptor_config(self, name: str):
        return make_config(name, **self.descriptors.get(feature_name(name), {}))

    def smo_config(self) -> SmoConfig:
        try:
            return SmoConfig(**self.smo)
        except TypeError as exc:
            raise ValidationError(f"bad smo settings {self.smo}: {exc}") from None

    def protocol(self, name: str) -> Protocol:
        return Protocol.parse(name, seed=self.seed)

    def to_dict(self) -> dict:
        return asdict(self)

    def dump(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(yaml.safe_dump(self.to_dict(), sort_keys=False), encoding="utf-8")

    def updated(self, **overrides) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise FormatError(f"config file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise FormatError(f"{path}: invalid YAML: {exc}") from None
    if not isinstance(data, dict):
        raise FormatError(f"{path}: top level must be a mapping")
    unknown = sorted(set(data) - _KNOWN_KEYS)
    if unknown:
        raise FormatError(f"{path}: unknown key(s) {unknown}")
    for key in ("features", "schemes", "protocols"):
        if isinstance(data.get(key), str):
            data[key] = [data[key]]
    base = path.parent
    for key in ("manifest", "cache_dir", "out_dir"):
        if data.get(key) is not None and not Path(str(data[key])).is_absolute():
            data[key] = str(base / str(data[key]))
    return ExperimentConfig(**data)
