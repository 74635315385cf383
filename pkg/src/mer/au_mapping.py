"""FACS Action Unit code parsing and objective-class assignment.

Codes such as ``"AU4+AU7"``, ``"R12A"`` or ``"4+L10"`` are parsed into an
:class:`AuSet`. The set of AU numbers (laterality and intensity dropped) is
matched exactly against the table of AU combinations for classes I-VI;
anything else is class VII.
"""

from __future__ import annotations

import enum
import re
import warnings
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .core_data import DatasetManifest, ManifestEntry
from .errors import MerWarning, ParseError, ValidationError


class ObjectiveClass(enum.IntEnum):
    I = 1
    II = 2
    III = 3
    IV = 4
    V = 5
    VI = 6
    VII = 7

    def __str__(self):
        return self.name


class ClassScheme(enum.Enum):
    OBJECTIVE_I_V = "I-V"
    OBJECTIVE_I_VI = "I-VI"
    OBJECTIVE_I_VII = "I-VII"
    ORIGINAL_EMOTION = "original"

    @classmethod
    def parse(cls, text: str) -> "ClassScheme":
        norm = text.strip().upper().replace("_", "-")
        aliases = {
            "I-V": cls.OBJECTIVE_I_V, "OBJECTIVE-I-V": cls.OBJECTIVE_I_V,
            "I-VI": cls.OBJECTIVE_I_VI, "OBJECTIVE-I-VI": cls.OBJECTIVE_I_VI,
            "I-VII": cls.OBJECTIVE_I_VII, "OBJECTIVE-I-VII": cls.OBJECTIVE_I_VII,
            "ORIGINAL": cls.ORIGINAL_EMOTION, "ORIGINAL-EMOTION": cls.ORIGINAL_EMOTION,
        }
        try:
            return aliases[norm]
        except KeyError:
            raise ValidationError(
                f"unknown class scheme {text!r}; expected one of I-V, I-VI, I-VII, original") from None

    @property
    def max_class(self) -> Optional[ObjectiveClass]:
        return {
            ClassScheme.OBJECTIVE_I_V: ObjectiveClass.V,
            ClassScheme.OBJECTIVE_I_VI: ObjectiveClass.VI,
            ClassScheme.OBJECTIVE_I_VII: ObjectiveClass.VII,
        }.get(self)

    def __str__(self):
        return self.value


# Classes I-VI; every listed combination is matched as an exact AU set.
AU_CLASS_TABLE: dict[ObjectiveClass, tuple[frozenset[int], ...]] = {
    ObjectiveClass.I: (
        frozenset({6}), frozenset({12}), frozenset({6, 12}), frozenset({6, 7, 12}), frozenset({7, 12}),
    ),
    ObjectiveClass.II: (
        frozenset({1, 2}), frozenset({5}), frozenset({25}), frozenset({1, 2, 25}), frozenset({25, 26}),
        frozenset({5, 24}),
    ),
    ObjectiveClass.III: (
        frozenset({23}),  # printed as "A23" in the source table
        frozenset({4}), frozenset({4, 7}), frozenset({4, 5}), frozenset({4, 5, 7}), frozenset({17, 24}),
        frozenset({4, 6, 7}), frozenset({4, 38}),
    ),
    ObjectiveClass.IV: (
        frozenset({10}), frozenset({9}), frozenset({4, 9}), frozenset({4, 40}), frozenset({4, 5, 40}),
        frozenset({4, 7, 9}), frozenset({4, 9, 17}), frozenset({4, 7, 10}), frozenset({4, 5, 7, 9}),
        frozenset({7, 10}),
    ),
    ObjectiveClass.V: (
        frozenset({1}), frozenset({15}), frozenset({1, 4}), frozenset({6, 15}), frozenset({15, 17}),
    ),
    ObjectiveClass.VI: (
        frozenset({1, 2, 4}), frozenset({20}),
    ),
}

_LOOKUP: dict[frozenset[int], ObjectiveClass] = {
    combo: cls for cls, combos in AU_CLASS_TABLE.items() for combo in combos
}
assert len(_LOOKUP) == sum(len(v) for v in AU_CLASS_TABLE.values()), "combination listed twice"

# Published class frequencies (I..VII) after mapping each dataset.
EXPECTED_FREQUENCIES: dict[str, tuple[int, ...]] = {
    "CASME II": (25, 15, 99, 26, 20, 1, 69),
    "SAMM": (24, 13, 20, 8, 3, 7, 84),
}


def canonical_dataset_name(name: str) -> Optional[str]:
    """Map spellings like ``casme2`` / ``CASME_II`` / ``samm`` to a key of EXPECTED_FREQUENCIES."""
    key = re.sub(r"[^a-z0-9]", "", (name or "").lower())
    if key in ("casmeii", "casme2"):
        return "CASME II"
    if key == "samm":
        return "SAMM"
    return None


@dataclass(frozen=True)
class AuSet:
    aus: frozenset[int]
    laterality: Mapping[int, str] = field(default_factory=dict)
    intensity: Mapping[int, Optional[str]] = field(default_factory=dict)

    def __str__(self):
        return "+".join(f"AU{a}" for a in sorted(self.aus))


_TERM = re.compile(r"^(?P<side>[LR])?(?P<au>AU)?(?P<num>\d+)(?P<grade>[A-E])?$", re.IGNORECASE)


def parse_au_code(code: str) -> AuSet:
    """Parse ``code`` into an :class:`AuSet`.

    Terms are joined by ``+``. Each term is an optional ``L``/``R`` side,
    the literal ``AU`` (case-insensitive), the AU number and an optional
    intensity grade ``A``-``E``. Whitespace is ignored. Bare numbers
    (``"4+7"``) are accepted as well.
    """
    if code is None:
        raise ParseError("empty AU code", term="")
    text = re.sub(r"\s+", "", str(code))
    if not text:
        raise ParseError("empty AU code", term="")
    aus: set[int] = set()
    laterality: dict[int, str] = {}
    intensity: dict[int, Optional[str]] = {}
    for term in text.split("+"):
        m = _TERM.match(term)
        if m is None:
            raise ParseError(f"cannot parse AU term {term!r} in {code!r}", term=term)
        num = int(m["num"])
        if not 1 <= num <= 64:
            raise ParseError(f"AU number {num} out of range 1..64 in {code!r}", term=term)
        side = {"L": "left", "R": "right", None: "bilateral"}[m["side"] and m["side"].upper()]
        if num in laterality and laterality[num] != side:
            side = "bilateral"
        aus.add(num)
        laterality[num] = side
        if intensity.get(num) is None:
            intensity[num] = m["grade"] and m["grade"].upper()
    return AuSet(frozenset(aus), laterality, intensity)


def map_objective_class(aus: AuSet | Iterable[int]) -> ObjectiveClass:
    numbers = aus.aus if isinstance(aus, AuSet) else frozenset(aus)
    return _LOOKUP.get(frozenset(numbers), ObjectiveClass.VII)


def classify_code(code: str) -> ObjectiveClass:
    return map_objective_class(parse_au_code(code))


@dataclass
class Labelling:
    """Result of labelling a manifest under one scheme.

    ``labels`` maps clip key -> class name (``"I"``..``"VII"`` or an emotion),
    sorted by key. ``classes`` lists the label vocabulary in display order.
    """

    scheme: ClassScheme
    labels: dict[tuple[str, str], str]
    classes: list[str]
    frequencies: dict[str, int]
    excluded: list[tuple[str, str]] = field(default_factory=list)

    def __len__(self):
        return len(self.labels)

    def subjects(self) -> dict[tuple[str, str], str]:
        return {key: key[0] for key in self.labels}


def _objective_vocabulary(scheme: ClassScheme) -> list[str]:
    return [c.name for c in ObjectiveClass if c <= scheme.max_class]


def label_dataset(manifest: DatasetManifest | Iterable[ManifestEntry], scheme: ClassScheme,
                  emotion_classes: Optional[Iterable[str]] = None) -> Labelling:
    """Assign each clip a class label under ``scheme``.

    Objective schemes I-V and I-VI drop clips whose class is above the
    scheme's top class. ``original`` uses the (lower-cased) emotion column,
    optionally restricted to ``emotion_classes``.
    """
    entries = sorted(manifest, key=lambda e: e.key)
    labels: dict[tuple[str, str], str] = {}
    excluded: list[tuple[str, str]] = []

    if scheme is ClassScheme.ORIGINAL_EMOTION:
        missing = [e for e in entries if not (e.emotion or "").strip()]
        if missing:
            listing = ", ".join(f"{e.subject_id}/{e.clip_id}" for e in missing)
            raise ValidationError(f"scheme 'original' needs an emotion for every clip; missing for: {listing}")
        allowed = {c.strip().lower() for c in emotion_classes} if emotion_classes else None
        for e in entries:
            emo = e.emotion.strip().lower()
            if allowed is not None and emo not in allowed:
                excluded.append(e.key)
            else:
                labels[e.key] = emo
        vocabulary = sorted(set(labels.values()))
    else:
        bad = []
        for e in entries:
            try:
                cls = classify_code(e.au_code)
            except ParseError as exc:
                bad.append(f"{e.subject_id}/{e.clip_id} ({exc.term!r})")
                continue
            if cls > scheme.max_class:
                excluded.append(e.key)
            else:
                labels[e.key] = cls.name
        if bad:
            raise ValidationError("unparseable AU codes: " + ", ".join(bad))
        vocabulary = _objective_vocabulary(scheme)

    counts = Counter(labels.values())
    frequencies = {c: counts.get(c, 0) for c in vocabulary}
    if entries and not labels:
        warnings.warn(f"no clips remain under scheme {scheme.value}", MerWarning, stacklevel=2)
    return Labelling(scheme, labels, vocabulary, frequencies, excluded)


@dataclass
class AuditReport:
    dataset_name: str
    counts: dict[str, int]
    expected: Optional[dict[str, int]]
    clips_by_class: dict[str, list[tuple[str, str, str]]]  # class -> [(subject, clip, au_code)]
    unparseable: list[tuple[str, str, str]]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def mismatched_classes(self) -> list[str]:
        if self.expected is None:
            return []
        return [c for c in self.counts if self.counts[c] != self.expected[c]]

    @property
    def matches(self) -> Optional[bool]:
        if self.expected is None:
            return None
        return not self.mismatched_classes and not self.unparseable

    def render(self) -> str:
        lines = []
        head = f"{'Class':<6}{self.dataset_name or 'dataset':>12}"
        if self.expected is not None:
            head += f"{'expected':>10}{'diff':>7}"
        lines.append(head)
        for c, n in self.counts.items():
            row = f"{c:<6}{n:>12}"
            if self.expected is not None:
                exp = self.expected[c]
                row += f"{exp:>10}{n - exp:>+7d}"
            lines.append(row)
        tot = f"{'Total':<6}{self.total:>12}"
        if self.expected is not None:
            exp_total = sum(self.expected.values())
            tot += f"{exp_total:>10}{self.total - exp_total:>+7d}"
        lines.append(tot)
        if self.unparseable:
            lines.append("")
            lines.append("Unparseable AU codes:")
            lines.extend(f"  {s}/{c}: {code!r}" for s, c, code in self.unparseable)
        if self.mismatched_classes:
            lines.append("")
            lines.append("Per-clip listing for mismatched classes:")
            for cls in self.mismatched_classes:
                lines.append(f"  class {cls} (have {self.counts[cls]}, expected {self.expected[cls]}):")
                lines.extend(f"    {s}/{c}: {code}" for s, c, code in self.clips_by_class[cls])
        elif self.expected is not None and not self.unparseable:
            lines.append("")
            lines.append("All class counts match the published distribution.")
        return "\n".join(lines)


def audit_distribution(manifest: DatasetManifest, dataset_name: Optional[str] = None) -> AuditReport:
    """Count clips per objective class (I-VII) and compare with the published table."""
    name = dataset_name if dataset_name is not None else manifest.dataset_name
    canonical = canonical_dataset_name(name)
    clips_by_class: dict[str, list[tuple[str, str, str]]] = {c.name: [] for c in ObjectiveClass}
    unparseable = []
    for e in sorted(manifest, key=lambda e: e.key):
        try:
            cls = classify_code(e.au_code)
        except ParseError:
            unparseable.append((e.subject_id, e.clip_id, e.au_code))
            continue
        clips_by_class[cls.name].append((e.subject_id, e.clip_id, e.au_code))
    counts = {c: len(v) for c, v in clips_by_class.items()}
    expected = None
    if canonical is not None:
        expected = dict(zip((c.name for c in ObjectiveClass), EXPECTED_FREQUENCIES[canonical]))
    return AuditReport(canonical or name, counts, expected, clips_by_class, unparseable)
