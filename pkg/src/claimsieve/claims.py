"""Domain model: examples, sub-claims, labels, and calibration artifacts.

All types are immutable value objects; pipeline stages produce new values
instead of mutating. The JSONL wire format lives in :mod:`claimsieve.corpus`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Mapping, Optional, Sequence

ABSTAIN_SENTINEL = "ABSTAIN"

TASK_KINDS = ("biography", "open-qa", "math")


class EntailmentLabel(str, enum.Enum):
    """4-way annotation label. Entailment is derived, never stored separately."""

    FACTUAL = "Factual"
    SUBJECTIVE = "Subjective"
    UNVERIFIABLE = "Unverifiable"
    FALSE = "False"

    @property
    def entailed(self) -> bool:
        return self in (EntailmentLabel.FACTUAL, EntailmentLabel.SUBJECTIVE)


LEGAL_LABELS = tuple(label.value for label in EntailmentLabel)


@dataclass(frozen=True)
class SubClaim:
    """One atomic claim extracted from a model output.

    ``scores`` holds raw per-scorer values (e.g. the persisted frequency sum);
    tie-break noise is a pure function of (seed, id) and is recomputed, never
    stored. ``extra`` carries unknown wire-format fields through round-trips.
    """

    id: str
    text: str
    position: int
    scores: Mapping[str, float] = field(default_factory=dict)
    confidence: Optional[float] = None
    label: Optional[EntailmentLabel] = None
    extra: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "scores", MappingProxyType(dict(self.scores)))
        object.__setattr__(self, "extra", MappingProxyType(dict(self.extra)))

    def with_label(self, label: Optional[EntailmentLabel]) -> "SubClaim":
        return replace(self, label=label)

    def with_score(self, scorer: str, value: float) -> "SubClaim":
        scores = dict(self.scores)
        scores[scorer] = value
        return replace(self, scores=scores)


@dataclass(frozen=True)
class AnnotatedExample:
    """Input prompt, original output, and its ordered sub-claims.

    The reference answer is never materialized as text; ground truth exists
    only through per-sub-claim entailment labels.
    """

    id: str
    input: str
    task_kind: str = "biography"
    original_output: str = ""
    subclaims: Sequence[SubClaim] = ()
    alternates: Sequence[str] = ()
    extra: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "subclaims", tuple(self.subclaims))
        object.__setattr__(self, "alternates", tuple(self.alternates))
        object.__setattr__(self, "extra", MappingProxyType(dict(self.extra)))

    @property
    def is_annotated(self) -> bool:
        return bool(self.subclaims) and all(c.label is not None for c in self.subclaims)

    def claim(self, subclaim_id: str) -> SubClaim:
        for c in self.subclaims:
            if c.id == subclaim_id:
                return c
        raise KeyError(subclaim_id)

    def with_subclaims(self, subclaims: Sequence[SubClaim]) -> "AnnotatedExample":
        return replace(self, subclaims=tuple(subclaims))


@dataclass(frozen=True)
class ScoreVector:
    """Conformity score for one example under one scorer.

    ``r`` is extended-real: -inf when every sub-claim is entailed (nothing
    unsafe survives at any threshold). ``a`` is the partial-entailment level;
    1.0 is the standard full-factuality score.
    """

    example_id: str
    scorer: str
    r: float
    a: float = 1.0


@dataclass(frozen=True)
class CalibrationResult:
    """Calibrated threshold plus the provenance needed to reproduce it."""

    q_hat: float
    alpha: float
    a: float
    n: int
    scorer: str
    seed: int
    created_at: str

    def __post_init__(self):
        floor = 1.0 / (self.n + 1)
        # tiny slack: alpha == 1/(n+1) may arrive through float round-trips
        if self.alpha > 1 or self.alpha < floor - 1e-12:
            raise ValueError(
                f"alpha={self.alpha} outside the valid range [{floor:.6f}, 1] for n={self.n}"
            )


@dataclass(frozen=True)
class ConformalOutput:
    """Filtered claim set for one example, plus removal accounting."""

    example_id: str
    accepted: Sequence[str]
    merged_text: str
    fraction_removed: float
    abstained: bool

    def __post_init__(self):
        object.__setattr__(self, "accepted", tuple(self.accepted))
        if self.abstained != (len(self.accepted) == 0):
            raise ValueError("abstained must hold exactly when no claim is accepted")
        if self.abstained != (self.merged_text == ABSTAIN_SENTINEL):
            raise ValueError(
                f"merged_text must be {ABSTAIN_SENTINEL!r} exactly when abstaining"
            )
        if not 0.0 <= self.fraction_removed <= 1.0:
            raise ValueError("fraction_removed must lie in [0, 1]")


def validate_example(example: AnnotatedExample) -> list[str]:
    """Check type invariants; returns a report of violations (empty = valid)."""
    violations: list[str] = []
    positions = [c.position for c in example.subclaims]
    n = len(positions)
    if sorted(positions) != list(range(1, n + 1)):
        if len(set(positions)) != n:
            violations.append(f"duplicate-position: positions {positions} contain duplicates")
        else:
            violations.append(
                f"non-contiguous-position: positions {sorted(positions)} are not 1..{n}"
            )
    if positions != sorted(positions):
        violations.append("unordered-subclaims: subclaims are not in source order")
    labeled = sum(1 for c in example.subclaims if c.label is not None)
    if 0 < labeled < n:
        violations.append(
            f"partial-annotation: {labeled} of {n} subclaims labeled; must be all or none"
        )
    if example.original_output and not example.subclaims:
        violations.append("missing-subclaims: non-empty output with no subclaims")
    if example.task_kind not in TASK_KINDS:
        violations.append(
            f"unknown-task-kind: {example.task_kind!r} not one of {TASK_KINDS}"
        )
    seen_ids = set()
    for c in example.subclaims:
        if c.id in seen_ids:
            violations.append(f"duplicate-subclaim-id: {c.id}")
        seen_ids.add(c.id)
        if c.confidence is not None and not (
            0.0 <= c.confidence <= 1.0 and math.isfinite(c.confidence)
        ):
            violations.append(f"confidence-out-of-range: {c.id} has {c.confidence}")
    return violations
