"""Sub-claim scoring functions and deterministic tie-break noise.

Scorer names understood everywhere: ``random``, ``ordinal``, ``confidence``,
``frequency``, ``oracle``; appending ``+rank`` converts any of them to a
rank-based score (rank within the example divided by the claim count).

Determinism contract: every random quantity is a keyed hash of
(purpose, seed, sub-claim id) fed through a fixed inverse-CDF sampler, so the
same sub-claim draws the same noise under every scorer and every run.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from statistics import NormalDist
from typing import Mapping, Sequence

from .claims import AnnotatedExample
from .errors import (
    MissingAlternates,
    MissingConfidence,
    ScorerMismatch,
    UnannotatedExample,
    UnknownSubClaim,
)

SCORER_KINDS = ("random", "ordinal", "confidence", "frequency", "oracle")
RANK_SUFFIX = "+rank"

TIEBREAK_VARIANCE = 1e-3
_TIEBREAK_SIGMA = TIEBREAK_VARIANCE**0.5
_CONFIDENCE_TIEBREAK = 1e-6
_NORMAL = NormalDist()

FREQUENCY_CHANNEL = "frequency"


@dataclass(frozen=True)
class ScorerSpec:
    """Which scoring function to run, and the randomness it is allowed."""

    kind: str
    rank_transform: bool = False
    seed: int = 0
    frequency_samples: int = 5

    def __post_init__(self):
        if self.kind not in SCORER_KINDS:
            raise ValueError(f"unknown scorer kind {self.kind!r}; expected one of {SCORER_KINDS}")
        if self.frequency_samples < 1:
            raise ValueError("frequency_samples must be >= 1")

    @property
    def name(self) -> str:
        return self.kind + (RANK_SUFFIX if self.rank_transform else "")


def parse_scorer(name: str, seed: int = 0, frequency_samples: int = 5) -> ScorerSpec:
    """Parse an external scorer name like ``"confidence"`` or ``"oracle+rank"``."""
    rank = name.endswith(RANK_SUFFIX)
    kind = name[: -len(RANK_SUFFIX)] if rank else name
    return ScorerSpec(
        kind=kind, rank_transform=rank, seed=seed, frequency_samples=frequency_samples
    )


def _hashed_unit(purpose: str, seed: int, claim_id: str) -> float:
    """Uniform draw in (0, 1), a pure function of (purpose, seed, claim id)."""
    digest = hashlib.blake2b(
        f"{purpose}:{seed}:{claim_id}".encode("utf-8"), digest_size=8
    ).digest()
    return (int.from_bytes(digest, "big") + 0.5) / 2.0**64


def tiebreak_noise(seed: int, claim_id: str) -> float:
    """Zero-mean Gaussian with variance 1e-3; identical across scorers by construction."""
    return _TIEBREAK_SIGMA * _NORMAL.inv_cdf(_hashed_unit("tiebreak", seed, claim_id))


def add_tiebreak_noise(raw: Mapping[str, float], seed: int) -> dict[str, float]:
    return {cid: value + tiebreak_noise(seed, cid) for cid, value in raw.items()}


def score_random(example: AnnotatedExample, seed: int) -> dict[str, float]:
    """Standard-normal score per sub-claim, independent of labels and text."""
    return {
        c.id: _NORMAL.inv_cdf(_hashed_unit("random-score", seed, c.id))
        for c in example.subclaims
    }


def score_ordinal(example: AnnotatedExample) -> dict[str, float]:
    """Position-based score: the claim at position j of n scores n - j."""
    n = len(example.subclaims)
    return {c.id: float(n - c.position) for c in example.subclaims}


def score_oracle(example: AnnotatedExample) -> dict[str, float]:
    """1 for entailed sub-claims, 0 otherwise; requires full annotation."""
    scores = {}
    for c in example.subclaims:
        if c.label is None:
            raise UnannotatedExample(
                f"example {example.id!r}: sub-claim {c.id!r} has no entailment label"
            )
        scores[c.id] = 1.0 if c.label.entailed else 0.0
    return scores


def score_confidence(example: AnnotatedExample) -> dict[str, float]:
    """Pass through the gateway-elicited confidence values."""
    scores = {}
    for c in example.subclaims:
        if c.confidence is None:
            raise MissingConfidence(
                f"example {example.id!r}: sub-claim {c.id!r} has no confidence value"
            )
        scores[c.id] = c.confidence
    return scores


def score_frequency(
    example: AnnotatedExample,
    support_judgments: Mapping[str, Sequence[int]],
    frequency_samples: int = 5,
) -> dict[str, float]:
    """Aggregate per-alternate support judgments (+1/0/-1) by summation.

    Summing (rather than counting supports) lets contradictions lower the
    score. Ties between equal sums are broken by confidence * 1e-6 so the
    later Gaussian noise decides only genuine ties.
    """
    scores = {}
    for c in example.subclaims:
        if c.id not in support_judgments:
            raise UnknownSubClaim(f"no judgments for sub-claim {c.id!r}")
        judgments = list(support_judgments[c.id])
        if len(judgments) < frequency_samples:
            raise MissingAlternates(
                f"sub-claim {c.id!r} judged against {len(judgments)} alternates; "
                f"{frequency_samples} configured"
            )
        bad = [j for j in judgments if j not in (-1, 0, 1)]
        if bad:
            raise ValueError(f"judgments must be -1, 0, or +1; got {bad}")
        confidence = c.confidence if c.confidence is not None else 0.0
        scores[c.id] = float(sum(judgments)) + confidence * _CONFIDENCE_TIEBREAK
    unknown = set(support_judgments) - {c.id for c in example.subclaims}
    if unknown:
        raise UnknownSubClaim(f"judgments reference unknown sub-claims: {sorted(unknown)}")
    return scores


def rank_transform(scores: Mapping[str, float]) -> dict[str, float]:
    """Replace each score with rank/n (increasing order, rank 1..n).

    Expects already-noised, hence distinct, inputs; the claim ordering is
    preserved exactly.
    """
    ordered = sorted(scores, key=lambda cid: scores[cid])
    n = len(ordered)
    return {cid: (rank + 1) / n for rank, cid in enumerate(ordered)}


def final_scores(example: AnnotatedExample, spec: ScorerSpec) -> dict[str, float]:
    """Run the full scoring pipeline: raw scores, tie-break noise, optional rank."""
    if spec.kind == "random":
        raw = score_random(example, spec.seed)
    elif spec.kind == "ordinal":
        raw = score_ordinal(example)
    elif spec.kind == "confidence":
        raw = score_confidence(example)
    elif spec.kind == "oracle":
        raw = score_oracle(example)
    elif spec.kind == "frequency":
        raw = _frequency_from_corpus(example)
    else:  # pragma: no cover - ScorerSpec validates kinds
        raise ValueError(spec.kind)
    noised = add_tiebreak_noise(raw, spec.seed)
    if spec.rank_transform:
        return rank_transform(noised)
    return noised


def _frequency_from_corpus(example: AnnotatedExample) -> dict[str, float]:
    scores = {}
    for c in example.subclaims:
        if FREQUENCY_CHANNEL not in c.scores:
            raise ScorerMismatch(
                f"example {example.id!r}: sub-claim {c.id!r} has no persisted "
                f"{FREQUENCY_CHANNEL!r} score; run the generation pipeline first"
            )
        scores[c.id] = c.scores[FREQUENCY_CHANNEL]
    return scores
