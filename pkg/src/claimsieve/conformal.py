"""Statistical core: conformity scores, the conformal quantile, calibration,
and threshold application.

Conventions used throughout (they make the coverage guarantee exact, not just
almost-sure):

* Acceptance is strict: a sub-claim survives threshold ``t`` iff its final
  score is ``> t``. Acceptance sets are therefore nested (antitone in ``t``)
  and the conformity score is itself a safe threshold.
* Scores are extended reals. ``r = -inf`` means the example is safe at every
  threshold; ``q_hat = +inf`` means abstain on everything.
* Scores within a quantile computation must be distinct (the tie-break noise
  guarantees this almost surely for continuous scorers); duplicated finite
  values raise :class:`DuplicateScores` instead of being silently broken.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Mapping, Sequence

from .claims import (
    ABSTAIN_SENTINEL,
    AnnotatedExample,
    CalibrationResult,
    ConformalOutput,
    ScoreVector,
)
from .errors import (
    AlphaTooSmall,
    DuplicateScores,
    InvalidLevel,
    UnannotatedExample,
    UnknownSubClaim,
    UnsoundChain,
)
from .scoring import ScorerSpec, final_scores
from .timestamp import utc_timestamp

NEG_INF = float("-inf")
POS_INF = float("inf")


def conformity_score(example: AnnotatedExample, scores: Mapping[str, float]) -> float:
    """Minimum strictly safe threshold: the largest final score among
    non-entailed sub-claims, or -inf when every sub-claim is entailed."""
    return conformity_value(_score_label_pairs(example, scores))


def partial_conformity_score(
    example: AnnotatedExample, scores: Mapping[str, float], a: float
) -> float:
    """Minimum threshold above which every acceptance set stays >= a entailed.

    The entailed fraction is not monotone in the threshold (dropping an
    entailed claim can lower it), so the whole upper tail of thresholds is
    checked, not just the first one.
    """
    return partial_conformity_value(_score_label_pairs(example, scores), a)


def conformity_value(pairs: Sequence[tuple[float, bool]]) -> float:
    worst = NEG_INF
    for score, entailed in pairs:
        if not entailed and score > worst:
            worst = score
    return worst


def partial_conformity_value(pairs: Sequence[tuple[float, bool]], a: float) -> float:
    if not 0.0 <= a <= 1.0:
        raise InvalidLevel(f"partial-entailment level must be in [0, 1], got {a}")
    ordered = sorted(pairs, key=lambda p: p[0], reverse=True)
    # tied scores would make acceptance sets jump by several claims at once
    # and break the one-claim-at-a-time prefix walk below
    _check_distinct([score for score, _ in ordered])
    entailed_so_far = 0
    # the empty acceptance set counts as fully entailed, so k = 0 always passes
    for k, (score, entailed) in enumerate(ordered, start=1):
        entailed_so_far += 1 if entailed else 0
        if entailed_so_far / k < a:
            return score
    return NEG_INF


def chain_score_bruteforce(
    entailed: Sequence[bool], thresholds: Sequence[float] | None = None
) -> float:
    """Definitional score over an explicit finite threshold chain.

    Returns the smallest threshold from which every later output (inclusive)
    is entailed. The last output must be the abstention, entailed by
    everything; anything else is an unsound chain.
    """
    if not entailed:
        raise ValueError("empty chain")
    if thresholds is None:
        thresholds = [float(i) for i in range(len(entailed))]
    if len(thresholds) != len(entailed):
        raise ValueError("one threshold per output required")
    if any(b >= c for b, c in zip(thresholds, thresholds[1:])):
        raise ValueError("thresholds must be strictly increasing")
    if not entailed[-1]:
        raise UnsoundChain("final output must be entailed by everything")
    first_safe = len(entailed) - 1
    while first_safe > 0 and entailed[first_safe - 1]:
        first_safe -= 1
    return thresholds[first_safe]


def conformal_quantile(scores: Sequence[float], alpha: float) -> float:
    """The k-th smallest score with k = ceil((n+1)(1-alpha)).

    Raises :class:`AlphaTooSmall` when k would exceed n, i.e. when
    alpha < 1/(n+1).
    """
    n = len(scores)
    if n < 1:
        raise ValueError("at least one calibration score required")
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    _check_distinct(scores)
    k = quantile_index(n, alpha)
    if k > n:
        raise AlphaTooSmall(alpha, n)
    # alpha = 1 gives k = 0; the guarantee is vacuous and the threshold
    # settles at the first order statistic
    return sorted(scores)[max(k, 1) - 1]


def quantile_index(n: int, alpha: float) -> int:
    # exact rational arithmetic; float rounding must not move the order statistic
    return math.ceil(Fraction(n + 1) * (1 - Fraction(alpha)))


def calibrate(
    corpus: Sequence[AnnotatedExample],
    spec: ScorerSpec,
    alpha: float,
    a: float = 1.0,
) -> CalibrationResult:
    """Score every calibration example, take the conformal quantile, and
    record the provenance needed to reproduce the threshold."""
    if not corpus:
        raise ValueError("calibration corpus is empty")
    vectors = [score_example(example, spec, a) for example in corpus]
    q_hat = conformal_quantile([v.r for v in vectors], alpha)
    return CalibrationResult(
        q_hat=q_hat,
        alpha=alpha,
        a=a,
        n=len(corpus),
        scorer=spec.name,
        seed=spec.seed,
        created_at=utc_timestamp(),
    )


def score_example(example: AnnotatedExample, spec: ScorerSpec, a: float = 1.0) -> ScoreVector:
    scores = final_scores(example, spec)
    if a == 1.0:
        r = conformity_score(example, scores)
    else:
        r = partial_conformity_score(example, scores, a)
    return ScoreVector(example_id=example.id, scorer=spec.name, r=r, a=a)


def apply_threshold(
    example: AnnotatedExample, scores: Mapping[str, float], q_hat: float
) -> ConformalOutput:
    """Keep sub-claims scoring strictly above the threshold.

    Labels are not consulted; this is the inference-time path. The merged
    text is left empty for the gateway to fill unless the output abstains.
    """
    _check_ids(example, scores)
    ordered = sorted(example.subclaims, key=lambda c: c.position)
    accepted = [c.id for c in ordered if scores[c.id] > q_hat]
    total = len(example.subclaims)
    abstained = not accepted
    return ConformalOutput(
        example_id=example.id,
        accepted=accepted,
        merged_text=ABSTAIN_SENTINEL if abstained else "",
        fraction_removed=1.0 - len(accepted) / total if total else 1.0,
        abstained=abstained,
    )


def _score_label_pairs(
    example: AnnotatedExample, scores: Mapping[str, float]
) -> list[tuple[float, bool]]:
    _check_ids(example, scores)
    pairs = []
    for claim in example.subclaims:
        if claim.label is None:
            raise UnannotatedExample(
                f"example {example.id!r}: sub-claim {claim.id!r} has no entailment label"
            )
        pairs.append((scores[claim.id], claim.label.entailed))
    _check_distinct([score for score, _ in pairs])
    return pairs


def _check_ids(example: AnnotatedExample, scores: Mapping[str, float]) -> None:
    claim_ids = {c.id for c in example.subclaims}
    if set(scores) != claim_ids:
        stray = sorted(set(scores) ^ claim_ids)
        raise UnknownSubClaim(
            f"example {example.id!r}: score map does not match sub-claims; offending ids {stray}"
        )


def _check_distinct(scores: Sequence[float]) -> None:
    finite = [s for s in scores if math.isfinite(s)]
    if len(set(finite)) != len(finite):
        raise DuplicateScores(
            "finite scores contain duplicates; apply tie-break noise before calibrating"
        )


