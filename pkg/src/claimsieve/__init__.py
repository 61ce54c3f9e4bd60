"""claimsieve: calibrated sub-claim filtering for language-model outputs.

Decompose an output into sub-claims, score them, calibrate a conformal
threshold on labeled data, and keep only the claims that are safe at a
user-chosen error rate.
"""

from .claims import (
    ABSTAIN_SENTINEL,
    AnnotatedExample,
    CalibrationResult,
    ConformalOutput,
    EntailmentLabel,
    ScoreVector,
    SubClaim,
    validate_example,
)
from .conformal import (
    apply_threshold,
    calibrate,
    chain_score_bruteforce,
    conformal_quantile,
    conformity_score,
    partial_conformity_score,
)
from .scoring import ScorerSpec, parse_scorer

__version__ = "0.1.0"

__all__ = [
    "ABSTAIN_SENTINEL",
    "AnnotatedExample",
    "CalibrationResult",
    "ConformalOutput",
    "EntailmentLabel",
    "ScoreVector",
    "ScorerSpec",
    "SubClaim",
    "apply_threshold",
    "calibrate",
    "chain_score_bruteforce",
    "conformal_quantile",
    "conformity_score",
    "parse_scorer",
    "partial_conformity_score",
    "validate_example",
]
