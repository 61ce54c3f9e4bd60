"""Exception types shared across the package."""


class ClaimsieveError(Exception):
    """Base class for all claimsieve errors."""


class UnannotatedExample(ClaimsieveError):
    """An operation that needs entailment labels met an unlabeled sub-claim."""


class AlphaTooSmall(ClaimsieveError):
    """Requested error rate is below the 1/(n+1) floor for the calibration size."""

    def __init__(self, alpha: float, n: int):
        self.alpha = alpha
        self.n = n
        super().__init__(
            f"alpha={alpha} is not feasible with n={n} calibration examples; "
            f"the minimum feasible alpha is 1/(n+1) = {1.0 / (n + 1):.6f}"
        )


class DuplicateScores(ClaimsieveError):
    """Finite scores collided; the quantile guarantee assumes distinct scores."""


class InvalidLevel(ClaimsieveError):
    """Partial-entailment level outside [0, 1]."""


class UnsoundChain(ClaimsieveError):
    """A threshold chain whose final output is not entailed by everything."""


class UnknownSubClaim(ClaimsieveError):
    """A sub-claim id that does not belong to the example; indicates a pipeline bug."""


class MissingConfidence(ClaimsieveError):
    """Confidence scoring requested but the gateway never supplied confidences."""


class MissingAlternates(ClaimsieveError):
    """Frequency scoring requested with fewer alternate outputs than configured."""


class ScorerMismatch(ClaimsieveError):
    """The corpus lacks the score channel a calibration artifact requires."""


class GatewayError(ClaimsieveError):
    """Base class for language-model gateway failures."""


class UpstreamError(GatewayError):
    """The model backend failed after exhausting retries."""


class UpstreamTimeout(UpstreamError):
    """The model backend kept timing out."""


class ParseError(GatewayError):
    """The model response stayed malformed after one reprompt."""


class ReplayMiss(GatewayError):
    """Replay mode had no recorded response for a request."""
