"""Experiment harness: synthetic corpora and the calibration-evaluation
protocols (random half-splits, leave-one-out removal curves, partial
entailment, removal histograms).

All randomness flows from one seed through counter-based substreams keyed by
(purpose, index), so reports are pure functions of (corpus, scorer, grid,
trials, seed) and growing the alpha grid never perturbs the split draws.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .claims import AnnotatedExample, EntailmentLabel, SubClaim
from .conformal import (
    NEG_INF,
    conformity_value,
    partial_conformity_value,
    quantile_index,
)
from .errors import AlphaTooSmall, DuplicateScores, InvalidLevel, UnannotatedExample
from .scoring import ScorerSpec, final_scores

# substream purposes
_STREAM_SPLIT = 0
_STREAM_EXAMPLE = 1

CSV_HEADER = (
    "scorer",
    "alpha",
    "a",
    "mean_factuality",
    "std_factuality",
    "mean_removed",
    "stderr_removed",
    "n",
    "trials",
)

BASELINE_ALPHA = None  # row for the unfiltered model: zero removal, base factuality


@dataclass(frozen=True)
class SyntheticSpec:
    """Desk-scale stand-in corpus: i.i.d. examples with ground-truth labels.

    The stored confidence channel is informative about the label with
    probability ``rho`` and pure uniform noise otherwise, so rho=1 matches
    oracle ordering exactly and rho=0 is indistinguishable from random
    scoring.
    """

    n_examples: int
    claims_min: int = 5
    claims_max: int = 12
    p_entail: float = 0.8
    rho: float = 0.7
    seed: int = 0

    def __post_init__(self):
        if self.n_examples < 1:
            raise ValueError("n_examples must be >= 1; cannot generate an empty corpus")
        if not 1 <= self.claims_min <= self.claims_max:
            raise ValueError("claim count range must satisfy 1 <= min <= max")
        if not 0.0 <= self.p_entail <= 1.0:
            raise ValueError("p_entail must be in [0, 1]")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError("rho must be in [0, 1]")


@dataclass(frozen=True)
class ReportRow:
    scorer: str
    alpha: float | None
    a: float
    mean_factuality: float
    std_factuality: float
    mean_removed: float
    stderr_removed: float
    n: int
    trials: int


@dataclass(frozen=True)
class ExperimentReport:
    protocol: str
    rows: Sequence[ReportRow]
    records: Sequence[dict] = field(default_factory=list)

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        object.__setattr__(self, "records", tuple(self.records))

    def row(self, scorer: str, alpha: float | None) -> ReportRow:
        for candidate in self.rows:
            if candidate.scorer == scorer and candidate.alpha == alpha:
                return candidate
        raise KeyError((scorer, alpha))

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in self.rows:
            writer.writerow(
                [
                    row.scorer,
                    "" if row.alpha is None else repr(row.alpha),
                    repr(row.a),
                    repr(row.mean_factuality),
                    repr(row.std_factuality),
                    repr(row.mean_removed),
                    repr(row.stderr_removed),
                    row.n,
                    row.trials,
                ]
            )
        return buffer.getvalue()

    def to_json(self) -> str:
        payload = {
            "protocol": self.protocol,
            "rows": [vars(row) for row in self.rows],
            "records": list(self.records),
        }
        return json.dumps(payload, ensure_ascii=False, indent=2) + "\n"

    @staticmethod
    def combine(reports: Sequence["ExperimentReport"]) -> "ExperimentReport":
        if not reports:
            raise ValueError("no reports to combine")
        protocols = {report.protocol for report in reports}
        if len(protocols) != 1:
            raise ValueError(f"cannot combine reports across protocols {protocols}")
        rows: list[ReportRow] = []
        records: list[dict] = []
        for report in reports:
            rows.extend(report.rows)
            records.extend(report.records)
        return ExperimentReport(reports[0].protocol, rows, records)


@dataclass(frozen=True)
class HistogramReport:
    scorer: str
    alpha: float
    a: float
    bin_edges: Sequence[float]
    counts: Sequence[int]

    def __post_init__(self):
        object.__setattr__(self, "bin_edges", tuple(self.bin_edges))
        object.__setattr__(self, "counts", tuple(self.counts))

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["scorer", "alpha", "a", "bin_low", "bin_high", "count"])
        for low, high, count in zip(self.bin_edges, self.bin_edges[1:], self.counts):
            writer.writerow(
                [self.scorer, repr(self.alpha), repr(self.a), repr(low), repr(high), count]
            )
        return buffer.getvalue()

    def to_json(self) -> str:
        fields = {
            k: list(v) if isinstance(v, tuple) else v for k, v in vars(self).items()
        }
        return json.dumps(fields, ensure_ascii=False, indent=2) + "\n"


def generate_synthetic(spec: SyntheticSpec) -> list[AnnotatedExample]:
    """Exchangeable (i.i.d.) annotated corpus with a tunable confidence channel."""
    examples = []
    for index in range(spec.n_examples):
        rng = _substream(spec.seed, _STREAM_EXAMPLE, index)
        example_id = f"synth-{index:04d}"
        n_claims = int(rng.integers(spec.claims_min, spec.claims_max + 1))
        subclaims = []
        sentences = []
        for position in range(1, n_claims + 1):
            entailed = bool(rng.random() < spec.p_entail)
            if entailed:
                label = (
                    EntailmentLabel.FACTUAL
                    if rng.random() < 0.9
                    else EntailmentLabel.SUBJECTIVE
                )
            else:
                label = (
                    EntailmentLabel.FALSE
                    if rng.random() < 0.7
                    else EntailmentLabel.UNVERIFIABLE
                )
            informative = bool(rng.random() < spec.rho)
            confidence = (1.0 if entailed else 0.0) if informative else float(rng.random())
            text = f"Subject {index} has property {position}-{int(rng.integers(100, 1000))}."
            sentences.append(text)
            subclaims.append(
                SubClaim(
                    id=f"{example_id}-c{position}",
                    text=text,
                    position=position,
                    confidence=confidence,
                    label=label,
                )
            )
        examples.append(
            AnnotatedExample(
                id=example_id,
                input=f"Tell me about synthetic subject {index}.",
                task_kind="biography",
                original_output=" ".join(sentences),
                subclaims=subclaims,
            )
        )
    return examples


def run_split_experiment(
    corpus: Sequence[AnnotatedExample],
    spec: ScorerSpec,
    alpha_grid: Sequence[float],
    trials: int,
    seed: int,
) -> ExperimentReport:
    """Random half-split protocol: calibrate on one half, measure empirical
    factuality (every accepted sub-claim entailed) on the other half."""
    return _split_protocol(corpus, spec, alpha_grid, trials, seed, a=1.0, protocol="split")


def run_partial_experiment(
    corpus: Sequence[AnnotatedExample],
    spec: ScorerSpec,
    alpha_grid: Sequence[float],
    trials: int,
    seed: int,
    a: float,
) -> ExperimentReport:
    """Half-split protocol with partial scores; success means the entailed
    fraction of accepted sub-claims reaches the level ``a``."""
    return _split_protocol(corpus, spec, alpha_grid, trials, seed, a=a, protocol="partial")


def run_removal_curve(
    corpus: Sequence[AnnotatedExample],
    spec: ScorerSpec,
    alpha_grid: Sequence[float],
    a: float = 1.0,
) -> ExperimentReport:
    """Leave-one-out evaluation: calibrate on n-1 examples, apply to the
    held-out one, rotate. The first row is the unfiltered baseline."""
    arrays = _score_arrays(corpus, spec, a)
    n = arrays.r.shape[0]
    if n < 2:
        raise ValueError("leave-one-out needs at least 2 examples")
    rows = [_baseline_row(arrays, spec.name, a)]
    records: list[dict] = []
    for alpha in alpha_grid:
        k = quantile_index(n - 1, alpha)
        if k > n - 1:
            raise AlphaTooSmall(alpha, n - 1)
        factual = np.empty(n, dtype=bool)
        removed = np.empty(n, dtype=float)
        for holdout in range(n):
            calibration = np.sort(np.delete(arrays.r, holdout))
            _check_sorted_distinct(calibration[None, :])
            q_hat = calibration[k - 1]
            factual[holdout], removed[holdout] = _evaluate_one(arrays, holdout, q_hat, a)
            records.append(
                {
                    "scorer": spec.name,
                    "alpha": alpha,
                    "holdout": arrays.example_ids[holdout],
                    "factual": bool(factual[holdout]),
                    "fraction_removed": float(removed[holdout]),
                }
            )
        rows.append(
            ReportRow(
                scorer=spec.name,
                alpha=alpha,
                a=a,
                mean_factuality=float(factual.mean()),
                std_factuality=float(factual.std(ddof=1)) if n > 1 else 0.0,
                mean_removed=float(removed.mean()),
                stderr_removed=float(removed.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0,
                n=n - 1,
                trials=n,
            )
        )
    return ExperimentReport("loo", rows, records)


def removal_histogram(
    corpus: Sequence[AnnotatedExample],
    spec: ScorerSpec,
    alpha: float,
    a: float = 1.0,
    bins: int = 10,
) -> HistogramReport:
    """Leave-one-out removal fractions binned over [0, 1]."""
    report = run_removal_curve(corpus, spec, [alpha], a=a)
    removals = [record["fraction_removed"] for record in report.records]
    counts, edges = np.histogram(removals, bins=bins, range=(0.0, 1.0))
    return HistogramReport(
        scorer=spec.name,
        alpha=alpha,
        a=a,
        bin_edges=[float(edge) for edge in edges],
        counts=[int(count) for count in counts],
    )


@dataclass(frozen=True)
class _ScoreArrays:
    example_ids: Sequence[str]
    scores: np.ndarray  # (n, max_claims), padded with -inf
    entailed: np.ndarray  # (n, max_claims) bool, padding False
    counts: np.ndarray  # (n,) true claim counts
    r: np.ndarray  # (n,) conformity scores at the requested level


def _score_arrays(
    corpus: Sequence[AnnotatedExample], spec: ScorerSpec, a: float
) -> _ScoreArrays:
    if not corpus:
        raise ValueError("empty corpus")
    if not 0.0 <= a <= 1.0:
        raise InvalidLevel(f"partial-entailment level must be in [0, 1], got {a}")
    n = len(corpus)
    empty = [example.id for example in corpus if not example.subclaims]
    if empty:
        raise ValueError(
            f"examples without sub-claims have no removal fraction: {empty[:5]}"
        )
    max_claims = max(len(example.subclaims) for example in corpus)
    scores = np.full((n, max_claims), NEG_INF)
    entailed = np.zeros((n, max_claims), dtype=bool)
    counts = np.zeros(n, dtype=np.int64)
    r = np.empty(n)
    for i, example in enumerate(corpus):
        score_map = final_scores(example, spec)
        pairs = []
        for j, claim in enumerate(example.subclaims):
            if claim.label is None:
                raise UnannotatedExample(
                    f"example {example.id!r}: sub-claim {claim.id!r} has no label"
                )
            scores[i, j] = score_map[claim.id]
            entailed[i, j] = claim.label.entailed
            pairs.append((score_map[claim.id], claim.label.entailed))
        counts[i] = len(example.subclaims)
        r[i] = conformity_value(pairs) if a == 1.0 else partial_conformity_value(pairs, a)
    return _ScoreArrays(
        example_ids=[example.id for example in corpus],
        scores=scores,
        entailed=entailed,
        counts=counts,
        r=r,
    )


def _split_protocol(
    corpus: Sequence[AnnotatedExample],
    spec: ScorerSpec,
    alpha_grid: Sequence[float],
    trials: int,
    seed: int,
    a: float,
    protocol: str,
) -> ExperimentReport:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    arrays = _score_arrays(corpus, spec, a)
    n = arrays.r.shape[0]
    n_cal = (n + 1) // 2  # odd corpora put the extra example in the calibration half
    n_test = n - n_cal
    if n_test < 1:
        raise ValueError("corpus too small to split in half")
    for alpha in alpha_grid:
        if quantile_index(n_cal, alpha) > n_cal:
            raise AlphaTooSmall(alpha, n_cal)

    permutations = np.stack(
        [_substream(seed, _STREAM_SPLIT, trial).permutation(n) for trial in range(trials)]
    )
    r_cal_sorted = np.sort(arrays.r[permutations[:, :n_cal]], axis=1)
    _check_sorted_distinct(r_cal_sorted)
    test_idx = permutations[:, n_cal:]
    scores_test = arrays.scores[test_idx]  # (trials, n_test, max_claims)
    entailed_test = arrays.entailed[test_idx]
    counts_test = arrays.counts[test_idx]

    rows = []
    records: list[dict] = []
    for alpha in alpha_grid:
        k = quantile_index(n_cal, alpha)
        q_hat = r_cal_sorted[:, k - 1]  # (trials,)
        accepted = scores_test > q_hat[:, None, None]
        accepted_n = accepted.sum(axis=2)
        entailed_n = (accepted & entailed_test).sum(axis=2)
        if a == 1.0:
            success = entailed_n == accepted_n  # empty acceptance sets count as safe
        else:
            fraction = np.divide(
                entailed_n,
                accepted_n,
                out=np.ones_like(entailed_n, dtype=float),
                where=accepted_n > 0,
            )
            success = fraction >= a
        factuality = success.mean(axis=1)
        removed = (1.0 - accepted_n / counts_test).mean(axis=1)
        rows.append(
            ReportRow(
                scorer=spec.name,
                alpha=alpha,
                a=a,
                mean_factuality=float(factuality.mean()),
                std_factuality=float(factuality.std(ddof=1)) if trials > 1 else 0.0,
                mean_removed=float(removed.mean()),
                stderr_removed=(
                    float(removed.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
                ),
                n=n_cal,
                trials=trials,
            )
        )
        for trial in range(trials):
            records.append(
                {
                    "scorer": spec.name,
                    "alpha": alpha,
                    "trial": trial,
                    "factuality": float(factuality[trial]),
                    "fraction_removed": float(removed[trial]),
                }
            )
    return ExperimentReport(protocol, rows, records)


def _baseline_row(arrays: _ScoreArrays, scorer: str, a: float) -> ReportRow:
    if a == 1.0:
        base = (arrays.entailed.sum(axis=1) == arrays.counts).astype(float)
    else:
        base = (arrays.entailed.sum(axis=1) / arrays.counts >= a).astype(float)
    n = base.shape[0]
    return ReportRow(
        scorer=scorer,
        alpha=BASELINE_ALPHA,
        a=a,
        mean_factuality=float(base.mean()),
        std_factuality=float(base.std(ddof=1)) if n > 1 else 0.0,
        mean_removed=0.0,
        stderr_removed=0.0,
        n=n,
        trials=n,
    )


def _evaluate_one(
    arrays: _ScoreArrays, index: int, q_hat: float, a: float
) -> tuple[bool, float]:
    count = int(arrays.counts[index])
    scores = arrays.scores[index, :count]
    entailed = arrays.entailed[index, :count]
    accepted = scores > q_hat
    accepted_n = int(accepted.sum())
    entailed_n = int((accepted & entailed).sum())
    if a == 1.0:
        success = entailed_n == accepted_n
    else:
        success = (entailed_n / accepted_n >= a) if accepted_n else True
    return bool(success), 1.0 - accepted_n / count


def _check_sorted_distinct(sorted_rows: np.ndarray) -> None:
    duplicated = (sorted_rows[:, 1:] == sorted_rows[:, :-1]) & np.isfinite(
        sorted_rows[:, 1:]
    )
    if duplicated.any():
        raise DuplicateScores(
            "finite calibration scores contain duplicates; the quantile guarantee "
            "assumes distinct scores"
        )


def _substream(seed: int, purpose: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(purpose, index)))
