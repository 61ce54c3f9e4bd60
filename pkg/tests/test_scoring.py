import statistics

import pytest
from hypothesis import given
from hypothesis import strategies as st

from claimsieve.errors import (
    MissingAlternates,
    MissingConfidence,
    ScorerMismatch,
    UnannotatedExample,
    UnknownSubClaim,
)
from claimsieve.claims import EntailmentLabel
from claimsieve.scoring import (
    ScorerSpec,
    add_tiebreak_noise,
    final_scores,
    parse_scorer,
    rank_transform,
    score_confidence,
    score_frequency,
    score_oracle,
    score_ordinal,
    score_random,
    tiebreak_noise,
)

from .conftest import make_example


class TestScorerSpec:
    def test_parse_plain_and_rank(self):
        assert parse_scorer("frequency").kind == "frequency"
        assert not parse_scorer("frequency").rank_transform
        spec = parse_scorer("oracle+rank", seed=3)
        assert (spec.kind, spec.rank_transform, spec.seed) == ("oracle", True, 3)
        assert spec.name == "oracle+rank"

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            parse_scorer("verifier")

    def test_frequency_samples_validated(self):
        with pytest.raises(ValueError):
            ScorerSpec(kind="frequency", frequency_samples=0)


class TestRandomScoring:
    def test_deterministic_per_seed_and_id(self):
        example = make_example(labels=[True, False, True])
        assert score_random(example, 7) == score_random(example, 7)
        assert score_random(example, 7) != score_random(example, 8)

    def test_distinct_ids_distinct_scores(self):
        example = make_example(labels=[None] * 5)
        values = list(score_random(example, 0).values())
        assert len(set(values)) == len(values)

    def test_independent_of_labels(self):
        a = make_example(labels=[True, True, True])
        b = make_example(labels=[False, False, False])
        assert score_random(a, 1) == score_random(b, 1)

    def test_standard_normal_moments(self):
        # Monte Carlo check of the N(0, 1) contract over 10,000 draws
        example = make_example(labels=[None] * 10)
        draws = []
        for seed in range(1000):
            draws.extend(score_random(example, seed).values())
        assert abs(statistics.fmean(draws)) < 0.05
        assert abs(statistics.variance(draws) - 1.0) < 0.1


class TestOrdinalScoring:
    def test_formula_n_minus_j(self):
        example = make_example(labels=[None, None, None])
        scores = score_ordinal(example)
        assert scores == {"ex-1-c1": 2.0, "ex-1-c2": 1.0, "ex-1-c3": 0.0}

    def test_single_claim_scores_zero(self):
        example = make_example(labels=[None])
        assert list(score_ordinal(example).values()) == [0.0]


class TestOracleScoring:
    def test_label_mapping(self):
        example = make_example(
            labels=[
                EntailmentLabel.FACTUAL,
                EntailmentLabel.FALSE,
                EntailmentLabel.SUBJECTIVE,
                EntailmentLabel.UNVERIFIABLE,
            ]
        )
        scores = score_oracle(example)
        assert [scores[c.id] for c in example.subclaims] == [1.0, 0.0, 1.0, 0.0]

    def test_unannotated_rejected(self):
        with pytest.raises(UnannotatedExample):
            score_oracle(make_example(labels=[True, None]))


class TestConfidenceScoring:
    def test_pass_through(self):
        example = make_example(labels=[None] * 3, confidences=[0.95, 0.0, 1.0])
        scores = score_confidence(example)
        assert [scores[c.id] for c in example.subclaims] == [0.95, 0.0, 1.0]

    def test_missing_confidence_rejected(self):
        with pytest.raises(MissingConfidence):
            score_confidence(make_example(labels=[None], confidences=[None]))


class TestFrequencyScoring:
    def test_sum_aggregation(self):
        example = make_example(labels=[None], confidences=[0.0])
        judgments = {"ex-1-c1": [1, 1, 1, -1, 0]}
        assert score_frequency(example, judgments)["ex-1-c1"] == pytest.approx(2.0)

    def test_all_unrelated_sums_to_zero(self):
        example = make_example(labels=[None], confidences=[0.0])
        assert score_frequency(example, {"ex-1-c1": [0, 0, 0, 0, 0]})["ex-1-c1"] == 0.0

    def test_confidence_breaks_ties(self):
        example = make_example(labels=[None, None], confidences=[0.9, 0.4])
        scores = score_frequency(
            example, {"ex-1-c1": [1, 1, 1, 0, 0], "ex-1-c2": [1, 1, 1, 0, 0]}
        )
        assert scores["ex-1-c1"] > scores["ex-1-c2"]

    def test_missing_alternates_rejected(self):
        example = make_example(labels=[None], confidences=[0.5])
        with pytest.raises(MissingAlternates):
            score_frequency(example, {"ex-1-c1": [1, 0]}, frequency_samples=5)

    def test_unknown_id_rejected(self):
        example = make_example(labels=[None], confidences=[0.5])
        with pytest.raises(UnknownSubClaim):
            score_frequency(
                example, {"ex-1-c1": [0] * 5, "ghost": [0] * 5}, frequency_samples=5
            )

    def test_invalid_judgment_rejected(self):
        example = make_example(labels=[None], confidences=[0.5])
        with pytest.raises(ValueError):
            score_frequency(example, {"ex-1-c1": [2, 0, 0, 0, 0]})


class TestTiebreakNoise:
    def test_consistent_across_scorers(self):
        # the perturbation depends only on (seed, id), not which scorer ran
        example = make_example(labels=[True, False], confidences=[0.5, 0.5])
        ordinal = add_tiebreak_noise(score_ordinal(example), seed=5)
        oracle = add_tiebreak_noise(score_oracle(example), seed=5)
        for claim in example.subclaims:
            eps_ordinal = ordinal[claim.id] - score_ordinal(example)[claim.id]
            eps_oracle = oracle[claim.id] - score_oracle(example)[claim.id]
            assert eps_ordinal == pytest.approx(eps_oracle, abs=1e-12)

    def test_variance_near_one_thousandth(self):
        # Monte Carlo: sample variance within 20% of 1e-3 over 10,000 draws
        draws = [tiebreak_noise(seed, f"claim-{i}") for seed in range(100) for i in range(100)]
        assert abs(statistics.variance(draws) - 1e-3) <= 0.2e-3
        assert abs(statistics.fmean(draws)) < 1e-3

    def test_equal_raw_scores_become_distinct(self):
        example = make_example(labels=[None, None])
        noised = add_tiebreak_noise({"ex-1-c1": 1.0, "ex-1-c2": 1.0}, seed=0)
        assert noised["ex-1-c1"] != noised["ex-1-c2"]


class TestRankTransform:
    def test_rank_over_n(self):
        scores = {"a": 0.2, "b": 0.9, "c": 0.5}
        assert rank_transform(scores) == {"a": 1 / 3, "b": 1.0, "c": 2 / 3}

    def test_single_element(self):
        assert rank_transform({"only": -3.2}) == {"only": 1.0}

    def test_increasing_scores_give_position_over_n(self):
        scores = {f"c{j}": float(j) for j in range(1, 6)}
        assert rank_transform(scores) == {f"c{j}": j / 5 for j in range(1, 6)}

    @given(
        st.lists(
            st.floats(min_value=-50, max_value=50, allow_nan=False),
            min_size=1,
            max_size=10,
            unique=True,
        )
    )
    def test_range_and_order_preserved(self, values):
        scores = {f"c{i}": v for i, v in enumerate(values)}
        transformed = rank_transform(scores)
        n = len(values)
        assert sorted(transformed.values()) == [k / n for k in range(1, n + 1)]
        order = sorted(scores, key=scores.get)
        assert sorted(transformed, key=transformed.get) == order


class TestFinalScores:
    def test_determinism_byte_identical(self):
        example = make_example(labels=[True, False, True], confidences=[0.8, 0.1, 0.6])
        spec = parse_scorer("confidence", seed=11)
        assert final_scores(example, spec) == final_scores(example, spec)

    def test_rank_variant_matches_rank_of_noised(self):
        example = make_example(labels=[True, False, True], confidences=[0.8, 0.1, 0.6])
        plain = final_scores(example, parse_scorer("confidence", seed=2))
        ranked = final_scores(example, parse_scorer("confidence+rank", seed=2))
        assert ranked == rank_transform(plain)

    def test_oracle_separation_with_small_noise(self):
        # at variance 1e-3 the 0/1 gap dwarfs the noise
        for seed in range(50):
            example = make_example(labels=[True, False, True, False, True])
            scores = final_scores(example, parse_scorer("oracle", seed=seed))
            entailed = [scores[c.id] for c in example.subclaims if c.label.entailed]
            rest = [scores[c.id] for c in example.subclaims if not c.label.entailed]
            assert min(entailed) > max(rest)

    def test_frequency_requires_persisted_channel(self):
        example = make_example(labels=[None], confidences=[0.5])
        with pytest.raises(ScorerMismatch):
            final_scores(example, parse_scorer("frequency"))

    def test_frequency_reads_persisted_channel(self):
        example = make_example(
            labels=[None, None],
            confidences=[0.5, 0.5],
            scores=[{"frequency": 3.0}, {"frequency": 1.0}],
        )
        scores = final_scores(example, parse_scorer("frequency", seed=1))
        assert scores["ex-1-c1"] > scores["ex-1-c2"]
