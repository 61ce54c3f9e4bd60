"""Shared builders for tests."""

from __future__ import annotations

from typing import Sequence

import pytest

from claimsieve.claims import AnnotatedExample, EntailmentLabel, SubClaim


def make_example(
    example_id: str = "ex-1",
    labels: Sequence[object] | None = None,
    confidences: Sequence[float | None] | None = None,
    scores: Sequence[dict] | None = None,
    texts: Sequence[str] | None = None,
    task_kind: str = "biography",
    alternates: Sequence[str] = (),
) -> AnnotatedExample:
    """Build an example from per-claim shorthand.

    ``labels`` entries may be EntailmentLabel, bool (True -> Factual,
    False -> False), or None for unlabeled.
    """
    n = max(
        len(seq)
        for seq in (labels, confidences, scores, texts)
        if seq is not None
    )
    subclaims = []
    sentences = []
    for j in range(1, n + 1):
        raw = labels[j - 1] if labels is not None else None
        if isinstance(raw, bool):
            label = EntailmentLabel.FACTUAL if raw else EntailmentLabel.FALSE
        else:
            label = raw
        text = texts[j - 1] if texts is not None else f"Claim {j} about {example_id}."
        sentences.append(text)
        subclaims.append(
            SubClaim(
                id=f"{example_id}-c{j}",
                text=text,
                position=j,
                scores=scores[j - 1] if scores is not None else {},
                confidence=confidences[j - 1] if confidences is not None else None,
                label=label,
            )
        )
    return AnnotatedExample(
        id=example_id,
        input=f"Tell me about {example_id}.",
        task_kind=task_kind,
        original_output=" ".join(sentences),
        subclaims=subclaims,
        alternates=alternates,
    )


@pytest.fixture
def labeled_example() -> AnnotatedExample:
    return make_example(labels=[True, False, True], confidences=[0.9, 0.2, 0.7])
