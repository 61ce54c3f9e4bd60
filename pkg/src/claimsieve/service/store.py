"""Corpus store backing the annotation service.

Reads see consistent snapshots; mutations run under one writer lock and are
durably written (write-temp-then-rename) before they become visible, so a
crash between any two requests leaves either the old or the new corpus file,
never a torn one.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from ..claims import AnnotatedExample, EntailmentLabel, SubClaim
from ..corpus import dumps_corpus, load_corpus, write_text_atomic
from ..errors import ClaimsieveError


class UnknownLabelValue(ClaimsieveError):
    pass


class UnknownSubClaimId(ClaimsieveError):
    pass


class RelabelConflict(ClaimsieveError):
    pass


@dataclass(frozen=True)
class AnnotationTask:
    example_id: str
    subclaim_id: str
    claim: str
    input: str
    original_output: str
    position: int
    total_claims: int
    current_label: Optional[str]
    siblings: Sequence[tuple[int, str, bool]]  # (position, text, labeled)


class CorpusStore:
    def __init__(self, path: Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._examples: list[AnnotatedExample] = load_corpus(self.path)

    def snapshot(self) -> list[AnnotatedExample]:
        with self._lock:
            return list(self._examples)

    def export_text(self) -> str:
        return dumps_corpus(self.snapshot())

    def next_unlabeled(self) -> Optional[AnnotationTask]:
        for example, claim in self._ordered_claims():
            if claim.label is None:
                return self._task(example, claim)
        return None

    def task(self, subclaim_id: str) -> AnnotationTask:
        example, claim = self._find(subclaim_id)
        return self._task(example, claim)

    def set_label(self, subclaim_id: str, raw_label: str, overwrite: bool = False) -> None:
        """Persist a label durably, then make it visible to readers."""
        try:
            label = EntailmentLabel(raw_label)
        except ValueError:
            raise UnknownLabelValue(
                f"unknown label {raw_label!r}; legal values are "
                f"{[l.value for l in EntailmentLabel]}"
            ) from None
        with self._lock:
            example_index = claim_index = None
            for i, example in enumerate(self._examples):
                for j, claim in enumerate(example.subclaims):
                    if claim.id == subclaim_id:
                        example_index, claim_index = i, j
                        break
                if example_index is not None:
                    break
            if example_index is None:
                raise UnknownSubClaimId(f"no sub-claim with id {subclaim_id!r}")
            example = self._examples[example_index]
            claim = example.subclaims[claim_index]
            if claim.label is not None and not overwrite:
                raise RelabelConflict(
                    f"sub-claim {subclaim_id!r} already labeled {claim.label.value!r}; "
                    "pass overwrite=true to replace it"
                )
            subclaims = list(example.subclaims)
            subclaims[claim_index] = claim.with_label(label)
            updated = list(self._examples)
            updated[example_index] = example.with_subclaims(subclaims)
            write_text_atomic(self.path, dumps_corpus(updated))
            self._examples = updated

    def progress(self) -> dict:
        with self._lock:
            examples = []
            labeled_total = 0
            claim_total = 0
            for example in sorted(self._examples, key=lambda e: e.id):
                labeled = sum(1 for c in example.subclaims if c.label is not None)
                examples.append(
                    {
                        "example_id": example.id,
                        "labeled": labeled,
                        "total": len(example.subclaims),
                    }
                )
                labeled_total += labeled
                claim_total += len(example.subclaims)
        return {"labeled": labeled_total, "total": claim_total, "examples": examples}

    def _ordered_claims(self):
        with self._lock:
            examples = sorted(self._examples, key=lambda e: e.id)
        for example in examples:
            for claim in sorted(example.subclaims, key=lambda c: c.position):
                yield example, claim

    def _find(self, subclaim_id: str) -> tuple[AnnotatedExample, SubClaim]:
        for example, claim in self._ordered_claims():
            if claim.id == subclaim_id:
                return example, claim
        raise UnknownSubClaimId(f"no sub-claim with id {subclaim_id!r}")

    @staticmethod
    def _task(example: AnnotatedExample, claim: SubClaim) -> AnnotationTask:
        return AnnotationTask(
            example_id=example.id,
            subclaim_id=claim.id,
            claim=claim.text,
            input=example.input,
            original_output=example.original_output,
            position=claim.position,
            total_claims=len(example.subclaims),
            current_label=claim.label.value if claim.label else None,
            siblings=tuple(
                (c.position, c.text, c.label is not None)
                for c in sorted(example.subclaims, key=lambda c: c.position)
            ),
        )
