"""Corpus persistence: JSONL examples, calibration JSON, atomic file writes.

One :class:`AnnotatedExample` per line. Unknown fields survive a read/write
round-trip so corpora produced by newer revisions stay intact.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

from .claims import (
    AnnotatedExample,
    CalibrationResult,
    ConformalOutput,
    EntailmentLabel,
    SubClaim,
)

SCHEMA_VERSION = 1

_EXAMPLE_FIELDS = {
    "schema_version",
    "id",
    "input",
    "task_kind",
    "original_output",
    "subclaims",
    "alternates",
}
_SUBCLAIM_FIELDS = {"id", "text", "position", "scores", "confidence", "label"}


def subclaim_to_dict(claim: SubClaim) -> dict:
    record = {
        "id": claim.id,
        "text": claim.text,
        "position": claim.position,
        "scores": dict(claim.scores),
        "confidence": claim.confidence,
        "label": claim.label.value if claim.label is not None else None,
    }
    record.update(claim.extra)
    return record


def subclaim_from_dict(record: dict) -> SubClaim:
    label = record.get("label")
    return SubClaim(
        id=record["id"],
        text=record["text"],
        position=int(record["position"]),
        scores={k: float(v) for k, v in record.get("scores", {}).items()},
        confidence=None if record.get("confidence") is None else float(record["confidence"]),
        label=None if label is None else EntailmentLabel(label),
        extra={k: v for k, v in record.items() if k not in _SUBCLAIM_FIELDS},
    )


def example_to_dict(example: AnnotatedExample) -> dict:
    record = {
        "schema_version": SCHEMA_VERSION,
        "id": example.id,
        "input": example.input,
        "task_kind": example.task_kind,
        "original_output": example.original_output,
        "subclaims": [subclaim_to_dict(c) for c in example.subclaims],
        "alternates": list(example.alternates),
    }
    record.update(example.extra)
    return record


def example_from_dict(record: dict) -> AnnotatedExample:
    return AnnotatedExample(
        id=record["id"],
        input=record["input"],
        task_kind=record.get("task_kind", "biography"),
        original_output=record.get("original_output", ""),
        subclaims=[subclaim_from_dict(c) for c in record.get("subclaims", [])],
        alternates=list(record.get("alternates", [])),
        extra={k: v for k, v in record.items() if k not in _EXAMPLE_FIELDS},
    )


def dumps_corpus(examples: Iterable[AnnotatedExample]) -> str:
    return "".join(
        json.dumps(example_to_dict(e), ensure_ascii=False) + "\n" for e in examples
    )


def loads_corpus(text: str) -> list[AnnotatedExample]:
    examples = []
    # split on \n only: JSON strings may legally contain U+2028/U+2029
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"corpus line {lineno} is not valid JSON: {exc}") from exc
        examples.append(example_from_dict(record))
    return examples


def write_text_atomic(path: Path, text: str) -> None:
    """Write so a crash at any point leaves either the old or the new file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def save_corpus(path: Path, examples: Sequence[AnnotatedExample]) -> None:
    write_text_atomic(Path(path), dumps_corpus(examples))


def load_corpus(path: Path) -> list[AnnotatedExample]:
    return loads_corpus(Path(path).read_text(encoding="utf-8"))


def calibration_to_dict(result: CalibrationResult) -> dict:
    return {
        "q_hat": encode_extended(result.q_hat),
        "alpha": result.alpha,
        "a": result.a,
        "n": result.n,
        "scorer": result.scorer,
        "seed": result.seed,
        "created_at": result.created_at,
    }


def calibration_from_dict(record: dict) -> CalibrationResult:
    return CalibrationResult(
        q_hat=decode_extended(record["q_hat"]),
        alpha=float(record["alpha"]),
        a=float(record["a"]),
        n=int(record["n"]),
        scorer=record["scorer"],
        seed=int(record["seed"]),
        created_at=record["created_at"],
    )


def save_calibration(path: Path, result: CalibrationResult) -> None:
    write_text_atomic(Path(path), json.dumps(calibration_to_dict(result), indent=2) + "\n")


def load_calibration(path: Path) -> CalibrationResult:
    return calibration_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def output_to_dict(output: ConformalOutput, accepted_texts: Sequence[str]) -> dict:
    return {
        "example_id": output.example_id,
        "accepted": list(output.accepted),
        "accepted_texts": list(accepted_texts),
        "merged_text": output.merged_text,
        "fraction_removed": output.fraction_removed,
        "abstained": output.abstained,
    }


def encode_extended(value: float) -> object:
    # JSON has no +-inf; calibration thresholds legitimately take both.
    if value == float("inf"):
        return "inf"
    if value == float("-inf"):
        return "-inf"
    return value


def decode_extended(value: object) -> float:
    if value == "inf":
        return float("inf")
    if value == "-inf":
        return float("-inf")
    return float(value)  # type: ignore[arg-type]
