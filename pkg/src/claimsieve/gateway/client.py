"""Gateway facade: every language-model interaction behind one interface.

Responsibilities: plain generation, decomposition into sub-claims with
confidence values, merging accepted claims back into prose, sampling
alternate outputs, and judging claim support against an alternate. Malformed
model responses get exactly one automatic reprompt, then fail hard. Merging
an empty claim set short-circuits to the abstention sentinel without any
backend call.
"""

from __future__ import annotations

import json
import logging
import re
from typing import Callable, Sequence, TypeVar

from ..claims import ABSTAIN_SENTINEL, AnnotatedExample, SubClaim
from ..errors import ParseError
from ..scoring import score_frequency
from ..timestamp import utc_timestamp
from .backends import Backend, CompletionRequest, TranscriptWriter
from .config import GatewayConfig
from .prompts import render

logger = logging.getLogger(__name__)

T = TypeVar("T")

# lenient fallback for the unquoted {subclaim:..., gpt-score:...} line format
_BARE_LINE = re.compile(
    r"^\{\s*\"?subclaim\"?\s*:\s*(?P<claim>.*?)\s*,\s*\"?gpt-score\"?\s*:"
    r"\s*(?P<score>[-+0-9.eE]+)\s*\}$"
)


class Gateway:
    def __init__(
        self,
        config: GatewayConfig,
        backend: Backend,
        transcripts: TranscriptWriter | None = None,
    ):
        self.config = config
        self._backend = backend
        self._transcripts = transcripts

    def generate(self, prompt: str) -> str:
        """Base completion at the main (deterministic) temperature."""
        return self._call(prompt, self.config.temperature_main)

    def decompose(self, example_id: str, prompt: str, output: str) -> list[SubClaim]:
        """Split an output into ordered sub-claims with confidence values."""
        if not output:
            raise ValueError("cannot decompose an empty output")
        rendered = render(self.config.prompt_set.separator_and_confidence, output=output)
        parsed = self._call_parsed(
            rendered, self.config.temperature_main, _parse_decomposition
        )
        subclaims = []
        for position, (text, confidence) in enumerate(parsed, start=1):
            if not 0.0 <= confidence <= 1.0:
                clamped = min(1.0, max(0.0, confidence))
                logger.warning(
                    "confidence %s for claim %r outside [0, 1]; clamped to %s",
                    confidence,
                    text[:60],
                    clamped,
                )
                confidence = clamped
            subclaims.append(
                SubClaim(
                    id=f"{example_id}-c{position}",
                    text=text,
                    position=position,
                    confidence=confidence,
                )
            )
        return subclaims

    def merge(self, prompt: str, claim_texts: Sequence[str], task_kind: str) -> str:
        """Merge accepted claims into one output; no claims means abstain."""
        if not claim_texts:
            return ABSTAIN_SENTINEL
        template = self.config.prompt_set.merger_for(task_kind)
        rendered = render(template, claim_string="\n".join(claim_texts), prompt=prompt)
        return self._call(rendered, self.config.temperature_main)

    def sample_alternates(self, prompt: str, k: int | None = None) -> list[str]:
        """Draw k independent completions at the alternate temperature."""
        k = self.config.alternates_k if k is None else k
        if k < 1:
            raise ValueError("k must be >= 1")
        return [self._call(prompt, self.config.temperature_alternates) for _ in range(k)]

    def judge_support(
        self, claims: Sequence[SubClaim], alternate: str
    ) -> dict[str, int]:
        """Score each claim against an alternate output: +1 / 0 / -1.

        Claims the model forgets to score default to 0 with a warning.
        """
        if not claims:
            raise ValueError("no claims to judge")
        claim_string = "\n".join(f"{c.position}: {c.text}" for c in claims)
        rendered = render(
            self.config.prompt_set.frequency_judge,
            claim_string=claim_string,
            output=alternate,
        )
        positions = {c.position for c in claims}
        by_position = self._call_parsed(
            rendered,
            self.config.temperature_main,
            lambda text: _parse_judgments(text, positions),
        )
        judgments = {}
        for claim in claims:
            if claim.position not in by_position:
                logger.warning(
                    "judge response omitted claim %s (position %d); scoring 0",
                    claim.id,
                    claim.position,
                )
            judgments[claim.id] = by_position.get(claim.position, 0)
        return judgments

    def populate_example(
        self, example_id: str, prompt: str, task_kind: str = "biography"
    ) -> AnnotatedExample:
        """Run the full generation pipeline for one prompt.

        Produces the original output, its sub-claims (confidence attached),
        the alternate samples, and the aggregated frequency score channel.
        """
        output = self.generate(prompt)
        subclaims = self.decompose(example_id, prompt, output)
        alternates = self.sample_alternates(prompt)
        judgments: dict[str, list[int]] = {c.id: [] for c in subclaims}
        for alternate in alternates:
            per_claim = self.judge_support(subclaims, alternate)
            for claim_id, value in per_claim.items():
                judgments[claim_id].append(value)
        example = AnnotatedExample(
            id=example_id,
            input=prompt,
            task_kind=task_kind,
            original_output=output,
            subclaims=subclaims,
            alternates=alternates,
        )
        frequency = score_frequency(example, judgments, self.config.alternates_k)
        return example.with_subclaims(
            [c.with_score("frequency", frequency[c.id]) for c in subclaims]
        )

    def _call(self, prompt: str, temperature: float) -> str:
        request = CompletionRequest(prompt, temperature, self.config.max_tokens)
        text = self._backend.complete(request)
        self._record(request, text, "ok")
        return text

    def _call_parsed(
        self, prompt: str, temperature: float, parse: Callable[[str], T]
    ) -> T:
        request = CompletionRequest(prompt, temperature, self.config.max_tokens)
        last_error: ValueError | None = None
        for attempt in range(2):
            text = self._backend.complete(request)
            try:
                result = parse(text)
            except ValueError as exc:
                last_error = exc
                self._record(request, text, f"parse-error: {exc}")
                if attempt == 0:
                    logger.warning("malformed response (%s); reprompting once", exc)
                continue
            self._record(request, text, "ok")
            return result
        raise ParseError(f"response still malformed after one reprompt: {last_error}")

    def _record(self, request: CompletionRequest, response: str, parse_result: str) -> None:
        if self._transcripts is None:
            return
        self._transcripts.record(
            request_hash=request.hash(self.config.model_name),
            prompt=request.prompt,
            response=response,
            parse_result=parse_result,
            timestamp=utc_timestamp(),
        )


def _parse_decomposition(text: str) -> list[tuple[str, float]]:
    claims = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        parsed = _parse_claim_line(line)
        if parsed is None:
            raise ValueError(f"unparseable claim line: {line[:120]}")
        claims.append(parsed)
    if not claims:
        raise ValueError("decomposition response contained no claims")
    return claims


def _parse_claim_line(line: str) -> tuple[str, float] | None:
    try:
        record = json.loads(line)
    except json.JSONDecodeError:
        record = None
    if isinstance(record, dict) and "subclaim" in record and "gpt-score" in record:
        try:
            return str(record["subclaim"]), float(record["gpt-score"])
        except (TypeError, ValueError):
            return None
    match = _BARE_LINE.match(line)
    if match:
        claim = match.group("claim").strip().strip('"')
        try:
            return claim, float(match.group("score"))
        except ValueError:
            return None
    return None


def _parse_judgments(text: str, known_positions: set[int]) -> dict[int, int]:
    judgments: dict[int, int] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
            position = int(record["id"])
            value = record["score"]
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"unparseable judgment line: {line[:120]} ({exc})") from exc
        if value not in (-1, 0, 1):
            raise ValueError(f"judgment for claim {position} is {value}, not -1/0/1")
        if position not in known_positions:
            logger.warning("judge response names unknown claim id %s; ignored", position)
            continue
        judgments[position] = int(value)
    return judgments
