"""Completion backends: live OpenAI-compatible HTTP, deterministic mock, replay.

Every backend implements ``complete(request) -> str``. The live backend talks
to ``{base_url}/chat/completions``, retries retryable failures with jittered
exponential backoff, and keeps at most ``max_concurrent_requests`` in flight.
The mock backend fabricates consistent text from hashes so whole pipeline runs
are reproducible without a network. Replay serves previously recorded
responses byte-exactly, in recording order for repeated identical requests.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
import threading
import time
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import httpx

from ..errors import ReplayMiss, UpstreamError, UpstreamTimeout
from .config import GatewayConfig

RETRYABLE_STATUS = (408, 409, 429, 500, 502, 503, 504)


@dataclass(frozen=True)
class CompletionRequest:
    prompt: str
    temperature: float
    max_tokens: int

    def payload(self, model_name: str) -> dict:
        return {
            "model": model_name,
            "messages": [{"role": "user", "content": self.prompt}],
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }

    def hash(self, model_name: str) -> str:
        canonical = json.dumps(self.payload(model_name), sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class Backend(Protocol):
    def complete(self, request: CompletionRequest) -> str: ...


class LiveBackend:
    def __init__(self, config: GatewayConfig, transport: httpx.BaseTransport | None = None):
        self._config = config
        self._api_key = config.api_key()
        self._limiter = threading.BoundedSemaphore(config.max_concurrent_requests)
        self._client = httpx.Client(timeout=config.request_timeout, transport=transport)
        self.calls = 0

    def complete(self, request: CompletionRequest) -> str:
        url = self._config.base_url.rstrip("/") + "/chat/completions"
        headers = {"Authorization": f"Bearer {self._api_key}"}
        payload = request.payload(self._config.model_name)
        last_error: Exception | None = None
        timed_out = False
        for attempt in range(self._config.max_retries + 1):
            if attempt:
                time.sleep(min(8.0, 0.5 * 2**attempt) * (1.0 + 0.25 * random.random()))
            try:
                with self._limiter:
                    self.calls += 1
                    response = self._client.post(url, json=payload, headers=headers)
            except httpx.TimeoutException as exc:
                last_error, timed_out = exc, True
                continue
            except httpx.HTTPError as exc:
                last_error = exc
                continue
            if response.status_code == 200:
                return self._extract_text(response)
            last_error = UpstreamError(
                f"HTTP {response.status_code} from {url}: {response.text[:500]}"
            )
            if response.status_code not in RETRYABLE_STATUS:
                raise last_error
        if timed_out:
            raise UpstreamTimeout(
                f"request timed out after {self._config.max_retries + 1} attempts"
            ) from last_error
        raise UpstreamError(
            f"request failed after {self._config.max_retries + 1} attempts: {last_error}"
        ) from last_error

    @staticmethod
    def _extract_text(response: httpx.Response) -> str:
        try:
            return response.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError, json.JSONDecodeError) as exc:
            raise UpstreamError(f"malformed completion payload: {exc}") from exc


class MockBackend:
    """Offline stand-in that recognizes the shipped prompt templates.

    Its merger neither adds nor drops claims (it joins them with ". "), so
    sub-claim entailment and merged-output entailment coincide exactly, and
    every response is a pure function of (prompt text, seed, per-request
    repeat count).
    """

    def __init__(self, config: GatewayConfig):
        self._config = config
        self._repeat_counts: dict[str, int] = defaultdict(int)
        self._lock = threading.Lock()
        self.calls = 0

    def complete(self, request: CompletionRequest) -> str:
        with self._lock:
            self.calls += 1
            key = request.hash(self._config.model_name)
            repeat = self._repeat_counts[key]
            self._repeat_counts[key] += 1
        prompt = request.prompt
        if prompt.startswith("Please breakdown the following input"):
            return self._decompose_response(prompt)
        if "For each claim, score whether the text supports" in prompt:
            return self._judge_response(prompt)
        for marker, end in (
            ("The facts:\n ", "\n\nThe instruction:"),
            ("The parts:\n", "\n\nThe question:"),
            ("The steps:\n", "\n\nThe math problem:"),
        ):
            if marker in prompt:
                claim_string = prompt.split(marker, 1)[1].split(end, 1)[0]
                return ". ".join(line for line in claim_string.split("\n") if line)
        return self._generation(prompt, variant=repeat if request.temperature > 0 else 0)

    def _generation(self, prompt: str, variant: int) -> str:
        subject = prompt.strip().rstrip("?.!")[:60] or "the subject"
        n = 3 + self._digit(f"count:{subject}", 3)
        sentences = [
            f"{subject} is linked to detail {self._digit(f'detail:{subject}:{j}', 90) + 10}"
            for j in range(1, n + 1)
        ]
        if variant > 0:
            kept = [
                s
                for j, s in enumerate(sentences)
                if self._digit(f"keep:{subject}:{variant}:{j}", 100) < 70
            ]
            sentences = kept or sentences[:1]
        return ". ".join(sentences) + "."

    def _decompose_response(self, prompt: str) -> str:
        source = prompt.split("The input is: ", 1)[1]
        sentences = [s.strip().rstrip(".") for s in re.split(r"(?<=\.)\s+", source)]
        sentences = [s for s in sentences if s]
        lines = []
        for sentence in sentences:
            confidence = round(self._digit(f"conf:{sentence}", 101) / 100.0, 2)
            lines.append(json.dumps({"subclaim": sentence, "gpt-score": confidence}))
        return "\n".join(lines)

    def _judge_response(self, prompt: str) -> str:
        claim_block = prompt.split("The claims are:\n", 1)[1]
        claim_block, text = claim_block.split("\n\nThe text is:\n", 1)
        lines = []
        for line in claim_block.split("\n"):
            if not line.strip():
                continue
            claim_id, claim_text = line.split(": ", 1)
            score = 1 if claim_text in text else 0
            lines.append(json.dumps({"id": int(claim_id), "score": score}))
        return "\n".join(lines)

    def _digit(self, key: str, modulus: int) -> int:
        digest = hashlib.blake2b(
            f"mock:{self._config.seed}:{key}".encode("utf-8"), digest_size=8
        ).digest()
        return int.from_bytes(digest, "big") % modulus


class ReplayBackend:
    """Serve recorded transcripts; identical requests replay in call order."""

    def __init__(self, transcript_path: Path, config: GatewayConfig):
        self._config = config
        self._responses: dict[str, list[str]] = defaultdict(list)
        self._cursors: dict[str, int] = defaultdict(int)
        self._lock = threading.Lock()
        self.calls = 0
        for record in load_transcripts(transcript_path):
            self._responses[record["request_hash"]].append(record["response"])

    def complete(self, request: CompletionRequest) -> str:
        key = request.hash(self._config.model_name)
        with self._lock:
            self.calls += 1
            cursor = self._cursors[key]
            stored = self._responses.get(key, [])
            if cursor >= len(stored):
                raise ReplayMiss(
                    f"no recorded response #{cursor + 1} for request hash {key[:12]}..."
                )
            self._cursors[key] += 1
            return stored[cursor]


class TranscriptWriter:
    """Append-only JSONL log of every live call, written by one writer."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def record(
        self, request_hash: str, prompt: str, response: str, parse_result: str, timestamp: str
    ) -> None:
        line = json.dumps(
            {
                "request_hash": request_hash,
                "prompt": prompt,
                "response": response,
                "parse_result": parse_result,
                "timestamp": timestamp,
            },
            ensure_ascii=False,
        )
        with self._lock, self.path.open("a", encoding="utf-8") as handle:
            handle.write(line + "\n")


def load_transcripts(path: Path) -> list[dict]:
    path = Path(path)
    if not path.exists():
        return []
    records = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            records.append(json.loads(line))
    return records
