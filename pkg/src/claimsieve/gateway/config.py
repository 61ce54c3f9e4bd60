"""Gateway configuration: endpoint, sampling parameters, and limits."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from ..errors import GatewayError
from .prompts import PromptTemplates


@dataclass(frozen=True)
class GatewayConfig:
    base_url: str = "https://api.openai.com/v1"
    model_name: str = "gpt-4"
    api_key_env: str = "OPENAI_API_KEY"
    max_tokens: int = 1000
    temperature_main: float = 0.0
    temperature_alternates: float = 1.0
    alternates_k: int = 5
    request_timeout: float = 60.0
    max_retries: int = 3
    max_concurrent_requests: int = 4
    prompt_set: PromptTemplates = field(default_factory=PromptTemplates)
    seed: int = 0  # drives deterministic variation in the mock backend only

    def __post_init__(self):
        if self.alternates_k < 1:
            raise ValueError("alternates_k must be >= 1")
        if self.max_concurrent_requests < 1:
            raise ValueError("max_concurrent_requests must be >= 1")

    def api_key(self) -> str:
        key = os.environ.get(self.api_key_env, "")
        if not key:
            raise GatewayError(
                f"live backend requires an API key; set the {self.api_key_env} "
                "environment variable"
            )
        return key
