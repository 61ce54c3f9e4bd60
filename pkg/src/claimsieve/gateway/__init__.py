"""Language-model gateway: config, prompt templates, backends, and the facade."""

from .backends import (
    Backend,
    CompletionRequest,
    LiveBackend,
    MockBackend,
    ReplayBackend,
    TranscriptWriter,
    load_transcripts,
)
from .client import Gateway
from .config import GatewayConfig
from .prompts import PromptTemplates, render

__all__ = [
    "Backend",
    "CompletionRequest",
    "Gateway",
    "GatewayConfig",
    "LiveBackend",
    "MockBackend",
    "PromptTemplates",
    "ReplayBackend",
    "TranscriptWriter",
    "load_transcripts",
    "render",
]
