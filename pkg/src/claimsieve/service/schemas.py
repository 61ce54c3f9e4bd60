"""Pydantic request/response models for the annotation API."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class SiblingClaim(BaseModel):
    position: int
    text: str
    labeled: bool


class TaskResponse(BaseModel):
    example_id: str
    subclaim_id: str
    claim: str
    input: str
    original_output: str
    position: int
    total_claims: int
    current_label: Optional[str] = None
    siblings: list[SiblingClaim] = Field(default_factory=list)


class LabelRequest(BaseModel):
    subclaim_id: str
    raw_label: str


class ExampleProgress(BaseModel):
    example_id: str
    labeled: int
    total: int


class ProgressResponse(BaseModel):
    labeled: int
    total: int
    examples: list[ExampleProgress]


class LabelResponse(BaseModel):
    subclaim_id: str
    raw_label: str
    progress: ProgressResponse


class CalibrateRequest(BaseModel):
    scorer: str = "oracle"
    alpha: float
    a: float = 1.0
    seed: int = 0


class CalibrateResponse(BaseModel):
    q_hat: float | str  # -inf/+inf serialize as strings
    alpha: float
    a: float
    n: int
    scorer: str
    seed: int
    created_at: str
    min_alpha: float
