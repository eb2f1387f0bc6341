from typing import Optional

from pydantic import BaseModel

from manipkit.core.enums import FailureReason, PolicyKind


class TrialOutcome(BaseModel):
    scene: str
    category: str
    split: str
    policy: PolicyKind
    trial: int
    seed: int
    success: bool
    total_dq: float
    failure_reason: Optional[FailureReason] = None


class RateRow(BaseModel):
    group: str
    trials: int
    successes: int
    rate: float


class PolicySummary(BaseModel):
    policy: PolicyKind
    categories: list[RateRow]
    splits: list[RateRow]
    avg: Optional[float] = None  # mean of the non-empty category rates


class BenchmarkReport(BaseModel):
    suite: str
    seed: int
    trials: int
    predictor: str
    categories: list[str]
    empty_categories: list[str] = []
    policies: list[PolicySummary]
    outcomes: list[TrialOutcome] = []
