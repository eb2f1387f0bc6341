from typing import Optional

from pydantic import BaseModel, Field


class MaskPairScore(BaseModel):
    iou: float = Field(ge=0, le=1)
    f1: float = Field(ge=0, le=1)
    fpr_union: float = Field(ge=0, le=1)
    tp: int = Field(ge=0)
    fp: int = Field(ge=0)
    fn: int = Field(ge=0)
    tn: int = Field(ge=0)


class PairRow(BaseModel):
    name: str
    category: str
    score: MaskPairScore


class CategoryMetrics(BaseModel):
    category: str
    count: int
    iou_mean: float
    f1_mean: float
    fpr_union_mean: float
    miou: float  # percent, 1 decimal
    f1: float  # percent, 1 decimal


class MetricsReport(BaseModel):
    method: str = "manipkit"
    categories: list[CategoryMetrics]
    overall: CategoryMetrics
    pairs: list[PairRow] = []
    missing: list[str] = []
    seed: Optional[int] = None
