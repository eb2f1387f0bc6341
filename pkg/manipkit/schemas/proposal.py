from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from manipkit.core.config import settings
from manipkit.core.enums import FallbackKind


class ProposerConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    filter_value: float = Field(default_factory=lambda: settings.FILTER_VALUE, gt=0)
    blur_sigma: float = Field(default_factory=lambda: settings.BLUR_SIGMA, gt=0)
    blur_radius: int = Field(default_factory=lambda: settings.BLUR_RADIUS, ge=0)
    rng_seed: int = Field(default_factory=lambda: settings.SEED, ge=0, lt=2 ** 64)
    normal_quantization: int = Field(default_factory=lambda: settings.NORMAL_QUANTIZATION, ge=0)
    relaxed_bbox: bool = Field(default_factory=lambda: settings.RELAXED_BBOX)


class ProposalOut(BaseModel):
    contact_px: list[int] = Field(min_length=2, max_length=2)
    direction: list[float] = Field(min_length=3, max_length=3)
    fallback: FallbackKind
    seed: int
    contact_point: Optional[list[float]] = None
