from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from manipkit.core.enums import PredictorKind


class PredictorSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: PredictorKind = PredictorKind.ORACLE
    dilate: int = Field(default=0, ge=0)  # radius in pixels
    erode: int = Field(default=0, ge=0)
    flip_prob: float = Field(default=0.0, ge=0, le=1)
    seed: int = Field(default=0, ge=0)
    mask_dir: Optional[Path] = None

    @model_validator(mode="after")
    def check_mask_dir(self) -> "PredictorSpec":
        if self.kind == PredictorKind.FILE:
            if self.mask_dir is None:
                raise ValueError("file predictor needs mask_dir")
            if not self.mask_dir.is_dir():
                raise ValueError(f"mask_dir does not exist: {self.mask_dir}")
        return self
