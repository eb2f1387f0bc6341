from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from manipkit.core.errors import RasterIOError, check_file_exists


class CameraIntrinsics(BaseModel):
    model_config = ConfigDict(frozen=True)

    fx: float = Field(gt=0)
    fy: float = Field(gt=0)
    cx: float
    cy: float

    def rays(self, width: int, height: int) -> np.ndarray:
        """Per-pixel viewing rays (H, W, 3) with unit z component."""
        v, u = np.mgrid[0:height, 0:width].astype(np.float64)
        return np.stack([(u - self.cx) / self.fx, (v - self.cy) / self.fy, np.ones_like(u)], axis=-1)

    def backproject(self, u: float, v: float, z: float) -> np.ndarray:
        return np.array([(u - self.cx) / self.fx * z, (v - self.cy) / self.fy * z, z], dtype=np.float64)

    def project(self, point: np.ndarray) -> tuple[float, float]:
        x, y, z = (float(c) for c in point)
        return self.fx * x / z + self.cx, self.fy * y / z + self.cy

    @classmethod
    def from_json(cls, path: Path) -> "CameraIntrinsics":
        check_file_exists(Path(path), "Intrinsics file")
        try:
            return cls.model_validate_json(Path(path).read_bytes())
        except ValidationError as e:
            raise RasterIOError(f"Invalid intrinsics file {path}: {e}")
