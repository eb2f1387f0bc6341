from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from manipkit.core.enums import JointKind

Vec3 = tuple[float, float, float]


class BoxSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    center: Vec3
    half_extents: Vec3
    rotation_rpy: Vec3 = (0.0, 0.0, 0.0)

    @field_validator("half_extents")
    @classmethod
    def positive_extents(cls, v: Vec3) -> Vec3:
        if min(v) <= 0:
            raise ValueError("half extents must be > 0")
        return v


class JointSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: JointKind
    axis: Vec3
    anchor: Vec3 = (0.0, 0.0, 0.0)
    limits: tuple[float, float]
    q: float = 0.0

    @field_validator("axis")
    @classmethod
    def nonzero_axis(cls, v: Vec3) -> Vec3:
        if sum(c * c for c in v) < 1e-18:
            raise ValueError("axis must be non-zero")
        return v

    @model_validator(mode="after")
    def q_within_limits(self) -> "JointSpec":
        lo, hi = self.limits
        if lo > hi:
            raise ValueError(f"limits must be ordered, got [{lo}, {hi}]")
        if not lo <= self.q <= hi:
            raise ValueError(f"q={self.q} outside limits [{lo}, {hi}]")
        return self


class PartSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str = Field(min_length=1)
    box: BoxSpec
    joint: Optional[JointSpec] = None
    handles: list[BoxSpec] = []


class PoseSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    position: Vec3 = (0.0, 0.0, 0.0)
    rotation_rpy: Vec3 = (0.0, 0.0, 0.0)


class CameraSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    pose: PoseSpec = PoseSpec()
    fx: float = Field(gt=0)
    fy: float = Field(gt=0)
    cx: float
    cy: float
    width: int = Field(ge=1)
    height: int = Field(ge=1)


class SceneSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = "scene"
    category: Optional[str] = None
    split: str = "test"
    target: Optional[str] = None
    parts: list[PartSpec] = Field(min_length=1)
    camera: CameraSpec

    @model_validator(mode="after")
    def check_parts(self) -> "SceneSpec":
        ids = [p.id for p in self.parts]
        duplicates = sorted({i for i in ids if ids.count(i) > 1})
        if duplicates:
            raise ValueError(f"duplicate part ids: {duplicates}")
        movable = [p.id for p in self.parts if p.joint is not None]
        if not movable:
            raise ValueError("scene needs at least one movable part")
        if self.target is not None and self.target not in movable:
            raise ValueError(f"target '{self.target}' is not a movable part")
        return self
