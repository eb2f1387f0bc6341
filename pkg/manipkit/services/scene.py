"""Runtime scene model: boxes, joints, parts and the camera, built from SceneSpec."""
import copy
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from pydantic import ValidationError
from scipy.spatial.transform import Rotation

from manipkit.core.enums import JointKind
from manipkit.core.errors import SceneError
from manipkit.schemas.camera import CameraIntrinsics
from manipkit.schemas.scene import BoxSpec, CameraSpec, JointSpec, PartSpec, SceneSpec

logger = logging.getLogger(__name__)


def _rpy(rpy) -> np.ndarray:
    return Rotation.from_euler("xyz", rpy).as_matrix()


@dataclass
class Box:
    center: np.ndarray
    half_extents: np.ndarray
    rotation: np.ndarray  # box frame -> world

    @classmethod
    def from_spec(cls, spec: BoxSpec) -> "Box":
        return cls(
            center=np.asarray(spec.center, dtype=np.float64),
            half_extents=np.asarray(spec.half_extents, dtype=np.float64),
            rotation=_rpy(spec.rotation_rpy),
        )


@dataclass
class Joint:
    kind: JointKind
    axis: np.ndarray
    anchor: np.ndarray
    limits: tuple[float, float]
    q: float = 0.0

    @classmethod
    def from_spec(cls, spec: JointSpec) -> "Joint":
        axis = np.asarray(spec.axis, dtype=np.float64)
        return cls(
            kind=spec.kind,
            axis=axis / np.linalg.norm(axis),
            anchor=np.asarray(spec.anchor, dtype=np.float64),
            limits=(float(spec.limits[0]), float(spec.limits[1])),
            q=float(spec.q),
        )

    def clamp(self, q: float) -> float:
        return float(min(max(q, self.limits[0]), self.limits[1]))

    def rotation(self, q: Optional[float] = None) -> np.ndarray:
        q = self.q if q is None else q
        if self.kind == JointKind.PRISMATIC:
            return np.eye(3)
        return Rotation.from_rotvec(q * self.axis).as_matrix()

    def apply(self, points: np.ndarray, q: Optional[float] = None) -> np.ndarray:
        """Rest-pose (q = 0) points to their world position at q."""
        q = self.q if q is None else q
        points = np.asarray(points, dtype=np.float64)
        if self.kind == JointKind.PRISMATIC:
            return points + q * self.axis
        return self.anchor + (points - self.anchor) @ self.rotation(q).T

    def invert(self, points: np.ndarray, q: Optional[float] = None) -> np.ndarray:
        q = self.q if q is None else q
        points = np.asarray(points, dtype=np.float64)
        if self.kind == JointKind.PRISMATIC:
            return points - q * self.axis
        return self.anchor + (points - self.anchor) @ self.rotation(q)


@dataclass
class Part:
    id: str
    boxes: list[Box]  # body first, then handles
    joint: Optional[Joint] = None

    @property
    def movable(self) -> bool:
        return self.joint is not None

    def posed_boxes(self) -> list[Box]:
        if self.joint is None:
            return self.boxes
        rot = self.joint.rotation()
        return [
            Box(center=self.joint.apply(b.center), half_extents=b.half_extents, rotation=rot @ b.rotation)
            for b in self.boxes
        ]


@dataclass
class Camera:
    intrinsics: CameraIntrinsics
    width: int
    height: int
    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))  # camera -> world

    @classmethod
    def from_spec(cls, spec: CameraSpec) -> "Camera":
        return cls(
            intrinsics=CameraIntrinsics(fx=spec.fx, fy=spec.fy, cx=spec.cx, cy=spec.cy),
            width=spec.width,
            height=spec.height,
            position=np.asarray(spec.pose.position, dtype=np.float64),
            rotation=_rpy(spec.pose.rotation_rpy),
        )

    def to_world(self, points: np.ndarray) -> np.ndarray:
        return self.position + np.asarray(points, dtype=np.float64) @ self.rotation.T

    def to_camera(self, points: np.ndarray) -> np.ndarray:
        return (np.asarray(points, dtype=np.float64) - self.position) @ self.rotation

    def direction_to_world(self, vector: np.ndarray) -> np.ndarray:
        return self.rotation @ np.asarray(vector, dtype=np.float64)


@dataclass
class Scene:
    name: str
    category: str
    split: str
    target: str
    parts: list[Part]
    camera: Camera

    def part(self, part_id: str) -> Part:
        for p in self.parts:
            if p.id == part_id:
                return p
        raise SceneError(f"Unknown part '{part_id}'", field_path="parts")

    @property
    def target_part(self) -> Part:
        return self.part(self.target)

    def copy(self) -> "Scene":
        return copy.deepcopy(self)


def _part_from_spec(spec: PartSpec) -> Part:
    return Part(
        id=spec.id,
        boxes=[Box.from_spec(spec.box), *(Box.from_spec(h) for h in spec.handles)],
        joint=Joint.from_spec(spec.joint) if spec.joint else None,
    )


def build_scene(spec: SceneSpec, category: Optional[str] = None) -> Scene:
    target = spec.target or next(p.id for p in spec.parts if p.joint is not None)
    scene = Scene(
        name=spec.name,
        category=spec.category or category or "uncategorized",
        split=spec.split,
        target=target,
        parts=[_part_from_spec(p) for p in spec.parts],
        camera=Camera.from_spec(spec.camera),
    )
    # local import: render depends on this module
    from manipkit.services.render import render

    if render(scene).mask(target).is_empty():
        raise SceneError(f"Target part '{target}' is not visible from the camera", field_path="target")
    return scene


def _field_path(loc: tuple) -> str:
    return ".".join(str(p) for p in loc) or "<root>"


def parse_scene(data: bytes, category: Optional[str] = None) -> Scene:
    try:
        spec = SceneSpec.model_validate_json(data)
    except ValidationError as e:
        first = e.errors()[0]
        raise SceneError(first["msg"], field_path=_field_path(first["loc"]))
    return build_scene(spec, category=category)


def load_scene(path: Path, category: Optional[str] = None) -> Scene:
    path = Path(path)
    if not path.is_file():
        raise SceneError(f"Scene file not found: {path}")
    scene = parse_scene(path.read_bytes(), category=category)
    logger.debug(f"Loaded scene {scene.name} ({scene.category}) from {path}")
    return scene
