"""Quasi-static suction contact: attach to a material point and drag it along the joint's feasible motion.

There are no forces or masses. Each substep projects the commanded direction
onto the unit tangent of the contact's joint trajectory and advances the
joint so the contact moves by that projection, one-sided and clamped to the
joint limits.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from manipkit.core.config import settings
from manipkit.core.enums import JointKind
from manipkit.core.errors import AttachmentError
from manipkit.schemas.camera import CameraIntrinsics
from manipkit.schemas.trace import StepRecord
from manipkit.services.raster import DepthMap, PixelCoord
from manipkit.services.render import cast_pixel
from manipkit.services.scene import Joint, Scene

logger = logging.getLogger(__name__)

MIN_RADIUS = 1e-6


@dataclass
class Attachment:
    part_id: str
    material_point: np.ndarray  # rest pose (q = 0), world frame
    pixel: PixelCoord

    def world_point(self, scene: Scene) -> np.ndarray:
        return scene.part(self.part_id).joint.apply(self.material_point)


def attach(
    scene: Scene,
    contact_px: PixelCoord,
    depth: DepthMap,
    k: Optional[CameraIntrinsics] = None,
) -> Attachment:
    k = k or scene.camera.intrinsics
    if not contact_px.in_bounds(depth.width, depth.height):
        raise AttachmentError(f"Contact pixel ({contact_px.x}, {contact_px.y}) is outside the image")
    z = depth[contact_px]
    if z <= 0:
        raise AttachmentError(f"No valid depth at contact pixel ({contact_px.x}, {contact_px.y})")

    part_id, _ = cast_pixel(scene, contact_px)
    if part_id is None:
        raise AttachmentError(f"Contact pixel ({contact_px.x}, {contact_px.y}) hits no part")
    part = scene.part(part_id)
    if not part.movable:
        raise AttachmentError(f"Contact pixel ({contact_px.x}, {contact_px.y}) is on fixed part '{part_id}'")

    point_world = scene.camera.to_world(k.backproject(contact_px.x, contact_px.y, z))
    logger.debug(f"Attached to '{part_id}' at {np.round(point_world, 4).tolist()}")
    return Attachment(part_id=part_id, material_point=part.joint.invert(point_world), pixel=contact_px)


def tangent(joint: Joint, point: np.ndarray) -> tuple[np.ndarray, float]:
    """Unit direction of the contact's motion for increasing q and the contact speed per unit q."""
    if joint.kind == JointKind.PRISMATIC:
        return joint.axis, 1.0
    r = point - joint.anchor
    r_perp = r - np.dot(r, joint.axis) * joint.axis
    rho = float(np.linalg.norm(r_perp))
    if rho < MIN_RADIUS:
        return np.zeros(3), 0.0
    return np.cross(joint.axis, r_perp) / rho, rho


def _angle_deg(a: np.ndarray, b: np.ndarray) -> float:
    return math.degrees(math.acos(float(np.clip(np.dot(a, b), -1.0, 1.0))))


def step(
    scene: Scene,
    att: Attachment,
    direction: np.ndarray,
    length: float,
    substep: Optional[float] = None,
    detach_angle_deg: Optional[float] = None,
) -> StepRecord:
    if length <= 0:
        raise ValueError(f"Step length must be > 0, got {length}")
    substep = settings.SUBSTEP if substep is None else substep
    direction = np.asarray(direction, dtype=np.float64)
    direction = direction / np.linalg.norm(direction)

    joint = scene.part(att.part_id).joint
    q_start = joint.q
    start = att.world_point(scene)
    n_sub = max(1, math.ceil(length / substep - 1e-9))
    h = length / n_sub
    degenerate = detached = False

    for _ in range(n_sub):
        t_hat, speed = tangent(joint, att.world_point(scene))
        if speed == 0.0:
            degenerate = True
            break
        if detach_angle_deg is not None and _angle_deg(direction, t_hat) > detach_angle_deg:
            detached = True
            break
        s = float(np.dot(direction, t_hat))
        if s <= 0:
            break  # blocked; geometry does not change so later substeps are blocked too
        q_next = joint.clamp(joint.q + s * h / speed)
        if q_next == joint.q:
            break
        joint.q = q_next

    realized = att.world_point(scene) - start
    record = StepRecord(
        commanded_dir=direction.tolist(),
        commanded_len=length,
        realized_disp=realized.tolist(),
        dq=joint.q - q_start,
        q=joint.q,
        degenerate=degenerate,
        detached=detached,
    )
    logger.debug(f"step '{att.part_id}': dq={record.dq:.5f} |disp|={np.linalg.norm(realized):.5f}")
    return record
