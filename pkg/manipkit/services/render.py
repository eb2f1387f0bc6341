"""Ray-cast rendering of box scenes into depth, normals and per-part masks (slab method)."""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from manipkit.core.errors import SceneError
from manipkit.core.metrics import renders_total
from manipkit.services.raster import BinaryMask, DepthMap, NormalMap, PixelCoord
from manipkit.services.scene import Scene

logger = logging.getLogger(__name__)

_TINY = 1e-12


@dataclass(frozen=True, eq=False)
class RenderResult:
    depth: DepthMap
    normals: NormalMap
    part_index: np.ndarray  # (H, W) int, -1 = background
    face_index: np.ndarray  # (H, W) int, -1 = background
    part_ids: tuple[str, ...]

    def mask(self, part_id: str) -> BinaryMask:
        if part_id not in self.part_ids:
            raise SceneError(f"Unknown part '{part_id}'", field_path="parts")
        return BinaryMask(self.part_index == self.part_ids.index(part_id))


def _intersect_box(rays: np.ndarray, center: np.ndarray, half: np.ndarray, rotation: np.ndarray):
    """Entry distance, entry axis and outward-normal sign per ray; inf where the ray misses.

    Rays start at the camera origin and have unit z, so the distance is the depth.
    """
    origin = -center @ rotation  # camera origin in box frame
    d = rays @ rotation
    d = np.where(np.abs(d) < _TINY, _TINY, d)
    t1 = (-half - origin) / d
    t2 = (half - origin) / d
    t_near = np.minimum(t1, t2)
    t_far = np.maximum(t1, t2)
    t_enter = t_near.max(axis=-1)
    t_exit = t_far.min(axis=-1)
    hit = (t_exit >= t_enter) & (t_enter > 0)
    axis = t_near.argmax(axis=-1)
    d_axis = np.take_along_axis(d, axis[..., None], axis=-1)[..., 0]
    sign = np.where(d_axis > 0, -1.0, 1.0)
    return np.where(hit, t_enter, np.inf), axis, sign


def cast(scene: Scene, rays: np.ndarray):
    """Nearest hit per ray: (depth, normals in camera frame, part index, face index)."""
    shape = rays.shape[:-1]
    depth = np.full(shape, np.inf)
    normals = np.zeros(shape + (3,))
    part_index = np.full(shape, -1, dtype=np.int64)
    face_index = np.full(shape, -1, dtype=np.int64)

    cam = scene.camera
    box_counter = 0
    for pi, part in enumerate(scene.parts):
        for box in part.posed_boxes():
            center_c = cam.to_camera(box.center)
            rot_c = cam.rotation.T @ box.rotation  # box frame -> camera
            t, axis, sign = _intersect_box(rays, center_c, box.half_extents, rot_c)
            closer = t < depth
            if closer.any():
                local = np.zeros(shape + (3,))
                np.put_along_axis(local, axis[..., None], sign[..., None], axis=-1)
                depth[closer] = t[closer]
                normals[closer] = (local @ rot_c.T)[closer]
                part_index[closer] = pi
                face_index[closer] = (box_counter * 6 + axis * 2 + (sign > 0))[closer]
            box_counter += 1

    depth[~np.isfinite(depth)] = 0.0
    return depth, normals, part_index, face_index


def render(scene: Scene) -> RenderResult:
    cam = scene.camera
    rays = cam.intrinsics.rays(cam.width, cam.height)
    depth, normals, part_index, face_index = cast(scene, rays)
    renders_total.inc()
    logger.debug(f"Rendered {scene.name}: {int((part_index >= 0).sum())} hit pixels")
    return RenderResult(
        depth=DepthMap(depth),
        normals=NormalMap(normals),
        part_index=part_index,
        face_index=face_index,
        part_ids=tuple(p.id for p in scene.parts),
    )


def cast_pixel(scene: Scene, p: PixelCoord) -> tuple[Optional[str], float]:
    """Part id and depth seen through the centre of one pixel."""
    k = scene.camera.intrinsics
    ray = np.array([[(p.x - k.cx) / k.fx, (p.y - k.cy) / k.fy, 1.0]])
    depth, _, part_index, _ = cast(scene, ray)
    idx = int(part_index[0])
    return (None if idx < 0 else scene.parts[idx].id), float(depth[0])
