"""Debug overlay: contact crosshair and direction arrow drawn over a normal-map preview."""
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image, ImageDraw

from manipkit.schemas.camera import CameraIntrinsics
from manipkit.services.raster import BinaryMask, NormalMap, PixelCoord, encode_normal_pixels

ARROW_PX = 15.0
ARROW_LENGTH = 0.05  # scene units, used when the 3D contact is known
CONTACT_COLOR = (255, 0, 0)
ARROW_COLOR = (255, 255, 0)


def _arrow_tip(
    contact: PixelCoord,
    direction: np.ndarray,
    point: Optional[np.ndarray],
    intrinsics: Optional[CameraIntrinsics],
) -> Optional[tuple[float, float]]:
    if point is not None and intrinsics is not None:
        tip = np.asarray(point) + ARROW_LENGTH * np.asarray(direction)
        if tip[2] > 1e-9:
            return intrinsics.project(tip)
    planar = np.asarray(direction[:2], dtype=np.float64)
    norm = float(np.linalg.norm(planar))
    if norm < 1e-6:
        return None  # direction along the optical axis
    return contact.x + ARROW_PX * planar[0] / norm, contact.y + ARROW_PX * planar[1] / norm


def draw_overlay(
    normals: NormalMap,
    contact: PixelCoord,
    direction: np.ndarray,
    mask: Optional[BinaryMask] = None,
    point: Optional[np.ndarray] = None,
    intrinsics: Optional[CameraIntrinsics] = None,
) -> Image.Image:
    base = encode_normal_pixels(normals)
    if mask is not None:
        base = np.where(mask.data[..., None], base, base // 3).astype(np.uint8)
    img = Image.fromarray(base)
    draw = ImageDraw.Draw(img)

    r = max(2, min(img.width, img.height) // 20)
    x, y = contact.x, contact.y
    draw.line([(x - r, y), (x + r, y)], fill=CONTACT_COLOR)
    draw.line([(x, y - r), (x, y + r)], fill=CONTACT_COLOR)

    tip = _arrow_tip(contact, direction, point, intrinsics)
    if tip is None:
        draw.ellipse([x - r, y - r, x + r, y + r], outline=ARROW_COLOR)
    else:
        draw.line([(x, y), tip], fill=ARROW_COLOR)
        draw.ellipse([tip[0] - 1, tip[1] - 1, tip[0] + 1, tip[1] + 1], fill=ARROW_COLOR)
    return img


def save_overlay(img: Image.Image, path: Path) -> None:
    img.save(Path(path), format="PNG")
