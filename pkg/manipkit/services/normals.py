"""Normal maps from depth, masked Gaussian smoothing and normal-field gradients."""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.ndimage import binary_dilation, binary_erosion, correlate1d, generate_binary_structure

from manipkit.core.config import settings
from manipkit.core.errors import InvalidRasterError
from manipkit.schemas.camera import CameraIntrinsics
from manipkit.services.raster import DepthMap, NormalMap

logger = logging.getLogger(__name__)

__all__ = [
    "CameraIntrinsics",
    "GradientField",
    "channel_gradients",
    "gaussian_blur",
    "gaussian_kernel1d",
    "gradients",
    "normals_from_depth",
]

_FOUR_NEIGHBORS = generate_binary_structure(2, 1)
_EIGHT_NEIGHBORS = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True, eq=False)
class GradientField:
    dx: np.ndarray  # (H, W, 3) d/dx of each normal channel
    dy: np.ndarray  # (H, W, 3) d/dy of each normal channel
    magnitude: np.ndarray  # (H, W), +inf where the stencil touches an invalid pixel
    invalid_stencil: np.ndarray  # (H, W) bool

    @property
    def width(self) -> int:
        return self.magnitude.shape[1]

    @property
    def height(self) -> int:
        return self.magnitude.shape[0]


def normals_from_depth(depth: DepthMap, intrinsics: CameraIntrinsics) -> NormalMap:
    """Back-project depth and take the cross product of horizontal and vertical point differences.

    Interior pixels use central differences. The image is edge-padded, so pixels on the image
    border stay valid and use a one-sided difference along the axis that leaves the image.
    A pixel is invalid when any of its eight neighbors inside the image has no depth.
    """
    valid_depth = depth.valid
    if not valid_depth.any():
        raise InvalidRasterError("Depth map has no valid pixel")

    rays = intrinsics.rays(depth.width, depth.height)
    points = rays * depth.data[..., None]
    padded = np.pad(points, ((1, 1), (1, 1), (0, 0)), mode="edge")
    horizontal = padded[1:-1, 2:] - padded[1:-1, :-2]
    vertical = padded[2:, 1:-1] - padded[:-2, 1:-1]
    normals = np.cross(horizontal, vertical)

    # face the camera along the viewing ray
    away = np.einsum("hwc,hwc->hw", normals, rays) > 0
    normals[away] *= -1.0

    valid = binary_erosion(valid_depth, structure=_EIGHT_NEIGHBORS, border_value=1)
    result = NormalMap.from_vectors(normals, valid)
    logger.debug(f"normals_from_depth: {int(result.valid.sum())} valid of {depth.width * depth.height}")
    return result


def gaussian_kernel1d(sigma: float, radius: int) -> np.ndarray:
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(offsets ** 2) / (2.0 * sigma * sigma))
    return kernel / kernel.sum()


def _separable(array: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    out = correlate1d(array, kernel, axis=0, mode="nearest")
    return correlate1d(out, kernel, axis=1, mode="nearest")


def gaussian_blur(
    normals: NormalMap,
    sigma: Optional[float] = None,
    radius: Optional[int] = None,
) -> NormalMap:
    """Normalized convolution: invalid pixels carry no weight and stay invalid."""
    sigma = settings.BLUR_SIGMA if sigma is None else sigma
    radius = settings.BLUR_RADIUS if radius is None else radius
    kernel = gaussian_kernel1d(sigma, radius)

    valid = normals.valid
    weights = _separable(valid.astype(np.float64), kernel)
    summed = np.stack(
        [_separable(np.where(valid, normals.data[..., c], 0.0), kernel) for c in range(3)],
        axis=-1,
    )

    out = np.zeros_like(normals.data)
    keep = valid & (weights > 0)
    out[keep] = summed[keep] / weights[keep][:, None]
    norms = np.linalg.norm(out, axis=2)
    cancelled = keep & (norms < 1e-12)
    out[cancelled] = normals.data[cancelled]
    norms[cancelled] = 1.0
    out[keep] /= norms[keep][:, None]
    return NormalMap(out)


def channel_gradients(array: np.ndarray, valid: Optional[np.ndarray] = None) -> GradientField:
    """Central differences per channel, one-sided at the borders."""
    array = np.asarray(array, dtype=np.float64)
    height, width = array.shape[:2]
    dx = np.gradient(array, axis=1) if width > 1 else np.zeros_like(array)
    dy = np.gradient(array, axis=0) if height > 1 else np.zeros_like(array)
    magnitude = np.sqrt(np.sum(dx ** 2 + dy ** 2, axis=2))

    if valid is None:
        invalid_stencil = np.zeros((height, width), dtype=bool)
    else:
        invalid_stencil = binary_dilation(~np.asarray(valid, dtype=bool), structure=_FOUR_NEIGHBORS)
    magnitude[invalid_stencil] = np.inf
    return GradientField(dx=dx, dy=dy, magnitude=magnitude, invalid_stencil=invalid_stencil)


def gradients(normals: NormalMap) -> GradientField:
    return channel_gradients(normals.data, normals.valid)
