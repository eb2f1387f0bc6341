"""2D grid types and bit-exact file I/O for masks, depth and normal maps.

Pixel convention: row-major, origin top-left, x = column, y = row. Arrays are
indexed ``data[y, x]``.
"""
import io
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import orjson
from PIL import Image, UnidentifiedImageError

from manipkit.core.config import settings
from manipkit.core.errors import (
    DimensionMismatchError,
    InvalidRasterError,
    RasterIOError,
    check_file_exists,
)

logger = logging.getLogger(__name__)

UNIT_TOLERANCE = 1e-4
DEFAULT_DEPTH_SCALE = 1e-4  # scene units per 16-bit tick
MASK_MODES = {"1", "L", "LA", "P", "RGB", "RGBA"}


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


def _check_dims(height: int, width: int, what: str) -> None:
    if height < 1 or width < 1:
        raise InvalidRasterError(f"{what} must be at least 1x1, got {width}x{height}")


@dataclass(frozen=True)
class PixelCoord:
    x: int
    y: int

    def in_bounds(self, width: int, height: int) -> bool:
        return 0 <= self.x < width and 0 <= self.y < height

    def as_list(self) -> list[int]:
        return [int(self.x), int(self.y)]


@dataclass(frozen=True, eq=False)
class BinaryMask:
    data: np.ndarray  # (H, W) bool, True = manipulable

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2:
            raise InvalidRasterError(f"BinaryMask needs a 2D array, got shape {data.shape}")
        _check_dims(*data.shape, "BinaryMask")
        object.__setattr__(self, "data", _frozen(data.astype(bool)))

    @classmethod
    def empty(cls, width: int, height: int) -> "BinaryMask":
        return cls(np.zeros((height, width), dtype=bool))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def count(self) -> int:
        return int(self.data.sum())

    def is_empty(self) -> bool:
        return not self.data.any()

    def __getitem__(self, p: PixelCoord) -> bool:
        return bool(self.data[p.y, p.x])

    def __eq__(self, other):
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return np.array_equal(self.data, other.data)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class DepthMap:
    data: np.ndarray  # (H, W) float, scene units; 0 = invalid

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise InvalidRasterError(f"DepthMap needs a 2D array, got shape {data.shape}")
        _check_dims(*data.shape, "DepthMap")
        if not np.all(np.isfinite(data)):
            raise InvalidRasterError("DepthMap values must be finite")
        if np.any(data < 0):
            raise InvalidRasterError("DepthMap values must be >= 0")
        object.__setattr__(self, "data", _frozen(data))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def valid(self) -> np.ndarray:
        return self.data > 0

    def __getitem__(self, p: PixelCoord) -> float:
        return float(self.data[p.y, p.x])


@dataclass(frozen=True, eq=False)
class NormalMap:
    data: np.ndarray  # (H, W, 3) float; (0, 0, 0) = invalid

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 3 or data.shape[2] != 3:
            raise InvalidRasterError(f"NormalMap needs an (H, W, 3) array, got shape {data.shape}")
        _check_dims(*data.shape[:2], "NormalMap")
        if not np.all(np.isfinite(data)):
            raise InvalidRasterError("NormalMap values must be finite")
        valid = np.any(data != 0.0, axis=2)
        norms = np.linalg.norm(data[valid], axis=1)
        if norms.size and np.any(np.abs(norms - 1.0) > UNIT_TOLERANCE):
            worst = float(np.max(np.abs(norms - 1.0)))
            raise InvalidRasterError(f"NormalMap has non-unit valid pixels (max |n|-1 = {worst:.3g})")
        object.__setattr__(self, "data", _frozen(data))

    @classmethod
    def from_vectors(cls, vectors: np.ndarray, valid: np.ndarray) -> "NormalMap":
        """Normalize raw vectors and write the invalid sentinel outside ``valid``."""
        vectors = np.asarray(vectors, dtype=np.float64)
        valid = np.asarray(valid, dtype=bool)
        norms = np.linalg.norm(vectors, axis=2, keepdims=True)
        valid = valid & (norms[..., 0] > 1e-12)
        out = np.zeros_like(vectors)
        out[valid] = vectors[valid] / norms[valid]
        return cls(out)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape[:2]

    @property
    def valid(self) -> np.ndarray:
        return np.any(self.data != 0.0, axis=2)

    def __getitem__(self, p: PixelCoord) -> np.ndarray:
        return self.data[p.y, p.x]

    def is_valid_at(self, p: PixelCoord) -> bool:
        return p.in_bounds(self.width, self.height) and bool(np.any(self.data[p.y, p.x] != 0.0))

    def __eq__(self, other):
        if not isinstance(other, NormalMap):
            return NotImplemented
        return np.array_equal(self.data, other.data)

    __hash__ = None


def _open_image(path: Path) -> Image.Image:
    check_file_exists(path, "Image file")
    try:
        img = Image.open(path)
        img.load()
    except (UnidentifiedImageError, OSError) as e:
        raise RasterIOError(f"Cannot read image {path}: {e}")
    if img.width < 1 or img.height < 1:
        raise RasterIOError(f"Image {path} has zero dimension")
    return img


def load_mask(path: Path, threshold: Optional[int] = None) -> BinaryMask:
    threshold = settings.MASK_THRESHOLD if threshold is None else threshold
    img = _open_image(Path(path))
    if img.mode not in MASK_MODES:
        raise RasterIOError(f"Unsupported bit depth for mask {path}: mode {img.mode}")
    luminance = np.asarray(img.convert("L"), dtype=np.uint8)
    return BinaryMask(luminance > threshold)


def save_mask(mask: BinaryMask, path: Path) -> None:
    pixels = np.where(mask.data, 255, 0).astype(np.uint8)
    Image.fromarray(pixels).save(Path(path), format="PNG")


def depth_sidecar_path(path: Path) -> Path:
    return Path(path).with_suffix(".json")


def save_depth(depth: DepthMap, path: Path, depth_scale: float = DEFAULT_DEPTH_SCALE) -> None:
    if depth_scale <= 0:
        raise ValueError("depth_scale must be > 0")
    ticks = np.rint(depth.data / depth_scale)
    valid = depth.valid
    ticks[valid] = np.maximum(ticks[valid], 1)  # keep valid pixels off the 0 sentinel
    if np.any(ticks > np.iinfo(np.uint16).max):
        raise RasterIOError(
            f"Depth exceeds 16-bit range at scale {depth_scale}; max depth {depth.data.max():.4f}"
        )
    Image.fromarray(ticks.astype(np.uint16)).save(Path(path), format="PNG")
    sidecar = {"depth_scale": depth_scale, "width": depth.width, "height": depth.height}
    depth_sidecar_path(path).write_bytes(orjson.dumps(sidecar, option=orjson.OPT_SORT_KEYS))


def load_depth(path: Path) -> DepthMap:
    path = Path(path)
    sidecar_path = depth_sidecar_path(path)
    check_file_exists(sidecar_path, "Depth sidecar")
    try:
        sidecar = orjson.loads(sidecar_path.read_bytes())
        depth_scale = float(sidecar["depth_scale"])
        width, height = int(sidecar["width"]), int(sidecar["height"])
    except (orjson.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise RasterIOError(f"Malformed depth sidecar {sidecar_path}: {e}")
    img = _open_image(path)
    if img.mode not in {"I;16", "I;16L", "I;16B", "I", "L"}:
        raise RasterIOError(f"Unsupported bit depth for depth {path}: mode {img.mode}")
    ticks = np.asarray(img).astype(np.int64)
    if ticks.shape != (height, width):
        raise DimensionMismatchError(
            f"Depth image {path} is {ticks.shape[1]}x{ticks.shape[0]}, sidecar says {width}x{height}"
        )
    return DepthMap(ticks * depth_scale)


def encode_normal_pixels(normals: NormalMap) -> np.ndarray:
    valid = normals.valid
    codes = np.floor((normals.data + 1.0) * 127.5 + 0.5)  # half-up rounding
    codes = np.clip(codes, 0, 255).astype(np.uint8)
    codes[~valid] = 0
    return codes


def decode_normal_pixels(codes: np.ndarray) -> NormalMap:
    codes = np.asarray(codes)
    if codes.ndim != 3 or codes.shape[2] != 3:
        raise RasterIOError(f"Normal image must be RGB, got array shape {codes.shape}")
    valid = np.any(codes != 0, axis=2)
    vectors = codes.astype(np.float64) / 127.5 - 1.0
    norms = np.linalg.norm(vectors, axis=2)
    if np.any(norms[valid] < 0.5):
        raise RasterIOError("Corrupt normal map: decoded vector shorter than 0.5")
    return NormalMap.from_vectors(vectors, valid)


def encode_normal_map(normals: NormalMap) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(encode_normal_pixels(normals)).save(buf, format="PNG")
    return buf.getvalue()


def decode_normal_map(data: bytes) -> NormalMap:
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
    except (UnidentifiedImageError, OSError) as e:
        raise RasterIOError(f"Cannot decode normal map: {e}")
    if img.mode != "RGB":
        raise RasterIOError(f"Unsupported normal map mode {img.mode}, expected RGB")
    return decode_normal_pixels(np.asarray(img))


def save_normal_map(normals: NormalMap, path: Path) -> None:
    Path(path).write_bytes(encode_normal_map(normals))


def load_normal_map(path: Path) -> NormalMap:
    check_file_exists(Path(path), "Normal map")
    return decode_normal_map(Path(path).read_bytes())


def depth_preview(depth: DepthMap) -> np.ndarray:
    """8-bit view of a depth map, near = bright, invalid = black."""
    valid = depth.valid
    out = np.zeros(depth.shape, dtype=np.uint8)
    if not valid.any():
        return out
    near, far = depth.data[valid].min(), depth.data[valid].max()
    span = max(far - near, 1e-12)
    out[valid] = np.rint(255 - 200 * (depth.data[valid] - near) / span).astype(np.uint8)
    return out


def save_depth_preview(depth: DepthMap, path: Path) -> None:
    Image.fromarray(depth_preview(depth)).save(Path(path), format="PNG")
