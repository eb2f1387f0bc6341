"""Mask predictors standing in for a learned affordance segmenter."""
import logging
from pathlib import Path
from typing import Callable, Protocol

import numpy as np
from scipy.ndimage import binary_dilation, binary_erosion

from manipkit.core.enums import PredictorKind
from manipkit.core.errors import PredictorError, RasterIOError, check_same_shape
from manipkit.schemas.predictor import PredictorSpec
from manipkit.services.raster import BinaryMask, load_mask
from manipkit.services.render import RenderResult
from manipkit.services.scene import Scene
from manipkit.utils.rng import make_rng

logger = logging.getLogger(__name__)


class Predictor(Protocol):
    kind: PredictorKind

    def predict(self, scene: Scene, observation: RenderResult, seed: int) -> BinaryMask:
        ...


class OraclePredictor:
    kind = PredictorKind.ORACLE

    def predict(self, scene: Scene, observation: RenderResult, seed: int) -> BinaryMask:
        return observation.mask(scene.target)


def _disk(radius: int) -> np.ndarray:
    yy, xx = np.mgrid[-radius:radius + 1, -radius:radius + 1]
    return xx * xx + yy * yy <= radius * radius


class NoisyOraclePredictor:
    """Ground truth grown by ``dilate``, shrunk by ``erode``, then per-pixel Bernoulli flips."""

    kind = PredictorKind.NOISY_ORACLE

    def __init__(self, dilate: int = 0, erode: int = 0, flip_prob: float = 0.0, seed: int = 0):
        self.dilate = dilate
        self.erode = erode
        self.flip_prob = flip_prob
        self.seed = seed

    def predict(self, scene: Scene, observation: RenderResult, seed: int) -> BinaryMask:
        mask = observation.mask(scene.target).data
        if self.dilate:
            mask = binary_dilation(mask, structure=_disk(self.dilate))
        if self.erode:
            mask = binary_erosion(mask, structure=_disk(self.erode), border_value=1)
        if self.flip_prob > 0:
            rng = make_rng(seed, "noisy_oracle", self.seed, scene.name)
            mask = mask ^ (rng.random(mask.shape) < self.flip_prob)
        return BinaryMask(mask)


class FilePredictor:
    """Masks written by an external model as ``<mask_dir>/<scene name>.png``."""

    kind = PredictorKind.FILE

    def __init__(self, mask_dir: Path):
        self.mask_dir = Path(mask_dir)

    def predict(self, scene: Scene, observation: RenderResult, seed: int) -> BinaryMask:
        path = self.mask_dir / f"{scene.name}.png"
        try:
            mask = load_mask(path)
        except RasterIOError as e:
            raise PredictorError(f"No usable mask for scene '{scene.name}': {e.detail}")
        check_same_shape(mask.shape, observation.depth.shape, what=f"mask {path.name} and render")
        return mask


_REGISTRY: dict[PredictorKind, Callable[[PredictorSpec], Predictor]] = {
    PredictorKind.ORACLE: lambda spec: OraclePredictor(),
    PredictorKind.NOISY_ORACLE: lambda spec: NoisyOraclePredictor(
        dilate=spec.dilate, erode=spec.erode, flip_prob=spec.flip_prob, seed=spec.seed
    ),
    PredictorKind.FILE: lambda spec: FilePredictor(spec.mask_dir),
}


def build_predictor(spec: PredictorSpec) -> Predictor:
    predictor = _REGISTRY[spec.kind](spec)
    logger.debug(f"Built predictor {spec.kind}")
    return predictor
