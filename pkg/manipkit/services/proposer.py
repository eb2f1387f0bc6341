"""Contact point and manipulation direction from a normal map and a part mask.

Cascade: blur the normal map, threshold its gradient magnitude into an edge
mask, keep the flat part pixels (N_masked), then take the mask centroid if
its flat normal is valid, otherwise the most frequent flat normal with a
contact sampled near the centroid or anywhere on the flat part.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from manipkit.core.enums import FallbackKind
from manipkit.core.errors import EmptyMaskError, NoProposalError, check_same_shape
from manipkit.core.metrics import proposal_failures_total, proposals_total
from manipkit.schemas.proposal import ProposalOut, ProposerConfig
from manipkit.services.normals import GradientField, gaussian_blur, gradients
from manipkit.services.raster import BinaryMask, NormalMap, PixelCoord
from manipkit.utils.hashing import pixel_set_hash
from manipkit.utils.rng import choose_index

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class AffordanceProposal:
    contact: PixelCoord
    direction: np.ndarray  # unit 3-vector, camera frame
    used_fallback: FallbackKind
    masked_normals: NormalMap

    def to_out(self, seed: int, point: Optional[np.ndarray] = None) -> ProposalOut:
        return ProposalOut(
            contact_px=self.contact.as_list(),
            direction=[float(c) for c in self.direction],
            fallback=self.used_fallback,
            seed=seed,
            contact_point=None if point is None else [float(c) for c in point],
        )


def edge_mask(field: GradientField, cfg: ProposerConfig) -> BinaryMask:
    return BinaryMask((field.magnitude > cfg.filter_value) | field.invalid_stencil)


def masked_normals(normals: NormalMap, m_edge: BinaryMask, m_part: BinaryMask) -> NormalMap:
    check_same_shape(normals.shape, m_edge.shape, m_part.shape, what="normal map and masks")
    keep = ~m_edge.data & m_part.data
    return NormalMap(np.where(keep[..., None], normals.data, 0.0))


def _round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def centroid(mask: BinaryMask) -> PixelCoord:
    ys, xs = np.nonzero(mask.data)
    if xs.size == 0:
        raise EmptyMaskError("Centroid of an empty mask is undefined")
    return PixelCoord(x=_round_half_up(xs.mean()), y=_round_half_up(ys.mean()))


def dominant_normal(n_masked: NormalMap, decimals: int) -> np.ndarray:
    """Most frequent valid normal after quantization; ties go to the class seen first in row-major order."""
    vectors = n_masked.data[n_masked.valid]
    if vectors.shape[0] == 0:
        raise NoProposalError("No valid flat normal inside the part mask")
    quantized = np.round(vectors, decimals) + 0.0  # folds -0.0 into 0.0
    _, first_index, counts = np.unique(quantized, axis=0, return_index=True, return_counts=True)
    best = np.lexsort((first_index, -counts))[0]
    return vectors[first_index[best]]


def centered_box(center: PixelCoord, m_part: BinaryMask) -> tuple[int, int, int, int]:
    """Box B around the centroid with one third of the mask's bounding-box size, clipped to the image."""
    ys, xs = np.nonzero(m_part.data)
    box_w = math.ceil((int(xs.max()) - int(xs.min()) + 1) / 3)
    box_h = math.ceil((int(ys.max()) - int(ys.min()) + 1) / 3)
    x0 = center.x - box_w // 2
    y0 = center.y - box_h // 2
    x1 = x0 + box_w - 1
    y1 = y0 + box_h - 1
    return (
        max(x0, 0),
        max(y0, 0),
        min(x1, m_part.width - 1),
        min(y1, m_part.height - 1),
    )


def _sample_pixel(candidates: np.ndarray, width: int, seed: int, path: FallbackKind) -> PixelCoord:
    """Uniform draw from a boolean candidate mask, keyed by seed and the candidate set."""
    flat = np.flatnonzero(candidates)
    pick = flat[choose_index(seed, flat.size, str(path), pixel_set_hash(flat))]
    return PixelCoord(x=int(pick % width), y=int(pick // width))


def propose(n_map: NormalMap, m_part: BinaryMask, cfg: Optional[ProposerConfig] = None) -> AffordanceProposal:
    cfg = cfg or ProposerConfig()
    check_same_shape(n_map.shape, m_part.shape, what="normal map and part mask")
    if m_part.is_empty():
        raise EmptyMaskError("Part mask is empty")

    blurred = gaussian_blur(n_map, cfg.blur_sigma, cfg.blur_radius)
    m_edge = edge_mask(gradients(blurred), cfg)
    n_masked = masked_normals(n_map, m_edge, m_part)
    c = centroid(m_part)

    if n_masked.is_valid_at(c):
        proposal = AffordanceProposal(
            contact=c,
            direction=_unit(n_masked[c]),
            used_fallback=FallbackKind.CENTROID,
            masked_normals=n_masked,
        )
        return _record(proposal)

    try:
        direction = _unit(dominant_normal(n_masked, cfg.normal_quantization))
    except NoProposalError:
        proposal_failures_total.inc()
        logger.warning("No flat normal left in the part mask after edge filtering")
        raise

    flat = n_masked.valid
    x0, y0, x1, y1 = centered_box(c, m_part)
    in_box = np.zeros_like(flat)
    in_box[y0:y1 + 1, x0:x1 + 1] = True
    box_valid = flat & in_box

    if cfg.relaxed_bbox:
        use_box = bool(box_valid.any())
    else:
        use_box = bool(np.all(flat[in_box]))

    if use_box:
        contact = _sample_pixel(box_valid, m_part.width, cfg.rng_seed, FallbackKind.BBOX_RANDOM)
        fallback = FallbackKind.BBOX_RANDOM
    else:
        contact = _sample_pixel(flat & m_part.data, m_part.width, cfg.rng_seed, FallbackKind.MASK_RANDOM)
        fallback = FallbackKind.MASK_RANDOM

    return _record(
        AffordanceProposal(contact=contact, direction=direction, used_fallback=fallback, masked_normals=n_masked)
    )


def _unit(vector: np.ndarray) -> np.ndarray:
    vector = np.asarray(vector, dtype=np.float64)
    return vector / np.linalg.norm(vector)


def _record(proposal: AffordanceProposal) -> AffordanceProposal:
    proposals_total.labels(fallback=str(proposal.used_fallback)).inc()
    logger.info(
        f"Proposal via {proposal.used_fallback}: contact=({proposal.contact.x}, {proposal.contact.y}) "
        f"direction={np.round(proposal.direction, 4).tolist()}"
    )
    return proposal
