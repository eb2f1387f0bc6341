"""Rollout policies: mask -> gate -> largest region -> contact and direction -> attach -> step(s).

Every domain failure ends the rollout with a failed trace instead of raising.
The caller's scene is never mutated; rollouts run on a private copy.
"""
import logging
from typing import Callable, Optional

import numpy as np

from manipkit.core.enums import Action, FailureReason, NormalSource, PolicyKind
from manipkit.core.errors import AttachmentError, ManipKitError, NoProposalError
from manipkit.core.metrics import track_rollout
from manipkit.schemas.trace import PolicyTrace, SimConfig
from manipkit.services.kinematics import attach, step
from manipkit.services.normals import normals_from_depth
from manipkit.services.predictors import Predictor
from manipkit.services.proposer import propose
from manipkit.services.raster import BinaryMask, NormalMap, PixelCoord
from manipkit.services.render import RenderResult, render
from manipkit.services.scene import Scene
from manipkit.services.segmentation import gate, largest_region, score_pair
from manipkit.utils.hashing import pixel_set_hash
from manipkit.utils.rng import choose_index

logger = logging.getLogger(__name__)

FrameSink = Callable[[int, Scene, RenderResult], None]

REAIM_MIN_DISP = 1e-4


class _Abort(Exception):
    def __init__(self, reason: FailureReason, detail: str = ""):
        super().__init__(detail)
        self.reason = reason
        self.detail = detail


def _new_trace(scene: Scene, policy: PolicyKind, cfg: SimConfig, threshold: float) -> PolicyTrace:
    return PolicyTrace(
        scene=scene.name,
        category=scene.category,
        policy=policy,
        seed=cfg.seed,
        threshold=threshold,
        joint_kind=scene.target_part.joint.kind,
    )


def _perceive(
    work: Scene,
    predictor: Predictor,
    cfg: SimConfig,
    trace: PolicyTrace,
    frame_sink: Optional[FrameSink],
) -> tuple[RenderResult, BinaryMask, NormalMap]:
    observation = render(work)
    if frame_sink:
        frame_sink(0, work, observation)
    try:
        predicted = predictor.predict(work, observation, cfg.seed)
    except ManipKitError as e:
        raise _Abort(FailureReason.PREDICTOR_FAILED, e.detail)

    score = score_pair(predicted, observation.mask(work.target))
    trace.fpr_union = score.fpr_union
    if not gate(score, cfg.gate_threshold):
        trace.gated_out = True
        raise _Abort(FailureReason.GATED_OUT, f"fpr_union={score.fpr_union:.4f}")

    mask = largest_region(predicted)
    if mask.is_empty():
        raise _Abort(FailureReason.EMPTY_MASK, "predicted mask is empty")

    if cfg.normal_source == NormalSource.DEPTH:
        normals = normals_from_depth(observation.depth, work.camera.intrinsics)
    else:
        normals = observation.normals
    return observation, mask, normals


def _motion_direction(work: Scene, normal_cam: np.ndarray, action: Action) -> np.ndarray:
    """Pull moves the contact along the camera-facing normal, push against it; result in world frame."""
    sign = 1.0 if action == Action.PULL else -1.0
    return work.camera.direction_to_world(sign * np.asarray(normal_cam, dtype=np.float64))


def _execute(
    work: Scene,
    observation: RenderResult,
    contact: PixelCoord,
    direction: np.ndarray,
    lengths: list[float],
    cfg: SimConfig,
    trace: PolicyTrace,
    adaptive: bool,
    frame_sink: Optional[FrameSink],
) -> None:
    try:
        att = attach(work, contact, observation.depth)
    except AttachmentError as e:
        raise _Abort(FailureReason.ATTACH_FAILED, e.detail)
    trace.attached_part = att.part_id

    target_joint = work.target_part.joint
    q_start = target_joint.q
    reason = None
    for index, length in enumerate(lengths, start=1):
        record = step(work, att, direction, length, cfg.substep, cfg.detach_angle_deg)
        trace.steps.append(record)
        if frame_sink:
            frame_sink(index, work, render(work))
        if record.degenerate:
            reason = FailureReason.DEGENERATE
            break
        if record.detached:
            reason = FailureReason.DETACHED
            break
        if adaptive:
            realized = np.asarray(record.realized_disp)
            norm = float(np.linalg.norm(realized))
            if norm > REAIM_MIN_DISP:
                direction = realized / norm

    trace.total_dq = target_joint.q - q_start
    trace.success = trace.total_dq >= trace.threshold
    if not trace.success:
        trace.failure_reason = reason or FailureReason.BELOW_THRESHOLD


def _rollout(
    scene: Scene,
    predictor: Predictor,
    cfg: SimConfig,
    policy: PolicyKind,
    frame_sink: Optional[FrameSink],
) -> PolicyTrace:
    multi = policy == PolicyKind.MULTISTEP
    threshold = cfg.multi_step_threshold if multi else cfg.one_step_threshold
    lengths = [cfg.multi_step_length] * cfg.multi_step_count if multi else [cfg.one_step_length]
    work = scene.copy()
    trace = _new_trace(work, policy, cfg, threshold)

    try:
        observation, mask, normals = _perceive(work, predictor, cfg, trace, frame_sink)
        if policy == PolicyKind.RANDOM:
            contact, normal = _random_contact(mask, normals, cfg.seed)
        else:
            try:
                proposal = propose(normals, mask, cfg.proposer.model_copy(update={"rng_seed": cfg.seed}))
            except NoProposalError as e:
                raise _Abort(FailureReason.NO_PROPOSAL, e.detail)
            contact, normal = proposal.contact, proposal.direction
            z = observation.depth[contact]
            point = work.camera.intrinsics.backproject(contact.x, contact.y, z) if z > 0 else None
            trace.proposal = proposal.to_out(cfg.seed, point)

        direction = _motion_direction(work, normal, cfg.action)
        _execute(work, observation, contact, direction, lengths, cfg, trace, multi and cfg.adaptive, frame_sink)
    except _Abort as abort:
        trace.failure_reason = abort.reason
        trace.success = False
        logger.warning(f"{policy} on {scene.name} failed: {abort.reason} {abort.detail}".rstrip())
        return trace

    logger.info(
        f"{policy} on {scene.name}: total_dq={trace.total_dq:.4f} "
        f"threshold={threshold} success={trace.success}"
    )
    return trace


def _random_contact(mask: BinaryMask, normals: NormalMap, seed: int) -> tuple[PixelCoord, np.ndarray]:
    flat = np.flatnonzero(mask.data)
    pick = int(flat[choose_index(seed, flat.size, "random_point", pixel_set_hash(flat))])
    contact = PixelCoord(x=pick % mask.width, y=pick // mask.width)
    if not normals.is_valid_at(contact):
        raise _Abort(FailureReason.NO_PROPOSAL, f"no surface normal at ({contact.x}, {contact.y})")
    return contact, normals[contact]


@track_rollout("onestep")
def run_one_step(
    scene: Scene,
    predictor: Predictor,
    cfg: Optional[SimConfig] = None,
    frame_sink: Optional[FrameSink] = None,
) -> PolicyTrace:
    return _rollout(scene, predictor, cfg or SimConfig(), PolicyKind.ONESTEP, frame_sink)


@track_rollout("multistep")
def run_multi_step(
    scene: Scene,
    predictor: Predictor,
    cfg: Optional[SimConfig] = None,
    frame_sink: Optional[FrameSink] = None,
) -> PolicyTrace:
    return _rollout(scene, predictor, cfg or SimConfig(), PolicyKind.MULTISTEP, frame_sink)


@track_rollout("random")
def random_point_policy(
    scene: Scene,
    predictor: Predictor,
    cfg: Optional[SimConfig] = None,
    frame_sink: Optional[FrameSink] = None,
) -> PolicyTrace:
    return _rollout(scene, predictor, cfg or SimConfig(), PolicyKind.RANDOM, frame_sink)


POLICIES: dict[PolicyKind, Callable[..., PolicyTrace]] = {
    PolicyKind.ONESTEP: run_one_step,
    PolicyKind.MULTISTEP: run_multi_step,
    PolicyKind.RANDOM: random_point_policy,
}


def run_policy(
    policy: PolicyKind,
    scene: Scene,
    predictor: Predictor,
    cfg: Optional[SimConfig] = None,
    frame_sink: Optional[FrameSink] = None,
) -> PolicyTrace:
    return POLICIES[PolicyKind(policy)](scene, predictor, cfg, frame_sink)
