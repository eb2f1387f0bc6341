from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from manipkit.core.config import settings
from manipkit.core.enums import Action, FailureReason, JointKind, NormalSource, PolicyKind
from manipkit.schemas.proposal import ProposalOut, ProposerConfig

ONE_STEP_THRESHOLD = 0.1
MULTI_STEP_THRESHOLD = 0.3


class SimConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: int = Field(default_factory=lambda: settings.SEED, ge=0, lt=2 ** 64)
    substep: float = Field(default_factory=lambda: settings.SUBSTEP, gt=0)
    one_step_length: float = Field(default_factory=lambda: settings.ONE_STEP_LENGTH, gt=0)
    one_step_threshold: float = Field(default=ONE_STEP_THRESHOLD, gt=0)
    multi_step_count: int = Field(default_factory=lambda: settings.MULTI_STEP_COUNT, ge=1)
    multi_step_length: float = Field(default_factory=lambda: settings.MULTI_STEP_LENGTH, gt=0)
    multi_step_threshold: float = Field(default=MULTI_STEP_THRESHOLD, gt=0)
    gate_threshold: float = Field(default_factory=lambda: settings.GATE_THRESHOLD, ge=0, le=1)
    adaptive: bool = True
    action: Action = Action.PULL
    normal_source: NormalSource = NormalSource.RENDERED
    detach_angle_deg: Optional[float] = Field(default=None, gt=0, le=180)
    proposer: ProposerConfig = Field(default_factory=ProposerConfig)


class StepRecord(BaseModel):
    commanded_dir: list[float] = Field(min_length=3, max_length=3)  # world frame, unit
    commanded_len: float
    realized_disp: list[float] = Field(min_length=3, max_length=3)
    dq: float
    q: float
    degenerate: bool = False
    detached: bool = False


class PolicyTrace(BaseModel):
    scene: str
    category: str
    policy: PolicyKind
    seed: int
    steps: list[StepRecord] = []
    total_dq: float = 0.0
    threshold: float
    joint_kind: JointKind
    success: bool = False
    gated_out: bool = False
    failure_reason: Optional[FailureReason] = None
    fpr_union: Optional[float] = None
    proposal: Optional[ProposalOut] = None
    attached_part: Optional[str] = None
