from enum import Enum


class FallbackKind(str, Enum):
    CENTROID = "centroid"
    BBOX_RANDOM = "bbox_random"
    MASK_RANDOM = "mask_random"

    def __str__(self):
        return self.value


class JointKind(str, Enum):
    PRISMATIC = "prismatic"
    REVOLUTE = "revolute"

    def __str__(self):
        return self.value


class PolicyKind(str, Enum):
    ONESTEP = "onestep"
    MULTISTEP = "multistep"
    RANDOM = "random"

    def __str__(self):
        return self.value


class PredictorKind(str, Enum):
    ORACLE = "oracle"
    NOISY_ORACLE = "noisy_oracle"
    FILE = "file"

    def __str__(self):
        return self.value


class Action(str, Enum):
    PULL = "pull"
    PUSH = "push"

    def __str__(self):
        return self.value


class NormalSource(str, Enum):
    RENDERED = "rendered"
    DEPTH = "depth"

    def __str__(self):
        return self.value


class FailureReason(str, Enum):
    GATED_OUT = "gated_out"
    PREDICTOR_FAILED = "predictor_failed"
    EMPTY_MASK = "empty_mask"
    NO_PROPOSAL = "no_proposal"
    ATTACH_FAILED = "attach_failed"
    DEGENERATE = "degenerate"
    DETACHED = "detached"
    BELOW_THRESHOLD = "below_threshold"

    def __str__(self):
        return self.value
