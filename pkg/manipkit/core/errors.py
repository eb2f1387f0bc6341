"""Exception hierarchy shared by services and the CLI"""
from pathlib import Path
from typing import Optional, Sequence

from pydantic import ValidationError


class ManipKitError(Exception):
    exit_code: int = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class RasterIOError(ManipKitError):
    exit_code = 2


class InvalidRasterError(ManipKitError, ValueError):
    exit_code = 2


class DimensionMismatchError(ManipKitError, ValueError):
    exit_code = 3


class NoProposalError(ManipKitError):
    exit_code = 4


class EmptyMaskError(ManipKitError, ValueError):
    exit_code = 2


class SceneError(ManipKitError):
    exit_code = 2

    def __init__(self, detail: str, field_path: Optional[str] = None):
        if field_path:
            detail = f"{field_path}: {detail}"
        super().__init__(detail)
        self.field_path = field_path


class AttachmentError(ManipKitError):
    exit_code = 5


class PredictorError(ManipKitError):
    exit_code = 2


class EmptySuiteError(ManipKitError):
    exit_code = 2


class ConfigError(ManipKitError):
    exit_code = 2

    @classmethod
    def from_validation(cls, error: ValidationError) -> "ConfigError":
        first = error.errors()[0]
        field = ".".join(str(part) for part in first["loc"]) or error.title
        return cls(f"Invalid value for {field}: {first['msg']}")


def check_file_exists(path: Path, what: str = "File") -> None:
    if not Path(path).is_file():
        raise RasterIOError(f"{what} not found: {path}")


def check_same_shape(*shapes: Sequence[int], what: str = "maps") -> None:
    first = tuple(shapes[0])
    for shape in shapes[1:]:
        if tuple(shape) != first:
            raise DimensionMismatchError(
                f"Dimension mismatch between {what}: {first} vs {tuple(shape)}"
            )
