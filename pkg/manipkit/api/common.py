"""Shared plumbing for CLI commands: JSON output, error-to-exit-code mapping, predictor options."""
import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional

import orjson
import typer
from pydantic import BaseModel, ValidationError
from rich.console import Console

from manipkit.core.enums import PredictorKind
from manipkit.core.errors import ConfigError, ManipKitError, PredictorError
from manipkit.schemas.predictor import PredictorSpec
from manipkit.services.predictors import Predictor, build_predictor

logger = logging.getLogger(__name__)
console = Console(stderr=True)

JSON_OPTIONS = orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS


def dump_json(model: BaseModel) -> bytes:
    return orjson.dumps(model.model_dump(mode="json"), option=JSON_OPTIONS)


def write_json(model: BaseModel, path: Optional[Path]) -> None:
    data = dump_json(model)
    if path is None:
        typer.echo(data.decode())
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    logger.info(f"Wrote {path}")


@contextmanager
def exit_on_error() -> Iterator[None]:
    try:
        yield
    except ValidationError as e:
        error = ConfigError.from_validation(e)
        console.print(f"[red]error:[/red] {error.detail}")
        raise typer.Exit(code=error.exit_code)
    except ManipKitError as e:
        console.print(f"[red]error:[/red] {e.detail}")
        raise typer.Exit(code=e.exit_code)


def make_predictor(
    kind: PredictorKind,
    mask_dir: Optional[Path],
    dilate: int,
    erode: int,
    flip_prob: float,
    seed: int,
) -> Predictor:
    try:
        spec = PredictorSpec(
            kind=kind, mask_dir=mask_dir, dilate=dilate, erode=erode, flip_prob=flip_prob, seed=seed
        )
    except ValidationError as e:
        raise PredictorError(f"Invalid predictor options: {e.errors()[0]['msg']}")
    return build_predictor(spec)
