"""`manipkit export-schemas`: JSON Schema of every artifact the CLI writes."""
from pathlib import Path

import orjson
import typer
from pydantic import BaseModel

from manipkit.api.common import JSON_OPTIONS, console
from manipkit.schemas.benchmark import BenchmarkReport
from manipkit.schemas.metrics import MetricsReport
from manipkit.schemas.proposal import ProposalOut
from manipkit.schemas.scene import SceneSpec
from manipkit.schemas.trace import PolicyTrace

WIRE_MODELS: dict[str, type[BaseModel]] = {
    "proposal": ProposalOut,
    "scene": SceneSpec,
    "trace": PolicyTrace,
    "metrics": MetricsReport,
    "benchmark": BenchmarkReport,
}


def export_schemas_cmd(
    out: Path = typer.Option(Path("schemas"), "--out", file_okay=False, help="Output directory"),
):
    """Write <name>.schema.json for each wire model."""
    out.mkdir(parents=True, exist_ok=True)
    for name, model in WIRE_MODELS.items():
        (out / f"{name}.schema.json").write_bytes(
            orjson.dumps(model.model_json_schema(), option=JSON_OPTIONS | orjson.OPT_APPEND_NEWLINE)
        )
    console.print(f"Wrote {len(WIRE_MODELS)} schemas to {out}")
