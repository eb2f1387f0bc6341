from typing import Optional

import typer

from manipkit.api import bench, metrics, propose, schemas, simulate
from manipkit.core.log_config import setup_logging

app = typer.Typer(
    name="manipkit",
    help="Affordance-driven contact proposals and articulated-part manipulation benchmarks",
    no_args_is_help=True,
    add_completion=False,
)


@app.callback()
def main(
    log_level: Optional[str] = typer.Option(None, "--log-level", help="Overrides MANIPKIT_LOG_LEVEL"),
):
    setup_logging(log_level)


app.command("propose")(propose.propose_cmd)
app.command("metrics")(metrics.metrics_cmd)
app.command("simulate")(simulate.simulate_cmd)
app.command("bench")(bench.bench_cmd)
app.command("export-schemas")(schemas.export_schemas_cmd)
