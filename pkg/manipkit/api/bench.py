"""`manipkit bench`: success rates of policies over a scene suite."""
import logging
from pathlib import Path
from typing import Optional

import typer

from manipkit.api.common import console, exit_on_error, make_predictor, write_json
from manipkit.api.simulate import build_sim_config
from manipkit.core.config import settings
from manipkit.core.enums import Action, NormalSource, PolicyKind, PredictorKind
from manipkit.core.metrics import get_metrics_text
from manipkit.services.benchmark import load_suite, render_table, run_benchmark

logger = logging.getLogger(__name__)


def parse_policies(value: str) -> list[PolicyKind]:
    try:
        return [PolicyKind(v.strip()) for v in value.split(",") if v.strip()]
    except ValueError:
        choices = ", ".join(p.value for p in PolicyKind)
        raise typer.BadParameter(f"unknown policy in '{value}' (choose from {choices})")


def bench_cmd(
    suite: Path = typer.Option(..., "--suite", help="Directory of scene JSONs, one sub-directory per category"),
    policies: str = typer.Option("onestep,random", "--policies", help="Comma-separated policy names"),
    trials: Optional[int] = typer.Option(None, "--trials", min=1),
    seed: Optional[int] = typer.Option(None, "--seed", min=0),
    predictor: PredictorKind = typer.Option(PredictorKind.ORACLE, "--predictor"),
    mask_dir: Optional[Path] = typer.Option(None, "--mask-dir"),
    dilate: int = typer.Option(0, "--dilate", min=0),
    erode: int = typer.Option(0, "--erode", min=0),
    flip_prob: float = typer.Option(0.0, "--flip-prob", min=0.0, max=1.0),
    action: Action = typer.Option(Action.PULL, "--action"),
    normal_source: NormalSource = typer.Option(NormalSource.RENDERED, "--normal-source"),
    adaptive: bool = typer.Option(True, "--adaptive/--fixed-direction"),
    relaxed_bbox: Optional[bool] = typer.Option(None, "--relaxed-bbox/--literal-bbox"),
    workers: Optional[int] = typer.Option(None, "--workers", min=1),
    out: Optional[Path] = typer.Option(None, "--out", help="Report JSON (stdout if omitted)"),
    metrics_out: Optional[Path] = typer.Option(None, "--metrics-out", help="Prometheus exposition text"),
):
    """Benchmark policies; the report is byte-identical for a fixed seed."""
    kinds = parse_policies(policies)
    if not kinds:
        raise typer.BadParameter("no policy given")

    with exit_on_error():
        cfg = build_sim_config(seed, action, normal_source, adaptive, None, relaxed_bbox, None)
        loaded = load_suite(suite)
        mask_predictor = make_predictor(predictor, mask_dir, dilate, erode, flip_prob, cfg.seed)
        report = run_benchmark(
            loaded,
            kinds,
            mask_predictor,
            cfg,
            trials=settings.DEFAULT_TRIALS if trials is None else trials,
            seed=cfg.seed,
            workers=workers,
        )
        write_json(report, out)

    if metrics_out is not None:
        metrics_out.write_text(get_metrics_text())
    console.print(render_table(report))
