"""`manipkit simulate`: one policy rollout on one scene."""
import logging
from pathlib import Path
from typing import Optional

import typer

from manipkit.api.common import console, exit_on_error, make_predictor, write_json
from manipkit.core.config import settings
from manipkit.core.enums import Action, NormalSource, PolicyKind, PredictorKind
from manipkit.schemas.proposal import ProposerConfig
from manipkit.schemas.trace import SimConfig
from manipkit.services.policies import FrameSink, run_policy
from manipkit.services.raster import save_depth_preview, save_mask, save_normal_map
from manipkit.services.render import RenderResult
from manipkit.services.scene import Scene, load_scene

logger = logging.getLogger(__name__)


def frame_writer(directory: Path) -> FrameSink:
    directory.mkdir(parents=True, exist_ok=True)

    def sink(index: int, scene: Scene, observation: RenderResult) -> None:
        save_depth_preview(observation.depth, directory / f"frame_{index:03d}_depth.png")
        save_normal_map(observation.normals, directory / f"frame_{index:03d}_normals.png")
        save_mask(observation.mask(scene.target), directory / f"frame_{index:03d}_mask.png")

    return sink


def build_sim_config(
    seed: Optional[int],
    action: Action,
    normal_source: NormalSource,
    adaptive: bool,
    filter_value: Optional[float],
    relaxed_bbox: Optional[bool],
    detach_angle: Optional[float],
) -> SimConfig:
    seed = settings.SEED if seed is None else seed
    proposer = {"rng_seed": seed}
    if filter_value is not None:
        proposer["filter_value"] = filter_value
    if relaxed_bbox is not None:
        proposer["relaxed_bbox"] = relaxed_bbox
    return SimConfig(
        seed=seed,
        action=action,
        normal_source=normal_source,
        adaptive=adaptive,
        detach_angle_deg=detach_angle,
        proposer=ProposerConfig(**proposer),
    )


def simulate_cmd(
    scene: Path = typer.Option(..., "--scene", help="Scene JSON"),
    policy: PolicyKind = typer.Option(PolicyKind.ONESTEP, "--policy"),
    predictor: PredictorKind = typer.Option(PredictorKind.ORACLE, "--predictor"),
    mask_dir: Optional[Path] = typer.Option(None, "--mask-dir", help="Masks for the file predictor"),
    dilate: int = typer.Option(0, "--dilate", min=0),
    erode: int = typer.Option(0, "--erode", min=0),
    flip_prob: float = typer.Option(0.0, "--flip-prob", min=0.0, max=1.0),
    seed: Optional[int] = typer.Option(None, "--seed", min=0),
    action: Action = typer.Option(Action.PULL, "--action"),
    normal_source: NormalSource = typer.Option(NormalSource.RENDERED, "--normal-source"),
    adaptive: bool = typer.Option(True, "--adaptive/--fixed-direction"),
    filter_value: Optional[float] = typer.Option(None, "--filter-value", min=0.0),
    relaxed_bbox: Optional[bool] = typer.Option(None, "--relaxed-bbox/--literal-bbox"),
    detach_angle: Optional[float] = typer.Option(None, "--detach-angle", help="Degrees; off by default"),
    out: Optional[Path] = typer.Option(None, "--out", help="Trace JSON (stdout if omitted)"),
    dump_frames: Optional[Path] = typer.Option(None, "--dump-frames", help="Directory for per-step PNGs"),
):
    """Run one rollout and write its trace."""
    with exit_on_error():
        cfg = build_sim_config(seed, action, normal_source, adaptive, filter_value, relaxed_bbox, detach_angle)
        loaded = load_scene(scene)
        mask_predictor = make_predictor(predictor, mask_dir, dilate, erode, flip_prob, cfg.seed)
        sink = frame_writer(dump_frames) if dump_frames is not None else None
        trace = run_policy(policy, loaded, mask_predictor, cfg, sink)
        write_json(trace, out)

    verdict = "[green]success[/green]" if trace.success else f"[red]failure[/red] ({trace.failure_reason})"
    console.print(f"{trace.policy} on {trace.scene}: dq={trace.total_dq:.4f} {verdict}")
