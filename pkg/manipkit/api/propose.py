"""`manipkit propose`: contact point and direction from image inputs."""
import logging
from pathlib import Path
from typing import Optional

import typer

from manipkit.api.common import console, exit_on_error, write_json
from manipkit.core.config import settings
from manipkit.core.errors import check_same_shape
from manipkit.schemas.camera import CameraIntrinsics
from manipkit.schemas.proposal import ProposerConfig
from manipkit.services.normals import normals_from_depth
from manipkit.services.overlay import draw_overlay, save_overlay
from manipkit.services.proposer import propose
from manipkit.services.raster import load_depth, load_mask, load_normal_map

logger = logging.getLogger(__name__)


def propose_cmd(
    mask: Path = typer.Option(..., "--mask", help="Part mask PNG"),
    normal_map: Optional[Path] = typer.Option(None, "--normal-map", help="RGB-encoded normal map PNG"),
    depth: Optional[Path] = typer.Option(None, "--depth", help="16-bit depth PNG with JSON sidecar"),
    intrinsics: Optional[Path] = typer.Option(None, "--intrinsics", help="JSON with fx, fy, cx, cy"),
    filter_value: Optional[float] = typer.Option(None, "--filter-value", min=0.0),
    seed: Optional[int] = typer.Option(None, "--seed", min=0),
    relaxed_bbox: Optional[bool] = typer.Option(None, "--relaxed-bbox/--literal-bbox"),
    out: Optional[Path] = typer.Option(None, "--out", help="Proposal JSON (stdout if omitted)"),
    overlay: Optional[Path] = typer.Option(None, "--overlay", help="Overlay PNG (defaults next to --out)"),
):
    """Propose a suction contact pixel and a manipulation direction."""
    if (normal_map is None) == (depth is None):
        raise typer.BadParameter("give exactly one of --normal-map or --depth")
    if depth is not None and intrinsics is None:
        raise typer.BadParameter("--depth needs --intrinsics")

    seed = settings.SEED if seed is None else seed
    overrides = {"rng_seed": seed}
    if filter_value is not None:
        overrides["filter_value"] = filter_value
    if relaxed_bbox is not None:
        overrides["relaxed_bbox"] = relaxed_bbox

    with exit_on_error():
        cfg = ProposerConfig(**overrides)
        point = None
        if normal_map is not None:
            normals = load_normal_map(normal_map)
            k = None
            depth_map = None
        else:
            k = CameraIntrinsics.from_json(intrinsics)
            depth_map = load_depth(depth)
            normals = normals_from_depth(depth_map, k)
        part_mask = load_mask(mask)
        check_same_shape(normals.shape, part_mask.shape, what="normal map and mask")

        proposal = propose(normals, part_mask, cfg)
        if depth_map is not None and depth_map[proposal.contact] > 0:
            c = proposal.contact
            point = k.backproject(c.x, c.y, depth_map[c])

        write_json(proposal.to_out(seed, point), out)
        overlay = overlay or (out.with_suffix(".png") if out is not None else None)
        if overlay is not None:
            img = draw_overlay(normals, proposal.contact, proposal.direction, part_mask, point, k)
            save_overlay(img, overlay)

    console.print(
        f"contact=({proposal.contact.x}, {proposal.contact.y}) "
        f"fallback={proposal.used_fallback}"
    )
