"""`manipkit metrics`: segmentation scores of predicted masks against ground truth."""
import logging
from pathlib import Path
from typing import Optional

import typer

from manipkit.api.common import console, exit_on_error, write_json
from manipkit.core.errors import EmptySuiteError
from manipkit.services.raster import load_mask
from manipkit.services.segmentation import aggregate, render_table, score_pair

logger = logging.getLogger(__name__)

UNMATCHED_EXIT_CODE = 1
FLAT_CATEGORY = "all"


def _index(root: Path) -> dict[str, Path]:
    return {p.relative_to(root).as_posix(): p for p in sorted(root.rglob("*.png"))}


def _category(name: str) -> str:
    parts = name.split("/")
    return parts[0] if len(parts) > 1 else FLAT_CATEGORY


def metrics_cmd(
    pred_dir: Path = typer.Option(..., "--pred-dir", exists=True, file_okay=False),
    gt_dir: Path = typer.Option(..., "--gt-dir", exists=True, file_okay=False),
    out: Optional[Path] = typer.Option(None, "--out", help="Report JSON (stdout if omitted)"),
    allow_missing: bool = typer.Option(False, "--allow-missing", help="Unmatched files do not fail the run"),
    method: str = typer.Option("manipkit", "--method", help="Method name shown in the table"),
):
    """Score masks matched by relative path; a sub-directory of --gt-dir is a category."""
    preds, gts = _index(pred_dir), _index(gt_dir)
    matched = [name for name in gts if name in preds]
    missing = sorted(set(preds) ^ set(gts))
    for name in missing:
        logger.warning(f"Unmatched mask skipped: {name}")

    with exit_on_error():
        if not matched:
            raise EmptySuiteError(f"No matching mask pairs between {pred_dir} and {gt_dir}")
        scores = [(_category(n), score_pair(load_mask(preds[n]), load_mask(gts[n]))) for n in matched]
        report = aggregate(scores, names=matched, method=method)
        report.missing = missing
        write_json(report, out)

    console.print(render_table(report))
    if missing and not allow_missing:
        console.print(f"[yellow]{len(missing)} unmatched file(s):[/yellow] {', '.join(missing)}")
        raise typer.Exit(code=UNMATCHED_EXIT_CODE)
