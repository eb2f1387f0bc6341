"""Segmentation quality: pixel counts, IoU/F1/FPR_Union, the quality gate and largest-region cleanup."""
import logging
from collections import OrderedDict
from typing import Iterable, Optional

import numpy as np
from rich.table import Table
from scipy.ndimage import generate_binary_structure, label

from manipkit.core.config import settings
from manipkit.core.errors import EmptySuiteError, check_same_shape
from manipkit.core.metrics import gate_decisions_total
from manipkit.schemas.metrics import CategoryMetrics, MaskPairScore, MetricsReport, PairRow
from manipkit.services.raster import BinaryMask

logger = logging.getLogger(__name__)

OVERALL = "overall"
_FOUR_CONNECTED = generate_binary_structure(2, 1)


def score_pair(pred: BinaryMask, gt: BinaryMask) -> MaskPairScore:
    check_same_shape(pred.shape, gt.shape, what="predicted and ground-truth masks")
    p, g = pred.data, gt.data
    tp = int(np.count_nonzero(p & g))
    fp = int(np.count_nonzero(p & ~g))
    fn = int(np.count_nonzero(~p & g))
    tn = int(p.size) - tp - fp - fn

    union = tp + fp + fn
    if union == 0:
        return MaskPairScore(iou=1.0, f1=1.0, fpr_union=0.0, tp=tp, fp=fp, fn=fn, tn=tn)
    return MaskPairScore(
        iou=tp / union,
        f1=2 * tp / (2 * tp + fp + fn),
        fpr_union=fp / union,
        tp=tp, fp=fp, fn=fn, tn=tn,
    )


def gate(score: MaskPairScore, threshold: Optional[float] = None) -> bool:
    """Proceed unless FPR_Union strictly exceeds the threshold."""
    threshold = settings.GATE_THRESHOLD if threshold is None else threshold
    proceed = score.fpr_union <= threshold
    gate_decisions_total.labels(verdict="proceed" if proceed else "skip").inc()
    if not proceed:
        logger.warning(f"Mask gated out: fpr_union={score.fpr_union:.4f} > {threshold}")
    return proceed


def largest_region(m: BinaryMask) -> BinaryMask:
    labels, count = label(m.data, structure=_FOUR_CONNECTED)
    if count <= 1:
        return m
    sizes = np.bincount(labels.ravel())[1:]
    # labels are assigned in row-major scan order, so the lowest label among
    # the largest holds the earliest pixel
    keep = int(np.argmax(sizes)) + 1
    return BinaryMask(labels == keep)


def _summarize(category: str, scores: list[MaskPairScore]) -> CategoryMetrics:
    iou_mean = float(np.mean([s.iou for s in scores]))
    f1_mean = float(np.mean([s.f1 for s in scores]))
    return CategoryMetrics(
        category=category,
        count=len(scores),
        iou_mean=iou_mean,
        f1_mean=f1_mean,
        fpr_union_mean=float(np.mean([s.fpr_union for s in scores])),
        miou=round(100.0 * iou_mean, 1),
        f1=round(100.0 * f1_mean, 1),
    )


def aggregate(
    scores: Iterable[tuple[str, MaskPairScore]],
    names: Optional[list[str]] = None,
    method: str = "manipkit",
) -> MetricsReport:
    """Per-image means per category (first-seen order) and over all pairs."""
    scores = list(scores)
    if not scores:
        raise EmptySuiteError("No mask pairs to aggregate")
    names = names or [f"pair_{i}" for i in range(len(scores))]

    grouped: "OrderedDict[str, list[MaskPairScore]]" = OrderedDict()
    for category, score in scores:
        grouped.setdefault(category, []).append(score)

    return MetricsReport(
        method=method,
        categories=[_summarize(c, s) for c, s in grouped.items()],
        overall=_summarize(OVERALL, [s for _, s in scores]),
        pairs=[PairRow(name=n, category=c, score=s) for n, (c, s) in zip(names, scores)],
    )


def render_table(report: MetricsReport) -> Table:
    table = Table(title="Segmentation")
    table.add_column("Method")
    table.add_column("Category")
    table.add_column("N", justify="right")
    table.add_column("mIoU", justify="right")
    table.add_column("F1", justify="right")
    rows = report.categories if len(report.categories) > 1 else []
    for row in [*rows, report.overall]:
        table.add_row(report.method, row.category, str(row.count), f"{row.miou:.1f}", f"{row.f1:.1f}")
    return table
