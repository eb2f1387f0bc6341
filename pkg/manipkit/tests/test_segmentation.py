from collections import deque

import numpy as np
import pytest
from rich.console import Console

from manipkit.core.errors import DimensionMismatchError, EmptySuiteError
from manipkit.schemas.metrics import MaskPairScore, MetricsReport
from manipkit.services.raster import BinaryMask
from manipkit.services.segmentation import aggregate, gate, largest_region, render_table, score_pair

pytestmark = [pytest.mark.unit, pytest.mark.segmentation]


def count_oracle(pred: np.ndarray, gt: np.ndarray) -> tuple[int, int, int, int]:
    tp = fp = fn = tn = 0
    for p, g in zip(pred.ravel().tolist(), gt.ravel().tolist()):
        if p and g:
            tp += 1
        elif p:
            fp += 1
        elif g:
            fn += 1
        else:
            tn += 1
    return tp, fp, fn, tn


def flood_fill_sizes(data: np.ndarray) -> list[tuple[int, set]]:
    seen = np.zeros_like(data, dtype=bool)
    h, w = data.shape
    regions = []
    for y in range(h):
        for x in range(w):
            if not data[y, x] or seen[y, x]:
                continue
            pixels = set()
            queue = deque([(y, x)])
            seen[y, x] = True
            while queue:
                cy, cx = queue.popleft()
                pixels.add((cy, cx))
                for ny, nx in ((cy - 1, cx), (cy + 1, cx), (cy, cx - 1), (cy, cx + 1)):
                    if 0 <= ny < h and 0 <= nx < w and data[ny, nx] and not seen[ny, nx]:
                        seen[ny, nx] = True
                        queue.append((ny, nx))
            regions.append((len(pixels), pixels))
    return regions


def _score(iou):
    return MaskPairScore(iou=iou, f1=iou, fpr_union=0.0, tp=0, fp=0, fn=0, tn=0)


class TestScorePair:
    """Test IoU, F1 and FPR over the union"""

    def test_identity(self, rect_mask_factory):
        mask = rect_mask_factory(20, 20, 3, 9, 4, 12)
        score = score_pair(mask, mask)
        assert (score.iou, score.f1, score.fpr_union) == (1.0, 1.0, 0.0)

    def test_shifted_square(self, rect_mask_factory):
        gt = rect_mask_factory(30, 20, 5, 14, 5, 14)
        pred = rect_mask_factory(30, 20, 10, 19, 5, 14)
        score = score_pair(pred, gt)
        assert (score.tp, score.fp, score.fn) == (50, 50, 50)
        assert score.iou == 1 / 3
        assert score.f1 == 1 / 2
        assert score.fpr_union == 1 / 3

    def test_disjoint(self, rect_mask_factory):
        gt = rect_mask_factory(20, 20, 0, 3, 0, 3)
        pred = rect_mask_factory(20, 20, 10, 11, 10, 14)
        score = score_pair(pred, gt)
        assert score.iou == 0.0
        assert score.f1 == 0.0
        assert score.fpr_union == 10 / (10 + 16)

    def test_both_empty(self):
        score = score_pair(BinaryMask.empty(4, 4), BinaryMask.empty(4, 4))
        assert (score.iou, score.f1, score.fpr_union) == (1.0, 1.0, 0.0)
        assert score.tn == 16

    def test_empty_gt(self, rect_mask_factory):
        score = score_pair(rect_mask_factory(4, 4, 0, 1, 0, 1), BinaryMask.empty(4, 4))
        assert score.iou == 0.0
        assert score.fpr_union == 1.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            score_pair(BinaryMask.empty(4, 4), BinaryMask.empty(5, 4))

    def test_matches_counting_oracle(self):
        """Test scores against explicit pixel counting"""
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            pred = rng.random((64, 64)) < rng.random()
            gt = rng.random((64, 64)) < rng.random()
            score = score_pair(BinaryMask(pred), BinaryMask(gt))
            tp, fp, fn, tn = count_oracle(pred, gt)
            assert (score.tp, score.fp, score.fn, score.tn) == (tp, fp, fn, tn)
            union = tp + fp + fn
            if union:
                assert abs(score.iou - tp / union) <= 1e-12
                assert abs(score.f1 - 2 * tp / (2 * tp + fp + fn)) <= 1e-12
                assert abs(score.fpr_union - fp / union) <= 1e-12
            assert score.f1 >= score.iou
            assert tp + fp + fn + tn == 64 * 64

    def test_symmetry_of_iou(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            a = BinaryMask(rng.random((16, 16)) < 0.4)
            b = BinaryMask(rng.random((16, 16)) < 0.6)
            ab, ba = score_pair(a, b), score_pair(b, a)
            assert ab.iou == ba.iou
            assert ab.fp == ba.fn

    def test_extra_false_positive_is_monotone(self, rect_mask_factory):
        gt = rect_mask_factory(20, 20, 2, 8, 2, 8)
        pred = rect_mask_factory(20, 20, 4, 10, 4, 10)
        grown = pred.data.copy()
        grown[15, 15] = True
        before, after = score_pair(pred, gt), score_pair(BinaryMask(grown), gt)
        assert after.fpr_union >= before.fpr_union
        assert after.iou <= before.iou


class TestGate:
    """Test the quality gate threshold"""

    @pytest.mark.parametrize("fpr,proceed", [
        (0.0, True),
        (0.3, True),
        (0.5, True),    # "exceeds" is strict
        (0.51, False),
        (1.0, False),
    ])
    def test_threshold(self, fpr, proceed):
        score = MaskPairScore(iou=0.0, f1=0.0, fpr_union=fpr, tp=0, fp=0, fn=0, tn=0)
        assert gate(score) is proceed

    def test_custom_threshold(self):
        score = MaskPairScore(iou=0.0, f1=0.0, fpr_union=0.3, tp=0, fp=0, fn=0, tn=0)
        assert gate(score, threshold=0.2) is False


class TestLargestRegion:
    """Test keeping the largest connected region"""

    def test_single_blob_unchanged(self, rect_mask_factory):
        mask = rect_mask_factory(10, 10, 2, 5, 3, 7)
        assert largest_region(mask) == mask

    def test_keeps_bigger_blob(self):
        data = np.zeros((20, 20), dtype=bool)
        data[1:4, 1:5] = True        # 12 pixels
        data[8:14, 8:13] = True      # 30 pixels
        result = largest_region(BinaryMask(data))
        assert result.count() == 30
        assert result.data[10, 10] and not result.data[2, 2]

    def test_tie_prefers_earliest_pixel(self):
        """Test that equal regions resolve to the one scanned first"""
        data = np.zeros((10, 10), dtype=bool)
        data[6:8, 0:3] = True
        data[1:3, 6:9] = True
        result = largest_region(BinaryMask(data))
        assert result.data[1, 6] and not result.data[6, 0]

    def test_diagonal_is_not_connected(self):
        data = np.zeros((4, 4), dtype=bool)
        data[0, 0] = data[1, 1] = data[1, 2] = True
        result = largest_region(BinaryMask(data))
        assert result.count() == 2
        assert not result.data[0, 0]

    def test_empty(self):
        assert largest_region(BinaryMask.empty(3, 3)).is_empty()

    def test_matches_flood_fill(self):
        rng = np.random.default_rng(12)
        for _ in range(30):
            data = rng.random((15, 15)) < 0.45
            regions = flood_fill_sizes(data)
            if not regions:
                continue
            biggest = max(size for size, _ in regions)
            result = largest_region(BinaryMask(data))
            assert result.count() == biggest
            assert len(flood_fill_sizes(result.data)) == 1


class TestAggregate:
    """Test per-category and overall aggregation"""

    def test_single_perfect_pair(self):
        report = aggregate([("door", _score(1.0))])
        assert report.overall.miou == 100.0
        assert report.categories[0].category == "door"

    def test_mean_over_images(self):
        report = aggregate([("door", _score(1 / 3)), ("door", _score(2 / 3))])
        assert report.overall.miou == 50.0
        assert report.overall.count == 2

    def test_per_category(self):
        report = aggregate([("a", _score(1.0)), ("b", _score(0.5)), ("a", _score(0.0))])
        by_category = {c.category: c for c in report.categories}
        assert by_category["a"].miou == 50.0
        assert by_category["b"].miou == 50.0
        assert report.overall.iou_mean == pytest.approx(0.5)

    def test_matches_streaming_sum(self):
        """Test the aggregate against a running sum over pairs"""
        rng = np.random.default_rng(1)
        values = rng.random(100)
        report = aggregate([("x", _score(float(v))) for v in values])
        total = 0.0
        for v in values:
            total += float(v)
        assert report.overall.iou_mean == pytest.approx(total / 100, rel=1e-9)

    def test_empty(self):
        with pytest.raises(EmptySuiteError):
            aggregate([])

    def test_serializes(self):
        report = aggregate([("door", _score(0.25))], names=["door/a.png"])
        assert MetricsReport.model_validate_json(report.model_dump_json()) == report
        assert report.pairs[0].name == "door/a.png"

    def test_table_columns(self):
        report = aggregate([("door", _score(0.25)), ("lid", _score(0.75))])
        console = Console(record=True, width=120)
        console.print(render_table(report))
        text = console.export_text()
        for heading in ("Method", "mIoU", "F1"):
            assert heading in text
        assert "50.0" in text
