import numpy as np
import pytest

from mrtrack.core import BBox, Detection
from mrtrack.evaluation import (
    average_precision,
    evaluate,
    f1_max_threshold,
    match_frame,
)

from oracles import f1_sweep_oracle


def _det(x, y, size=10, cls=0, conf=0.9):
    return Detection(BBox(x, y, x + size, y + size), cls, conf)


def _gt(x, y, size=10, cls=0):
    return (BBox(x, y, x + size, y + size), cls)


class TestMatchFrame:
    def test_clean_hit(self):
        # IoU of the 1-px shifted box is 81/119 ~ 0.68
        tp, fp, fn = match_frame([_det(1, 1)], [_gt(0, 0)])
        assert (len(tp), len(fp), fn) == (1, 0, 0)

    def test_low_overlap_is_fp_and_fn(self):
        tp, fp, fn = match_frame([_det(6, 0)], [_gt(0, 0)])  # IoU = 4/16 = 0.25
        assert (len(tp), len(fp), fn) == (0, 1, 1)

    def test_exactly_half_iou_is_a_miss(self):
        # [0,0,10,20] vs [0,0,10,10]: inter 100, union 200
        det = Detection(BBox(0, 0, 10, 20), 0, 0.9)
        tp, fp, fn = match_frame([det], [(BBox(0, 0, 10, 10), 0)])
        assert (len(tp), fn) == (0, 1)

    def test_wrong_class_is_fp(self):
        tp, fp, fn = match_frame([_det(0, 0, cls=1)], [_gt(0, 0, cls=0)])
        assert (len(tp), len(fp), fn) == (0, 1, 1)

    def test_greedy_confidence_order(self):
        dets = [_det(1, 1, conf=0.9), _det(2, 2, conf=0.8)]
        tp, fp, fn = match_frame(dets, [_gt(0, 0)])
        assert len(tp) == 1 and tp[0].conf == 0.9
        assert len(fp) == 1 and fp[0].conf == 0.8
        assert fn == 0


class TestAveragePrecision:
    def test_all_tp_full_recall(self):
        assert average_precision([True, True, True], 3) == pytest.approx(1.0)

    def test_tp_then_fp(self):
        assert average_precision([True, False], 1) == pytest.approx(1.0)

    def test_fp_then_tp(self):
        assert average_precision([False, True], 1) == pytest.approx(0.5)

    def test_no_gt(self):
        assert average_precision([False, False], 0) == 0.0
        assert average_precision([], 0) == 0.0

    def test_monotone_rescaling_invariance(self):
        # AP depends only on the confidence ranking, so a strictly monotone
        # confidence map leaves the whole report's AP values unchanged
        rng = np.random.default_rng(31)
        dets, gts = {}, {}
        for t in range(15):
            gts[("m", t)] = [_gt(0, 0), _gt(60, 60, cls=1)]
            frame = [
                _det(rng.uniform(-2, 2), 0, conf=float(rng.uniform(0.1, 0.99))),
                _det(60 + rng.uniform(-2, 2), 60, cls=1,
                     conf=float(rng.uniform(0.1, 0.99))),
                _det(150, 150, cls=rng.integers(0, 2),
                     conf=float(rng.uniform(0.1, 0.99))),
            ]
            dets[("m", t)] = frame
        squashed = {
            key: [Detection(d.bbox, d.class_id, d.conf**2) for d in frame]
            for key, frame in dets.items()
        }
        r1 = evaluate(dets, gts, 0.0)
        r2 = evaluate(squashed, gts, 0.0)
        assert r2.map == pytest.approx(r1.map, abs=1e-12)
        for cls in r1.per_class:
            assert r2.per_class[cls].ap == pytest.approx(
                r1.per_class[cls].ap, abs=1e-12
            )


class TestEvaluate:
    def test_perfect_corpus(self):
        dets = {("a", 0): [_det(0, 0), _det(50, 50, cls=1)]}
        gts = {("a", 0): [_gt(0, 0), _gt(50, 50, cls=1)]}
        report = evaluate(dets, gts, 0.0)
        assert report.map == pytest.approx(1.0)
        assert report.mean_f1 == pytest.approx(1.0)
        assert report.per_class[0].tp == 1

    def test_counts_and_ratios_consistent(self):
        dets = {
            ("a", 0): [_det(0, 0, conf=0.9), _det(100, 100, conf=0.8)],
            ("a", 1): [_det(0, 0, conf=0.7)],
        }
        gts = {("a", 0): [_gt(0, 0)], ("a", 1): [_gt(0, 0), _gt(60, 60)]}
        report = evaluate(dets, gts, 0.0)
        m = report.per_class[0]
        assert (m.tp, m.fp, m.fn) == (2, 1, 1)
        assert m.precision == pytest.approx(2 / 3)
        assert m.recall == pytest.approx(2 / 3)
        assert m.f1 == pytest.approx(2 / 3)

    def test_hallucinated_class_penalized(self):
        dets = {("a", 0): [_det(0, 0), _det(60, 60, cls=5)]}
        gts = {("a", 0): [_gt(0, 0)]}
        report = evaluate(dets, gts, 0.0)
        assert 5 in report.per_class
        assert report.per_class[5].precision == 0.0
        assert report.map == pytest.approx(0.5)

    def test_threshold_filters_detections(self):
        dets = {("a", 0): [_det(0, 0, conf=0.4)]}
        gts = {("a", 0): [_gt(0, 0)]}
        assert evaluate(dets, gts, 0.5).mean_recall == 0.0
        assert evaluate(dets, gts, 0.4).mean_recall == 1.0

    def test_raising_threshold_never_raises_recall(self):
        rng = np.random.default_rng(9)
        dets = {}
        gts = {}
        for t in range(20):
            objs = []
            frame_dets = []
            for i in range(3):
                x = float(rng.uniform(0, 200))
                objs.append(_gt(x, 10 + 40 * i, size=20))
                if rng.random() < 0.8:
                    frame_dets.append(
                        _det(x + rng.uniform(-2, 2), 10 + 40 * i, 20,
                             conf=float(rng.uniform(0.2, 0.95)))
                    )
            dets[("s", t)] = frame_dets
            gts[("s", t)] = objs
        prev = None
        for thr in np.linspace(0, 0.9999, 30):
            recall = evaluate(dets, gts, float(thr)).mean_recall
            if prev is not None:
                assert recall <= prev + 1e-12
            prev = recall

    def test_duplicate_detection_adds_exactly_one_fp(self):
        base = {("a", 0): [_det(1, 1, conf=0.9)]}
        dup = {("a", 0): [_det(1, 1, conf=0.9), _det(1, 1, conf=0.8)]}
        gts = {("a", 0): [_gt(0, 0)]}
        r1 = evaluate(base, gts, 0.0)
        r2 = evaluate(dup, gts, 0.0)
        assert r2.per_class[0].tp == r1.per_class[0].tp == 1
        assert r2.per_class[0].fp == r1.per_class[0].fp + 1


class TestF1MaxThreshold:
    def test_single_tp_returns_largest_harmless_grid_value(self):
        dets = {("a", 0): [_det(1, 1, conf=0.7)]}
        gts = {("a", 0): [_gt(0, 0)]}
        thr, report = f1_max_threshold(dets, gts, grid_step=0.05)
        assert thr == pytest.approx(0.7)
        assert report.mean_f1 == pytest.approx(1.0)

    def test_all_fp_returns_top_of_grid(self):
        dets = {("a", 0): [_det(100, 100, conf=0.6)]}
        gts = {("a", 0): [_gt(0, 0)]}
        thr, report = f1_max_threshold(dets, gts, grid_step=0.1)
        assert thr == pytest.approx(1 - 1e-4)
        assert report.mean_f1 == 0.0

    def test_empty_ground_truth_is_an_error(self):
        with pytest.raises(ValueError):
            f1_max_threshold({("a", 0): [_det(0, 0)]}, {("a", 0): []}, 0.1)

    def test_matches_brute_force_on_planted_corpus(self):
        # plant: TPs at high confidence, FPs concentrated below 0.55
        rng = np.random.default_rng(13)
        dets = {}
        gts = {}
        for t in range(25):
            objs = [_gt(20 + 30 * i, 40, 20) for i in range(3)]
            frame = [
                _det(20 + 30 * i, 40, 20, conf=float(rng.uniform(0.6, 0.95)))
                for i in range(3)
            ]
            for _ in range(rng.integers(0, 3)):
                frame.append(
                    _det(float(rng.uniform(150, 280)), 150, 20,
                         conf=float(rng.uniform(0.05, 0.55)))
                )
            dets[("p", t)] = frame
            gts[("p", t)] = objs
        thr, report = f1_max_threshold(dets, gts, grid_step=0.01)
        grid = [k * 0.01 for k in range(100)] + [1 - 1e-4]
        want_thr, want_f1 = f1_sweep_oracle(dets, gts, grid, evaluate)
        assert thr == pytest.approx(want_thr, abs=1e-12)
        assert report.mean_f1 == pytest.approx(want_f1, abs=1e-12)
        # the planted FP band ends at 0.55 and real TPs start at 0.6
        assert 0.55 < thr <= 0.61
