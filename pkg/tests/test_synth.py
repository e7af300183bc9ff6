import numpy as np
import pytest

from mrtrack.core import rescale_bbox
from mrtrack.synth import (
    DegradationLevel,
    SynthScenario,
    generate,
    profile_scenario,
)

FULL = (320, 320)
LOW = (192, 192)


def _clean_scenario(seed=3, frames=50, objects=3):
    return SynthScenario(
        seed=seed,
        n_objects=objects,
        frame_count=frames,
        native_resolution=FULL,
        degradation=(
            DegradationLevel(resolution=FULL),
            DegradationLevel(resolution=LOW),
        ),
    )


class TestValidation:
    def test_zero_objects_rejected(self):
        with pytest.raises(ValueError):
            SynthScenario(
                seed=1, n_objects=0, frame_count=10, native_resolution=FULL,
                degradation=(DegradationLevel(resolution=FULL),),
            )

    def test_zero_frames_rejected(self):
        with pytest.raises(ValueError):
            SynthScenario(
                seed=1, n_objects=1, frame_count=0, native_resolution=FULL,
                degradation=(DegradationLevel(resolution=FULL),),
            )

    def test_non_monotone_degradation_rejected(self):
        with pytest.raises(ValueError):
            SynthScenario(
                seed=1, n_objects=1, frame_count=10, native_resolution=FULL,
                degradation=(
                    DegradationLevel(resolution=FULL, drop_prob=0.5),
                    DegradationLevel(resolution=LOW, drop_prob=0.1),
                ),
            )

    def test_unknown_resolution_query(self):
        _, emulate = generate(_clean_scenario())
        with pytest.raises(ValueError):
            emulate((64, 64))

    def test_probability_range(self):
        with pytest.raises(ValueError):
            DegradationLevel(resolution=FULL, drop_prob=1.5)


class TestGroundTruth:
    def test_boxes_stay_in_bounds(self):
        sc = _clean_scenario(seed=9, frames=400, objects=5)
        gt_frames, _ = generate(sc)
        for frame in gt_frames:
            for box, _ in frame.objects:
                assert box.x1 >= -1e-9 and box.y1 >= -1e-9
                assert box.x2 <= FULL[0] + 1e-9 and box.y2 <= FULL[1] + 1e-9

    def test_constant_velocity_between_bounces(self):
        sc = _clean_scenario(seed=4, frames=10, objects=1)
        gt_frames, _ = generate(sc)
        centers = [
            ((b.x1 + b.x2) / 2, (b.y1 + b.y2) / 2)
            for b, _ in (f.objects[0] for f in gt_frames)
        ]
        d0 = (centers[1][0] - centers[0][0], centers[1][1] - centers[0][1])
        d1 = (centers[2][0] - centers[1][0], centers[2][1] - centers[1][1])
        assert d1 == pytest.approx(d0)


class TestEmulator:
    def test_noiseless_detections_equal_ground_truth(self):
        sc = _clean_scenario()
        gt_frames, emulate = generate(sc)
        for res in (FULL, LOW):
            packets = emulate(res)
            assert len(packets) == sc.frame_count
            for gt, packet in zip(gt_frames, packets):
                assert len(packet.detections) == len(gt.objects)
                for det, (gbox, gcls) in zip(packet.detections, gt.objects):
                    want = rescale_bbox(gbox, FULL, res)
                    assert det.class_id == gcls
                    for a, b in zip(det.bbox.as_tuple(), want.as_tuple()):
                        assert a == pytest.approx(b, abs=1e-9)

    def test_reproducible_bit_identical(self):
        sc = _clean_scenario(seed=12)
        _, emulate1 = generate(sc)
        _, emulate2 = generate(sc)
        assert emulate1(LOW) == emulate2(LOW)

    def test_different_seeds_differ(self):
        _, e1 = generate(_clean_scenario(seed=1))
        _, e2 = generate(_clean_scenario(seed=2))
        assert e1(FULL) != e2(FULL)

    def test_drop_rate_calibrated(self):
        sc = SynthScenario(
            seed=17, n_objects=1, frame_count=1000, native_resolution=FULL,
            degradation=(
                DegradationLevel(resolution=FULL),
                DegradationLevel(resolution=LOW, drop_prob=0.3),
            ),
        )
        _, emulate = generate(sc)
        kept = sum(len(p.detections) for p in emulate(LOW))
        assert (1000 - kept) / 1000 == pytest.approx(0.30, abs=0.02)

    def test_flip_rate_calibrated(self):
        sc = SynthScenario(
            seed=18, n_objects=1, frame_count=1000, native_resolution=FULL,
            degradation=(
                DegradationLevel(resolution=FULL),
                DegradationLevel(resolution=LOW, class_flip_prob=0.15),
            ),
        )
        gt_frames, emulate = generate(sc)
        true_cls = gt_frames[0].objects[0][1]
        flips = sum(
            1
            for p in emulate(LOW)
            for d in p.detections
            if d.class_id != true_cls
        )
        assert flips / 1000 == pytest.approx(0.15, abs=0.02)

    def test_confidence_noise_moves_confidences(self):
        sc = SynthScenario(
            seed=19, n_objects=1, frame_count=200, native_resolution=FULL,
            degradation=(
                DegradationLevel(resolution=FULL),
                DegradationLevel(resolution=LOW, conf_noise_std=0.1),
            ),
        )
        _, emulate = generate(sc)
        confs = [d.conf for p in emulate(LOW) for d in p.detections]
        assert np.std(confs) == pytest.approx(0.1, abs=0.03)
        assert all(0.0 <= c <= 1 - 1e-4 for c in confs)


class TestProfiles:
    def test_cnn_like_profile(self):
        sc = profile_scenario("cnn-like", seed=5)
        assert sc.level_for(LOW).drop_prob == pytest.approx(0.30)
        assert sc.level_for(FULL).drop_prob < sc.level_for(LOW).drop_prob

    def test_vit_like_profile(self):
        sc = profile_scenario("vit-like", seed=5)
        assert sc.level_for(LOW).class_flip_prob == pytest.approx(0.15)

    def test_unknown_profile(self):
        with pytest.raises(ValueError):
            profile_scenario("mystery")

    def test_low_res_override(self):
        sc = profile_scenario("cnn-like", seed=5, class_flip_prob=0.15)
        assert sc.level_for(LOW).class_flip_prob == pytest.approx(0.15)
