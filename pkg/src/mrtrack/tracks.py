"""Track state and lifecycle for the two-pass tracker."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .core import BBox, Detection, clamp_conf
from .kalman import KalmanParams, KalmanState, DEFAULT_PARAMS, kf_init, state_bbox
from .rescore import RescoreDecision


class TrackStatus(Enum):
    TENTATIVE = "tentative"
    CONFIRMED = "confirmed"
    REMOVED = "removed"


@dataclass
class Track:
    """One tracked object: motion state, class hypothesis, lifecycle counters."""

    track_id: int
    kf_state: KalmanState
    class_id: int
    conf: float
    conf_agg: float
    recent_confs: list[float] = field(default_factory=list)
    hit_streak: int = 1
    frames_since_update: int = 0
    status: TrackStatus = TrackStatus.TENTATIVE

    @classmethod
    def from_detection(
        cls,
        track_id: int,
        det: Detection,
        epsilon: float = 1e-4,
        kf_params: KalmanParams = DEFAULT_PARAMS,
    ) -> "Track":
        """Start a tentative track; conf_agg mirrors the creating detection."""
        return cls(
            track_id=track_id,
            kf_state=kf_init(det.bbox, kf_params),
            class_id=det.class_id,
            conf=det.conf,
            conf_agg=clamp_conf(det.conf, epsilon),
            recent_confs=[det.conf],
        )

    def current_box(self) -> BBox:
        """Corner box of the current motion estimate."""
        return state_bbox(self.kf_state)

    def apply_rescore(
        self, decision: RescoreDecision, det_conf: float, history_len: int
    ) -> None:
        """Adopt a fusion decision; the history restarts on a class switch."""
        if decision.class_switched:
            self.recent_confs = [det_conf]
        else:
            self.recent_confs = (self.recent_confs + [det_conf])[-history_len:]
        self.class_id = decision.new_class
        self.conf = decision.new_conf
        self.conf_agg = decision.new_conf_agg

    def mark_matched(self, tau_init: int) -> None:
        """Register a match for lifecycle purposes (call after kf/rescore)."""
        self.hit_streak += 1
        self.frames_since_update = 0
        if self.status is TrackStatus.TENTATIVE and self.hit_streak >= tau_init:
            self.status = TrackStatus.CONFIRMED

    def mark_missed(self, tau_dead: int) -> None:
        """Register a frame without a match; tentative tracks die immediately."""
        self.hit_streak = 0
        self.frames_since_update += 1
        if (
            self.status is TrackStatus.TENTATIVE
            or self.frames_since_update >= tau_dead
        ):
            self.status = TrackStatus.REMOVED


@dataclass(frozen=True)
class TrackOutput:
    """One emitted track observation: id, motion-refined box, class, confidence."""

    track_id: int
    bbox: BBox
    class_id: int
    conf: float
