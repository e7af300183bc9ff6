"""Constant-velocity Kalman filter over (cx, cy, a, h) box states.

State vector: (cx, cy, a, h, vcx, vcy, va, vh) where a is the width/height
aspect ratio. The filter observes the four position components. Noise
standard deviations scale with the box height, so large objects tolerate
proportionally larger motion; the aspect channel uses small fixed noise.
The time step is exactly one frame.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .core import BBox, bbox_to_cxcyah, cxcyah_to_bbox

logger = logging.getLogger(__name__)

_NDIM = 4

# constant-velocity transition and position-only observation matrices
_F = np.eye(2 * _NDIM)
for _i in range(_NDIM):
    _F[_i, _NDIM + _i] = 1.0
_H = np.eye(_NDIM, 2 * _NDIM)


@dataclass(frozen=True)
class KalmanParams:
    """Height-relative noise scales (std dev per unit of box height)."""

    position_noise_scale: float = 1.0 / 20
    velocity_noise_scale: float = 1.0 / 160

    def __post_init__(self) -> None:
        if self.position_noise_scale <= 0 or self.velocity_noise_scale <= 0:
            raise ValueError("noise scales must be positive")


DEFAULT_PARAMS = KalmanParams()


@dataclass(frozen=True)
class KalmanState:
    """Filter state: 8-vector mean and 8x8 covariance. Treat as immutable."""

    mean: np.ndarray
    covariance: np.ndarray


def _symmetrize(cov: np.ndarray) -> np.ndarray:
    return (cov + cov.T) / 2.0


def kf_init(measurement: BBox, params: KalmanParams = DEFAULT_PARAMS) -> KalmanState:
    """Start a filter at a measured box, zero velocity.

    The initial velocity uncertainty is 10x the position uncertainty, so the
    first few updates transfer position innovations into the velocity
    estimate quickly.
    """
    cx, cy, a, h = bbox_to_cxcyah(measurement)
    if a == 0.0:
        logger.debug("zero-width measurement tolerated at init: %s", measurement)
    mean = np.array([cx, cy, a, h, 0.0, 0.0, 0.0, 0.0])
    ps = params.position_noise_scale
    pos_std = np.array([2 * ps * h, 2 * ps * h, 1e-2, 2 * ps * h])
    vel_std = 10.0 * pos_std
    covariance = np.diag(np.square(np.concatenate([pos_std, vel_std])))
    return KalmanState(mean, covariance)


def kf_predict(s: KalmanState, params: KalmanParams = DEFAULT_PARAMS) -> KalmanState:
    """Advance one frame under constant velocity; inflate covariance."""
    h = s.mean[3]
    ps, vs = params.position_noise_scale, params.velocity_noise_scale
    std = np.array(
        [ps * h, ps * h, 1e-2, ps * h, vs * h, vs * h, 1e-5, vs * h]
    )
    motion_cov = np.diag(np.square(std))
    mean = _F @ s.mean
    covariance = _symmetrize(_F @ s.covariance @ _F.T + motion_cov)
    return KalmanState(mean, covariance)


def kf_update(
    s: KalmanState, measurement: BBox, params: KalmanParams = DEFAULT_PARAMS
) -> KalmanState:
    """Correct the four observed components with a measured box.

    Uses the Joseph-form covariance update, which keeps the covariance
    symmetric positive-semidefinite under long predict/update interleavings.
    """
    z = np.array(bbox_to_cxcyah(measurement))
    if not np.all(np.isfinite(z)):
        raise ValueError(f"non-finite measurement: {measurement}")
    ps = params.position_noise_scale
    h = s.mean[3]
    meas_std = np.array([ps * h, ps * h, 1e-1, ps * h])
    meas_cov = np.diag(np.square(meas_std))

    projected_cov = _H @ s.covariance @ _H.T + meas_cov
    gain = np.linalg.solve(projected_cov.T, (s.covariance @ _H.T).T).T
    innovation = z - _H @ s.mean

    mean = s.mean + gain @ innovation
    ikh = np.eye(2 * _NDIM) - gain @ _H
    covariance = _symmetrize(ikh @ s.covariance @ ikh.T + gain @ meas_cov @ gain.T)
    return KalmanState(mean, covariance)


def state_bbox(s: KalmanState) -> BBox:
    """Corner-format box of the current state mean."""
    return cxcyah_to_bbox(*s.mean[:4])
