"""IoU cost matrices and gated optimal one-to-one matching."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import Detection, iou
from .tracks import Track


@dataclass(frozen=True)
class MatchResult:
    """Partition of detection and tracker indices into matches and leftovers."""

    matches: tuple[tuple[int, int], ...]
    unmatched_detections: tuple[int, ...]
    unmatched_trackers: tuple[int, ...]


def iou_matrix(dets: Sequence[Detection], tracks: Sequence[Track]) -> np.ndarray:
    """N x M matrix of IoU between detection boxes and current track boxes.

    Matching is class-agnostic: IoU alone decides association and the
    rescoring step resolves class conflicts afterwards.
    """
    m = np.zeros((len(dets), len(tracks)))
    track_boxes = [t.current_box() for t in tracks]
    for i, d in enumerate(dets):
        for j, tb in enumerate(track_boxes):
            m[i, j] = iou(d.bbox, tb)
    return m


def match(cost_matrix: np.ndarray, tau_iou: float) -> MatchResult:
    """Maximum-total-IoU one-to-one assignment with a hard IoU gate.

    Pairs with IoU below ``tau_iou`` are never matched, and an entity stays
    unmatched whenever that raises the total (the solver runs on a
    square-padded reward matrix where gated and padded cells contribute
    zero, so it never trades a strong pair for match cardinality). Among
    assignments with equal total IoU, a tiny index-based perturbation
    deterministically prefers low (detection, tracker) index pairs.
    """
    n, m = cost_matrix.shape
    if n == 0 or m == 0:
        return MatchResult((), tuple(range(n)), tuple(range(m)))

    feasible = cost_matrix >= tau_iou
    size = max(n, m)
    cost = np.zeros((size, size))
    cost[:n, :m][feasible] = -cost_matrix[feasible]
    bias = (np.arange(n)[:, None] * m + np.arange(m)[None, :]) * (1e-10 / (n * m))
    cost[:n, :m] += bias
    rows, cols = linear_sum_assignment(cost)

    matches = sorted(
        (int(i), int(j))
        for i, j in zip(rows, cols)
        if i < n and j < m and feasible[i, j]
    )
    matched_d = {i for i, _ in matches}
    matched_t = {j for _, j in matches}
    return MatchResult(
        tuple(matches),
        tuple(i for i in range(n) if i not in matched_d),
        tuple(j for j in range(m) if j not in matched_t),
    )
