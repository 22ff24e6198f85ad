"""Box and point primitives, IoU, and non-maximum suppression.

Coordinates are continuous (sub-pixel) floats: filter predictions and box
centers are fractional, and predictions may leave the frame, so negative
values are legal for points (detections are bounds-checked at ingest).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InputContractError


@dataclass(frozen=True)
class PixelPoint:
    """A point in pixel coordinates (origin top-left, y down)."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InputContractError(f"point coordinates must be finite, got ({self.x}, {self.y})")

    def distance_to(self, other: "PixelPoint") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box with strictly positive area."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        for v in (self.x1, self.y1, self.x2, self.y2):
            if not math.isfinite(v):
                raise InputContractError("box corners must be finite")
        if not (self.x1 < self.x2 and self.y1 < self.y2):
            raise InputContractError(
                f"box must have positive area: ({self.x1}, {self.y1}, {self.x2}, {self.y2})"
            )

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def area(self) -> float:
        return self.width * self.height

    def center(self) -> PixelPoint:
        return PixelPoint((self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0)


@dataclass(frozen=True)
class Detection:
    """One detector output box with confidence on one frame."""

    frame_index: int
    box: BoundingBox
    confidence: float

    def __post_init__(self):
        if self.frame_index < 0:
            raise InputContractError(f"frame_index must be >= 0, got {self.frame_index}")
        if not (0.0 <= self.confidence <= 1.0):
            raise InputContractError(f"confidence must be in [0, 1], got {self.confidence}")


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two boxes; 0.0 when disjoint."""
    ix = min(a.x2, b.x2) - max(a.x1, b.x1)
    iy = min(a.y2, b.y2) - max(a.y1, b.y1)
    if ix <= 0.0 or iy <= 0.0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)


def nms(detections: list[Detection], iou_threshold: float) -> list[Detection]:
    """Greedy confidence-ordered non-maximum suppression for one frame.

    Keeps a detection iff its IoU with every already-kept detection is
    <= iou_threshold. Output is sorted by confidence descending; ties are
    broken by smaller x1, then smaller y1, so the result is deterministic.
    """
    if not (0.0 < iou_threshold <= 1.0):
        raise InputContractError(f"iou_threshold must be in (0, 1], got {iou_threshold}")
    if not detections:
        return []
    frames = {d.frame_index for d in detections}
    if len(frames) > 1:
        raise InputContractError(f"nms input must share one frame_index, got {sorted(frames)}")

    ordered = sorted(detections, key=lambda d: (-d.confidence, d.box.x1, d.box.y1))
    kept: list[Detection] = []
    for det in ordered:
        if all(iou(det.box, k.box) <= iou_threshold for k in kept):
            kept.append(det)
    return kept
