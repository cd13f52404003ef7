"""Axis-aligned box algebra: IoU, anchors, offset coding, NMS, clipping.

Boxes are float (x1, y1, x2, y2) with width = x2 - x1 (no +1 convention).
Hot paths work on [N, 4] numpy arrays; the Box dataclass is the typed
currency for annotations and results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError


@dataclass(frozen=True)
class Box:
    x1: float
    y1: float
    x2: float
    y2: float

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def area(self) -> float:
        return self.width * self.height

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.y1, self.x2, self.y2], dtype=np.float64)

    @staticmethod
    def from_array(a) -> "Box":
        return Box(float(a[0]), float(a[1]), float(a[2]), float(a[3]))


def boxes_to_array(boxes) -> np.ndarray:
    """[N, 4] float array from Box objects or any 4-sequence per row."""
    if isinstance(boxes, np.ndarray):
        return boxes.reshape(-1, 4).astype(np.float64, copy=False)
    rows = [b.as_array() if isinstance(b, Box) else np.asarray(b, dtype=np.float64)
            for b in boxes]
    return np.stack(rows) if rows else np.zeros((0, 4))


@dataclass(frozen=True)
class BoxDelta:
    """Scale-invariant center shifts plus log-space size shifts."""
    dx: float
    dy: float
    dw: float
    dh: float

    def as_array(self) -> np.ndarray:
        return np.array([self.dx, self.dy, self.dw, self.dh], dtype=np.float64)

    @staticmethod
    def from_array(a) -> "BoxDelta":
        return BoxDelta(float(a[0]), float(a[1]), float(a[2]), float(a[3]))


@dataclass(frozen=True)
class AnchorSet:
    """Reference boxes tiled over the feature grid: 4 scales x 6 ratios."""
    scales: tuple = (16.0, 32.0, 64.0, 80.0)
    ratios: tuple = (1.0, 2.0, 3.0, 5.0, 7.0, 10.0)
    stride: int = 8

    @property
    def per_cell(self) -> int:
        return len(self.scales) * len(self.ratios)

    def base_sizes(self) -> np.ndarray:
        """[per_cell, 2] of (width, height); area scale^2, width/height ratio."""
        sizes = []
        for s in self.scales:
            for r in self.ratios:
                sizes.append((s * math.sqrt(r), s / math.sqrt(r)))
        return np.array(sizes, dtype=np.float64)


def generate_anchors(feat_h: int, feat_w: int, anchor_set: AnchorSet) -> np.ndarray:
    """All anchors for a feature grid, cell-major with anchors innermost.

    Anchor index (i*feat_w + j)*per_cell + a is centered at
    ((j+0.5)*stride, (i+0.5)*stride); boxes may extend past the image.
    """
    stride = anchor_set.stride
    sizes = anchor_set.base_sizes()
    cx = (np.arange(feat_w) + 0.5) * stride
    cy = (np.arange(feat_h) + 0.5) * stride
    centers = np.stack(
        [np.repeat(cx[None, :], feat_h, axis=0).ravel(),
         np.repeat(cy[:, None], feat_w, axis=1).ravel()], axis=1)
    half = sizes / 2.0
    lo = centers[:, None, :] - half[None, :, :]
    hi = centers[:, None, :] + half[None, :, :]
    return np.concatenate([lo, hi], axis=2).reshape(-1, 4)


def iou(a, b) -> float:
    """Intersection over union of two boxes; 0 when the union has no area."""
    return float(iou_matrix(boxes_to_array([a]), boxes_to_array([b]))[0, 0])


def iou_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """[N, M] pairwise IoU of two [*, 4] box arrays."""
    a = a.reshape(-1, 4)
    b = b.reshape(-1, 4)
    ix = np.maximum(
        0.0, np.minimum(a[:, None, 2], b[None, :, 2])
        - np.maximum(a[:, None, 0], b[None, :, 0]))
    iy = np.maximum(
        0.0, np.minimum(a[:, None, 3], b[None, :, 3])
        - np.maximum(a[:, None, 1], b[None, :, 1]))
    inter = ix * iy
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    union = area_a[:, None] + area_b[None, :] - inter
    return np.where(union > 0.0, inter / np.where(union > 0.0, union, 1.0), 0.0)


def encode_deltas(gts: np.ndarray, anchors: np.ndarray) -> np.ndarray:
    """Row-wise offsets of ground-truth boxes relative to reference boxes."""
    gts = gts.reshape(-1, 4)
    anchors = anchors.reshape(-1, 4)
    wa = anchors[:, 2] - anchors[:, 0]
    ha = anchors[:, 3] - anchors[:, 1]
    if np.any(wa <= 0) or np.any(ha <= 0):
        raise ContractError("reference box with non-positive width or height")
    wg = gts[:, 2] - gts[:, 0]
    hg = gts[:, 3] - gts[:, 1]
    if np.any(wg <= 0) or np.any(hg <= 0):
        raise ContractError("ground-truth box with non-positive width or height")
    dx = ((gts[:, 0] + gts[:, 2]) - (anchors[:, 0] + anchors[:, 2])) / (2.0 * wa)
    dy = ((gts[:, 1] + gts[:, 3]) - (anchors[:, 1] + anchors[:, 3])) / (2.0 * ha)
    dw = np.log(wg / wa)
    dh = np.log(hg / ha)
    return np.stack([dx, dy, dw, dh], axis=1)


def decode_deltas(deltas: np.ndarray, anchors: np.ndarray) -> np.ndarray:
    """Inverse of encode_deltas."""
    deltas = deltas.reshape(-1, 4)
    anchors = anchors.reshape(-1, 4)
    wa = anchors[:, 2] - anchors[:, 0]
    ha = anchors[:, 3] - anchors[:, 1]
    if np.any(wa <= 0) or np.any(ha <= 0):
        raise ContractError("reference box with non-positive width or height")
    cx = (anchors[:, 0] + anchors[:, 2]) / 2.0 + deltas[:, 0] * wa
    cy = (anchors[:, 1] + anchors[:, 3]) / 2.0 + deltas[:, 1] * ha
    w = wa * np.exp(deltas[:, 2])
    h = ha * np.exp(deltas[:, 3])
    return np.stack([cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0], axis=1)


def encode_offsets(gt: Box, anchor: Box) -> BoxDelta:
    return BoxDelta.from_array(encode_deltas(gt.as_array(), anchor.as_array())[0])


def decode_offsets(delta: BoxDelta, anchor: Box) -> Box:
    return Box.from_array(decode_deltas(delta.as_array(), anchor.as_array())[0])


def clip_box(b: Box, img_w: int, img_h: int) -> Box:
    """Clamp to [0, img_w] x [0, img_h]; zero-area results are permitted."""
    if img_w < 1 or img_h < 1:
        raise ContractError(f"image size must be positive, got {img_w}x{img_h}")
    return Box(min(max(b.x1, 0.0), float(img_w)),
               min(max(b.y1, 0.0), float(img_h)),
               min(max(b.x2, 0.0), float(img_w)),
               min(max(b.y2, 0.0), float(img_h)))


def clip_boxes(boxes: np.ndarray, img_w: int, img_h: int) -> np.ndarray:
    out = boxes.reshape(-1, 4).copy()
    out[:, 0::2] = out[:, 0::2].clip(0.0, float(img_w))
    out[:, 1::2] = out[:, 1::2].clip(0.0, float(img_h))
    return out


def nms(boxes, scores, iou_threshold: float) -> list[int]:
    """Greedy non-maximum suppression.

    Candidates are visited in descending score order (ties by lower original
    index) and kept iff their IoU with every previously kept box is at most
    the threshold.  Returns kept indices in visit order.
    """
    if not 0.0 < iou_threshold < 1.0:
        raise ContractError(f"iou_threshold must be in (0, 1), got {iou_threshold}")
    arr = boxes_to_array(boxes)
    scores = np.asarray(scores, dtype=np.float64)
    if arr.shape[0] == 0:
        return []
    order = np.argsort(-scores, kind="stable")
    kept: list[int] = []
    kept_boxes = np.zeros((0, 4))
    for idx in order:
        i = int(idx)
        if kept and iou_matrix(arr[i], kept_boxes).max() > iou_threshold:
            continue
        kept.append(i)
        kept_boxes = np.vstack([kept_boxes, arr[i]])
    return kept
