"""Text proposal network: two rectangle filters slide over the backbone
features, their concatenation feeds sibling 1x1 heads that score and regress
24 anchors per feature cell, and the ranked decoded boxes become proposals."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import engine
from .engine import Tensor
from .errors import DimensionError
from .geometry import Box, clip_boxes, decode_deltas, encode_deltas, iou_matrix


@dataclass(frozen=True)
class TpnConfig:
    filters: int = 256       # per rectangle branch; heads see twice this
    top_n: int = 300
    min_box_size: float = 4.0


@dataclass
class TpnParams:
    branch_a_kernel: Tensor  # [F, C, 3, 5], wide local context
    branch_a_bias: Tensor
    branch_b_kernel: Tensor  # [F, C, 1, 3], narrow row context
    branch_b_bias: Tensor
    cls_kernel: Tensor       # [2k, 2F, 1, 1]
    cls_bias: Tensor
    reg_kernel: Tensor       # [4k, 2F, 1, 1]
    reg_bias: Tensor

    def tensors(self) -> dict[str, Tensor]:
        return {
            "branch_a.kernel": self.branch_a_kernel, "branch_a.bias": self.branch_a_bias,
            "branch_b.kernel": self.branch_b_kernel, "branch_b.bias": self.branch_b_bias,
            "cls.kernel": self.cls_kernel, "cls.bias": self.cls_bias,
            "reg.kernel": self.reg_kernel, "reg.bias": self.reg_bias,
        }


@dataclass
class TpnOutput:
    scores: Tensor  # [2k, fh, fw] text/non-text logits per anchor
    deltas: Tensor  # [4k, fh, fw]
    anchors_per_cell: int


@dataclass(frozen=True)
class Proposal:
    box: Box
    textness: float


def init_tpn(cfg: TpnConfig, in_channels: int, anchors_per_cell: int,
             rng: np.random.Generator) -> TpnParams:
    f = cfg.filters
    k = anchors_per_cell

    def conv(cout, cin, kh, kw, std):
        return Tensor(rng.normal(0.0, std, size=(cout, cin, kh, kw)), requires_grad=True)

    def bias(n):
        return Tensor(np.zeros(n), requires_grad=True)

    return TpnParams(
        branch_a_kernel=conv(f, in_channels, 3, 5, math.sqrt(2.0 / (in_channels * 15))),
        branch_a_bias=bias(f),
        branch_b_kernel=conv(f, in_channels, 1, 3, math.sqrt(2.0 / (in_channels * 3))),
        branch_b_bias=bias(f),
        cls_kernel=conv(2 * k, 2 * f, 1, 1, 0.01),
        cls_bias=bias(2 * k),
        reg_kernel=conv(4 * k, 2 * f, 1, 1, 0.01),
        reg_bias=bias(4 * k),
    )


def tpn_forward(features: Tensor, params: TpnParams) -> TpnOutput:
    """Score and regress every anchor of every feature cell."""
    _, fh, fw = features.shape
    if fh < 3 or fw < 5:
        raise DimensionError(
            f"feature map {fh}x{fw} is smaller than the 3x5 filter support")
    a = engine.relu(engine.conv2d(features, params.branch_a_kernel,
                                  stride=1, padding=(1, 2), bias=params.branch_a_bias))
    b = engine.relu(engine.conv2d(features, params.branch_b_kernel,
                                  stride=1, padding=(0, 1), bias=params.branch_b_bias))
    merged = engine.concat([a, b], axis=0)
    scores = engine.conv2d(merged, params.cls_kernel, bias=params.cls_bias)
    deltas = engine.conv2d(merged, params.reg_kernel, bias=params.reg_bias)
    k = params.cls_kernel.shape[0] // 2
    return TpnOutput(scores=scores, deltas=deltas, anchors_per_cell=k)


def scores_per_anchor(out: TpnOutput) -> Tensor:
    """[A, 2] logits aligned with generate_anchors ordering (cell-major)."""
    k = out.anchors_per_cell
    _, fh, fw = out.scores.shape
    grouped = engine.reshape(out.scores, (k, 2, fh, fw))
    return engine.reshape(engine.permute(grouped, (2, 3, 0, 1)), (fh * fw * k, 2))


def deltas_per_anchor(out: TpnOutput) -> Tensor:
    """[A, 4] offsets in the same anchor order as scores_per_anchor."""
    k = out.anchors_per_cell
    _, fh, fw = out.deltas.shape
    grouped = engine.reshape(out.deltas, (k, 4, fh, fw))
    return engine.reshape(engine.permute(grouped, (2, 3, 0, 1)), (fh * fw * k, 4))


def textness_from_logits(logits: np.ndarray) -> np.ndarray:
    """Two-class softmax, text column, from [A, 2] raw logits."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e[:, 1] / e.sum(axis=1)


@dataclass
class AnchorSample:
    """Training mini-batch drawn from one image's anchors."""
    pos_indices: np.ndarray   # anchor indices labelled text
    neg_indices: np.ndarray   # anchor indices labelled non-text
    target_deltas: np.ndarray  # [n_pos, 4] offsets to the matched ground truth
    empty: bool = False       # nothing could be sampled

    @property
    def indices(self) -> np.ndarray:
        return np.concatenate([self.pos_indices, self.neg_indices])

    @property
    def labels(self) -> np.ndarray:
        return np.concatenate([np.ones(len(self.pos_indices), dtype=np.int64),
                               np.zeros(len(self.neg_indices), dtype=np.int64)])


def sample_anchors(anchors: np.ndarray, gt_boxes: np.ndarray,
                   rng: np.random.Generator, n: int = 256, pos_max: int = 128,
                   pos_iou: float = 0.7, neg_iou: float = 0.3) -> AnchorSample:
    """Label anchors against ground truth and draw a balanced mini-batch.

    Positive: IoU above `pos_iou` with some box, or the (lowest-index)
    best-overlapping anchor of a box, so every box trains at least one
    anchor.  Negative: best IoU below `neg_iou`.  The IoU band in between is
    ignored.  Up to `pos_max` positives are kept, negatives fill to `n`.
    """
    n_anchors = anchors.shape[0]
    gt_boxes = np.asarray(gt_boxes, dtype=np.float64).reshape(-1, 4)
    if gt_boxes.shape[0] == 0:
        neg = np.arange(n_anchors)
        take = min(n, n_anchors)
        chosen = np.sort(rng.choice(n_anchors, size=take, replace=False))
        return AnchorSample(np.zeros(0, dtype=np.int64), chosen,
                            np.zeros((0, 4)), empty=take == 0)
    overlaps = iou_matrix(anchors, gt_boxes)
    best_iou = overlaps.max(axis=1)
    best_gt = overlaps.argmax(axis=1)
    pos_mask = best_iou > pos_iou
    for g in range(gt_boxes.shape[0]):
        top = overlaps[:, g].max()
        if top > 0.0:
            pos_mask[int(overlaps[:, g].argmax())] = True
    neg_mask = (best_iou < neg_iou) & ~pos_mask
    pos_idx = np.flatnonzero(pos_mask)
    if len(pos_idx) > pos_max:
        pos_idx = np.sort(rng.choice(pos_idx, size=pos_max, replace=False))
    neg_idx = np.flatnonzero(neg_mask)
    need = min(n - len(pos_idx), len(neg_idx))
    if need > 0:
        neg_idx = np.sort(rng.choice(neg_idx, size=need, replace=False))
    else:
        neg_idx = np.zeros(0, dtype=np.int64)
    if len(pos_idx) == 0 and len(neg_idx) == 0:
        return AnchorSample(pos_idx, neg_idx, np.zeros((0, 4)), empty=True)
    targets = encode_deltas(gt_boxes[best_gt[pos_idx]], anchors[pos_idx]) \
        if len(pos_idx) else np.zeros((0, 4))
    return AnchorSample(pos_idx, neg_idx, targets)


def generate_proposals(out: TpnOutput, anchors: np.ndarray, img_w: int, img_h: int,
                       top_n: int = 300, min_size: float = 4.0):
    """Decode, clip, size-filter and rank all anchors by textness.

    Returns (boxes [P, 4], textness [P]) with P <= top_n, textness
    non-increasing.  Operates on raw values: no gradient flows through
    proposal coordinates.
    """
    k = out.anchors_per_cell
    _, fh, fw = out.scores.shape
    logits = np.ascontiguousarray(
        out.scores.data.reshape(k, 2, fh, fw).transpose(2, 3, 0, 1)).reshape(-1, 2)
    deltas = np.ascontiguousarray(
        out.deltas.data.reshape(k, 4, fh, fw).transpose(2, 3, 0, 1)).reshape(-1, 4)
    textness = textness_from_logits(logits)
    boxes = clip_boxes(decode_deltas(deltas, anchors), img_w, img_h)
    big = ((boxes[:, 2] - boxes[:, 0]) >= min_size) & \
          ((boxes[:, 3] - boxes[:, 1]) >= min_size)
    keep = np.flatnonzero(big)
    order = keep[np.argsort(-textness[keep], kind="stable")][:top_n]
    return boxes[order], textness[order]


def proposals_as_list(boxes: np.ndarray, textness: np.ndarray) -> list[Proposal]:
    return [Proposal(Box.from_array(b), float(s)) for b, s in zip(boxes, textness)]
