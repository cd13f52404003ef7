"""Region feature encoder.

Regions are max-pooled to a fixed height but a width proportional to their
aspect ratio (capped), the pooled columns are flattened, and an LSTM pass
over the column sequence yields a fixed-length region code plus per-column
context.  Regions that pool to the same width are batched through the LSTM.
"""

from __future__ import annotations

import math

import numpy as np

from . import engine
from .engine import LstmParams, Tensor
from .errors import ContractError
from .geometry import Box, boxes_to_array


def pooled_width(h: float, w: float, pool_height: int = 4, width_max: int = 35) -> int:
    """Column count for a region of size h x w: round(2*H*w/h), clamped.

    The 1:2 pooling window (twice the region's aspect ratio) keeps narrow
    characters apart; rounding is to nearest with ties up.
    """
    if h <= 0 or w <= 0:
        raise ContractError(f"region size must be positive, got {w}x{h}")
    value = 2.0 * pool_height * w / h
    return int(min(width_max, max(1, math.floor(value + 0.5))))


def map_roi_to_grid(box: Box, stride: int, feat_w: int, feat_h: int):
    """Image-space box to feature-grid rows/cols, end-exclusive.

    x1 is floored and x2 ceiled (same for y), then clamped to the grid.  If
    rounding collapses the span, it expands to the single nearest valid cell,
    so the result is always at least 1x1.
    """
    c0 = max(0, min(feat_w - 1, math.floor(box.x1 / stride)))
    c1 = max(1, min(feat_w, math.ceil(box.x2 / stride)))
    r0 = max(0, min(feat_h - 1, math.floor(box.y1 / stride)))
    r1 = max(1, min(feat_h, math.ceil(box.y2 / stride)))
    if c1 <= c0:
        mid = max(0, min(feat_w - 1, math.floor((box.x1 + box.x2) / 2.0 / stride)))
        c0, c1 = mid, mid + 1
    if r1 <= r0:
        mid = max(0, min(feat_h - 1, math.floor((box.y1 + box.y2) / 2.0 / stride)))
        r0, r1 = mid, mid + 1
    return r0, r1, c0, c1


def roi_pool(features: Tensor, box: Box, stride: int = 8, pool_height: int = 4,
             width_max: int = 35, fixed_width: int | None = None) -> Tensor:
    """Pool one region to [C, pool_height, W_r].

    W_r follows the region's aspect ratio unless `fixed_width` forces the
    conventional fixed-size grid.  When the mapped feature rectangle has
    fewer cells than bins, bins repeat cells instead of going empty.
    """
    if fixed_width is not None:
        w_r = fixed_width
    else:
        w_r = pooled_width(box.height, box.width, pool_height, width_max)
    _, fh, fw = features.shape
    r0, r1, c0, c1 = map_roi_to_grid(box, stride, fw, fh)
    sub = engine.crop2d(features, r0, r1, c0, c1)
    pooled, _ = engine.pool_bins(sub,
                                 engine.even_bin_edges(r1 - r0, pool_height),
                                 engine.even_bin_edges(c1 - c0, w_r))
    return pooled


def flatten_columns(pooled: Tensor) -> Tensor:
    """[C, H, W] to the column sequence [W, C*H]; column t is Q[:, :, t]
    flattened channel-major.  Checkpoints depend on this order."""
    c, h, w = pooled.shape
    return engine.reshape(engine.permute(pooled, (2, 0, 1)), (w, c * h))


class RegionCode:
    """Fixed-length code plus per-column context for one region.

    Backed either by this region's own hidden states or by rows of a batched
    LSTM run; both expose the same accessors.
    """

    def __init__(self, steps: list[Tensor], row: int | None, width: int):
        self._steps = steps
        self._row = row
        self.width = width
        self._final = None
        self._matrix = None

    @property
    def final(self) -> Tensor:
        """Last hidden state h_W, the fixed-length region representation."""
        if self._final is None:
            last = self._steps[-1]
            self._final = last if self._row is None else engine.index_axis(last, 0, self._row)
        return self._final

    @property
    def context(self) -> list[Tensor]:
        """Hidden states h_1 .. h_W, one per pooled column."""
        if self._row is None:
            return list(self._steps)
        return [engine.index_axis(s, 0, self._row) for s in self._steps]

    def context_matrix(self) -> Tensor:
        """[W, R] matrix of the context sequence."""
        if self._matrix is None:
            self._matrix = engine.stack(self.context, axis=0)
        return self._matrix


def run_lstm_steps(columns: Tensor, params: LstmParams) -> list[Tensor]:
    """Run an LSTM over [W, D] or [B, W, D] columns from zero initial state;
    returns the hidden state after every step."""
    batched = columns.ndim == 3
    steps = columns.shape[1] if batched else columns.shape[0]
    r = params.hidden_size
    shape = (columns.shape[0], r) if batched else (r,)
    h = Tensor(np.zeros(shape))
    c = Tensor(np.zeros(shape))
    hidden = []
    for t in range(steps):
        x = engine.index_axis(columns, 1 if batched else 0, t)
        h, c = engine.lstm_cell(x, h, c, params)
        hidden.append(h)
    return hidden


def encode_regions(features: Tensor, boxes, params: LstmParams, stride: int = 8,
                   pool_height: int = 4, width_max: int = 35,
                   fixed_width: int | None = None) -> list[RegionCode]:
    """Encode many regions, batching those that pool to the same width."""
    arr = boxes_to_array(boxes)
    codes: list = [None] * arr.shape[0]
    buckets: dict[int, list[int]] = {}
    mats: dict[int, Tensor] = {}
    for i, row in enumerate(arr):
        box = Box.from_array(row)
        pooled = roi_pool(features, box, stride, pool_height, width_max, fixed_width)
        mats[i] = flatten_columns(pooled)
        buckets.setdefault(pooled.shape[2], []).append(i)
    for width in sorted(buckets):
        members = buckets[width]
        if len(members) == 1:
            i = members[0]
            steps = run_lstm_steps(mats[i], params)
            codes[i] = RegionCode(steps, None, width)
        else:
            stacked = engine.stack([mats[i] for i in members], axis=0)
            steps = run_lstm_steps(stacked, params)
            for b, i in enumerate(members):
                codes[i] = RegionCode(steps, b, width)
    return codes


def encode_region(features: Tensor, box: Box, params: LstmParams, stride: int = 8,
                  pool_height: int = 4, width_max: int = 35,
                  fixed_width: int | None = None) -> RegionCode:
    return encode_regions(features, [box], params, stride, pool_height,
                          width_max, fixed_width)[0]


def init_lstm(input_size: int, hidden_size: int, rng: np.random.Generator,
              forget_bias: float = 1.0) -> LstmParams:
    """Fan-in-scaled Gaussian weights; forget gate biased open."""
    wx = rng.normal(0.0, math.sqrt(1.0 / input_size), size=(input_size, 4 * hidden_size))
    wh = rng.normal(0.0, math.sqrt(1.0 / hidden_size), size=(hidden_size, 4 * hidden_size))
    b = np.zeros(4 * hidden_size)
    b[hidden_size:2 * hidden_size] = forget_bias
    return LstmParams(Tensor(wx, requires_grad=True),
                      Tensor(wh, requires_grad=True),
                      Tensor(b, requires_grad=True))
