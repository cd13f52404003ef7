"""Minimal reverse-mode autodiff over flat numpy storage.

Tensors hold contiguous row-major arrays.  Operations executed while a Graph
is active are recorded on its tape in execution order; Graph.backward walks
the tape in exact reverse order and accumulates gradients (+=) into every
reachable tensor that requires them.  All reductions run single-threaded in
a fixed order, so forward results are bit-identical across runs.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractError, DimensionError, NumericHealthError

_DEFAULT_DTYPE = np.float64


def set_default_dtype(dtype) -> None:
    """Select 32- or 64-bit storage for newly created tensors."""
    global _DEFAULT_DTYPE
    dt = np.dtype(dtype)
    if dt not in (np.dtype(np.float32), np.dtype(np.float64)):
        raise ContractError(f"unsupported element type {dt}, use float32 or float64")
    _DEFAULT_DTYPE = dt.type


def default_dtype():
    return _DEFAULT_DTYPE


class Tensor:
    """N-dimensional value with optional gradient tracking."""

    __slots__ = ("data", "requires_grad", "grad")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        self.data = np.ascontiguousarray(data, dtype=dtype or _DEFAULT_DTYPE)
        self.requires_grad = bool(requires_grad)
        self.grad = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractError(f"item() on tensor of shape {self.data.shape}")
        return float(self.data.reshape(()))

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.data, dtype=self.data.dtype)

    def __repr__(self):
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.data.shape}{flag})"

    # Arithmetic sugar; scalars stay plain floats (no wrapping).
    def __add__(self, other):
        return shift(self, other) if _is_number(other) else add(self, other)

    def __radd__(self, other):
        return shift(self, other)

    def __sub__(self, other):
        return shift(self, -other) if _is_number(other) else add(self, neg(other))

    def __mul__(self, other):
        return scale(self, other) if _is_number(other) else mul(self, other)

    def __rmul__(self, other):
        return scale(self, other)

    def __truediv__(self, other):
        if not _is_number(other):
            raise ContractError("tensor/tensor division is not provided")
        return scale(self, 1.0 / other)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)


def _is_number(x) -> bool:
    return isinstance(x, (int, float, np.integer, np.floating))


def tensor(data, requires_grad: bool = False, dtype=None) -> Tensor:
    return Tensor(data, requires_grad=requires_grad, dtype=dtype)


def zeros(shape, requires_grad: bool = False) -> Tensor:
    return Tensor(np.zeros(shape, dtype=_DEFAULT_DTYPE), requires_grad=requires_grad)


# ---------------------------------------------------------------------------
# Tape


class Graph:
    """Ordered record of executed operations with their backward rules."""

    def __init__(self):
        self._nodes = []

    def __enter__(self):
        _GRAPH_STACK.append(self)
        return self

    def __exit__(self, *exc):
        popped = _GRAPH_STACK.pop()
        assert popped is self, "graphs must be exited in LIFO order"
        return False

    def __len__(self):
        return len(self._nodes)

    def backward(self, loss: Tensor) -> None:
        """Propagate d(loss)/d(tensor) into .grad of every reachable tensor.

        Gradients of graph-internal tensors are rebuilt from scratch on each
        call; leaf tensors (model parameters, inputs) accumulate across calls.
        """
        if loss.size != 1:
            raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}")
        for outs, _ in self._nodes:
            for t in outs:
                t.grad = None
        _accumulate(loss, np.ones_like(loss.data))
        for outs, fn in reversed(self._nodes):
            if any(t.grad is not None for t in outs):
                fn()


_GRAPH_STACK: list[Graph] = []


def backward(loss: Tensor, graph: Graph) -> None:
    graph.backward(loss)


def _record(inputs, outputs, fn) -> None:
    if not _GRAPH_STACK:
        return
    if not any(t.requires_grad for t in inputs):
        return
    for t in outputs:
        t.requires_grad = True
    _GRAPH_STACK[-1]._nodes.append((outputs, fn))


def _accumulate(t: Tensor, g: np.ndarray) -> None:
    if not t.requires_grad:
        return
    if t.grad is None:
        t.grad = np.array(g, dtype=t.data.dtype)  # owned copy, never a view
    else:
        t.grad = t.grad + g


def _grad(t: Tensor) -> np.ndarray:
    return t.grad if t.grad is not None else np.zeros_like(t.data)


def _unbroadcast(g: np.ndarray, shape) -> np.ndarray:
    """Sum a broadcast gradient back down to the original shape."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


# ---------------------------------------------------------------------------
# Elementwise and shape operations


def add(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.data + b.data)

    def fn():
        g = out.grad
        _accumulate(a, _unbroadcast(g, a.shape))
        _accumulate(b, _unbroadcast(g, b.shape))

    _record((a, b), (out,), fn)
    return out


def mul(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.data * b.data)

    def fn():
        g = out.grad
        _accumulate(a, _unbroadcast(g * b.data, a.shape))
        _accumulate(b, _unbroadcast(g * a.data, b.shape))

    _record((a, b), (out,), fn)
    return out


def neg(a: Tensor) -> Tensor:
    out = Tensor(-a.data)
    _record((a,), (out,), lambda: _accumulate(a, -out.grad))
    return out


def scale(a: Tensor, s: float) -> Tensor:
    s = float(s)
    out = Tensor(a.data * s)
    _record((a,), (out,), lambda: _accumulate(a, out.grad * s))
    return out


def shift(a: Tensor, s: float) -> Tensor:
    out = Tensor(a.data + float(s))
    _record((a,), (out,), lambda: _accumulate(a, out.grad))
    return out


def relu(a: Tensor) -> Tensor:
    mask = a.data > 0
    out = Tensor(np.where(mask, a.data, 0.0))
    _record((a,), (out,), lambda: _accumulate(a, out.grad * mask))
    return out


def sigmoid(a: Tensor) -> Tensor:
    out = Tensor(_sigmoid(a.data))

    def fn():
        y = out.data
        _accumulate(a, out.grad * y * (1.0 - y))

    _record((a,), (out,), fn)
    return out


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # exp of a non-positive argument only, so no overflow on either tail
    z = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + z), z / (1.0 + z))


def tanh(a: Tensor) -> Tensor:
    out = Tensor(np.tanh(a.data))

    def fn():
        y = out.data
        _accumulate(a, out.grad * (1.0 - y * y))

    _record((a,), (out,), fn)
    return out


def exp(a: Tensor) -> Tensor:
    out = Tensor(np.exp(a.data))
    _record((a,), (out,), lambda: _accumulate(a, out.grad * out.data))
    return out


def log(a: Tensor) -> Tensor:
    out = Tensor(np.log(a.data))
    _record((a,), (out,), lambda: _accumulate(a, out.grad / a.data))
    return out


def smooth_l1(a: Tensor) -> Tensor:
    """Elementwise huber: 0.5*x^2 for |x|<1, |x|-0.5 otherwise."""
    x = a.data
    small = np.abs(x) < 1.0
    out = Tensor(np.where(small, 0.5 * x * x, np.abs(x) - 0.5))

    def fn():
        _accumulate(a, out.grad * np.where(small, x, np.sign(x)))

    _record((a,), (out,), fn)
    return out


def tsum(a: Tensor, axis=None) -> Tensor:
    out = Tensor(a.data.sum(axis=axis))

    def fn():
        g = out.grad
        if axis is None:
            _accumulate(a, np.broadcast_to(g, a.shape))
        else:
            _accumulate(a, np.broadcast_to(np.expand_dims(g, axis), a.shape))

    _record((a,), (out,), fn)
    return out


def softmax(a: Tensor, axis: int = -1) -> Tensor:
    """Stable softmax along one axis (max-subtraction)."""
    if a.size == 0 or a.shape[axis] == 0:
        raise DimensionError("softmax of an empty tensor")
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = Tensor(e / e.sum(axis=axis, keepdims=True))

    def fn():
        y = out.data
        g = out.grad
        _accumulate(a, y * (g - (g * y).sum(axis=axis, keepdims=True)))

    _record((a,), (out,), fn)
    return out


def log_softmax(a: Tensor, axis: int = -1) -> Tensor:
    if a.size == 0 or a.shape[axis] == 0:
        raise DimensionError("log_softmax of an empty tensor")
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    out = Tensor(shifted - lse)

    def fn():
        g = out.grad
        soft = np.exp(out.data)
        _accumulate(a, g - soft * g.sum(axis=axis, keepdims=True))

    _record((a,), (out,), fn)
    return out


def reshape(a: Tensor, shape) -> Tensor:
    out = Tensor(a.data.reshape(shape))
    _record((a,), (out,), lambda: _accumulate(a, out.grad.reshape(a.shape)))
    return out


def permute(a: Tensor, axes) -> Tensor:
    axes = tuple(axes)
    inverse = tuple(np.argsort(axes))
    out = Tensor(a.data.transpose(axes))
    _record((a,), (out,), lambda: _accumulate(a, out.grad.transpose(inverse)))
    return out


def concat(tensors, axis: int = 0) -> Tensor:
    tensors = list(tensors)
    if not tensors:
        raise DimensionError("concat of an empty sequence")
    out = Tensor(np.concatenate([t.data for t in tensors], axis=axis))
    sizes = [t.shape[axis] for t in tensors]

    def fn():
        pieces = np.split(out.grad, np.cumsum(sizes)[:-1], axis=axis)
        for t, piece in zip(tensors, pieces):
            _accumulate(t, piece)

    _record(tuple(tensors), (out,), fn)
    return out


def stack(tensors, axis: int = 0) -> Tensor:
    tensors = list(tensors)
    if not tensors:
        raise DimensionError("stack of an empty sequence")
    out = Tensor(np.stack([t.data for t in tensors], axis=axis))

    def fn():
        pieces = np.moveaxis(out.grad, axis, 0)
        for t, piece in zip(tensors, pieces):
            _accumulate(t, piece)

    _record(tuple(tensors), (out,), fn)
    return out


def index_axis(a: Tensor, axis: int, i: int) -> Tensor:
    """Select one slice along an axis, dropping that axis."""
    out = Tensor(np.take(a.data, i, axis=axis))

    def fn():
        g = np.zeros_like(a.data)
        sl = [slice(None)] * a.ndim
        sl[axis] = i
        g[tuple(sl)] = out.grad
        _accumulate(a, g)

    _record((a,), (out,), fn)
    return out


def take_rows(a: Tensor, idx) -> Tensor:
    """Gather rows along axis 0; backward scatter-adds into the source."""
    idx = np.asarray(idx, dtype=np.int64)
    out = Tensor(a.data[idx])

    def fn():
        g = np.zeros_like(a.data)
        np.add.at(g, idx, out.grad)
        _accumulate(a, g)

    _record((a,), (out,), fn)
    return out


def take_per_row(a: Tensor, cols) -> Tensor:
    """Pick one element per row of a rank-2 tensor."""
    if a.ndim != 2:
        raise DimensionError(f"take_per_row needs rank 2, got shape {a.shape}")
    cols = np.asarray(cols, dtype=np.int64)
    rows = np.arange(a.shape[0])
    out = Tensor(a.data[rows, cols])

    def fn():
        g = np.zeros_like(a.data)
        np.add.at(g, (rows, cols), out.grad)
        _accumulate(a, g)

    _record((a,), (out,), fn)
    return out


def crop2d(a: Tensor, r0: int, r1: int, c0: int, c1: int) -> Tensor:
    """Spatial crop of a [C, H, W] tensor (end-exclusive bounds)."""
    out = Tensor(a.data[:, r0:r1, c0:c1].copy())

    def fn():
        g = np.zeros_like(a.data)
        g[:, r0:r1, c0:c1] = out.grad
        _accumulate(a, g)

    _record((a,), (out,), fn)
    return out


# ---------------------------------------------------------------------------
# Linear algebra and structured operations


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul shapes do not chain: {a.shape} x {b.shape}")
    out = Tensor(a.data @ b.data)

    def fn():
        g = out.grad
        if a.requires_grad:
            _accumulate(a, g @ b.data.T)
        if b.requires_grad:
            _accumulate(b, a.data.T @ g)

    _record((a, b), (out,), fn)
    return out


def _pair(v) -> tuple[int, int]:
    return (v, v) if isinstance(v, int) else (int(v[0]), int(v[1]))


def conv2d(x: Tensor, kernels: Tensor, stride=1, padding=0,
           bias: Tensor | None = None) -> Tensor:
    """2-D cross-correlation of [C_in, H, W] with [C_out, C_in, kh, kw].

    Realized as im2col plus one matrix product; the patch matrix is kept for
    the backward pass.  `stride`/`padding` take an int or an (h, w) pair, and
    `bias` an optional per-output-channel vector.
    """
    if x.ndim != 3 or kernels.ndim != 4 or kernels.shape[1] != x.shape[0]:
        raise DimensionError(
            f"conv2d shapes do not agree: input {x.shape}, kernels {kernels.shape}")
    sh, sw = _pair(stride)
    ph, pw = _pair(padding)
    cin, h, w = x.shape
    cout, _, kh, kw = kernels.shape
    hp, wp = h + 2 * ph, w + 2 * pw
    if kh > hp or kw > wp:
        raise DimensionError(
            f"kernel {kh}x{kw} larger than padded input {hp}x{wp}")
    ho = (hp - kh) // sh + 1
    wo = (wp - kw) // sw + 1

    xp = np.zeros((cin, hp, wp), dtype=x.data.dtype)
    xp[:, ph:ph + h, pw:pw + w] = x.data
    patches = np.empty((cin, kh, kw, ho, wo), dtype=x.data.dtype)
    for di in range(kh):
        for dj in range(kw):
            patches[:, di, dj] = xp[:, di:di + sh * ho:sh, dj:dj + sw * wo:sw]
    cols = patches.reshape(cin * kh * kw, ho * wo)
    k2d = kernels.data.reshape(cout, cin * kh * kw)
    out_data = (k2d @ cols).reshape(cout, ho, wo)
    if bias is not None:
        if bias.shape != (cout,):
            raise DimensionError(
                f"conv2d bias shape {bias.shape} does not match {cout} output channels")
        out_data += bias.data[:, None, None]
    out = Tensor(out_data)

    def fn():
        g2d = out.grad.reshape(cout, ho * wo)
        if bias is not None and bias.requires_grad:
            _accumulate(bias, g2d.sum(axis=1))
        if kernels.requires_grad:
            _accumulate(kernels, (g2d @ cols.T).reshape(kernels.shape))
        if x.requires_grad:
            dcols = (k2d.T @ g2d).reshape(cin, kh, kw, ho, wo)
            dxp = np.zeros_like(xp)
            for di in range(kh):
                for dj in range(kw):
                    dxp[:, di:di + sh * ho:sh, dj:dj + sw * wo:sw] += dcols[:, di, dj]
            _accumulate(x, dxp[:, ph:ph + h, pw:pw + w])

    inputs = (x, kernels) if bias is None else (x, kernels, bias)
    _record(inputs, (out,), fn)
    return out


def even_bin_edges(extent: int, bins: int) -> list[tuple[int, int]]:
    """Even partition of [0, extent) into `bins` half-open spans.

    Span r is [floor(r*extent/bins), floor((r+1)*extent/bins)).  When the
    extent is smaller than the bin count, spans are widened to one cell and
    may repeat cells so that every bin stays non-empty.
    """
    edges = []
    for r in range(bins):
        start = (r * extent) // bins
        end = (r + 1) * extent // bins
        start = min(start, extent - 1)
        end = min(extent, max(end, start + 1))
        edges.append((start, end))
    return edges


def pool_bins(x: Tensor, row_edges, col_edges):
    """Per-bin per-channel max over explicit bin spans of a [C, H, W] tensor.

    Returns the pooled tensor [C, rows, cols] and an int map of the argmax
    positions as flat indices into the input; backward routes the incoming
    gradient to exactly those positions.
    """
    c, h, w = x.shape
    rows, cols = len(row_edges), len(col_edges)
    uniform = (
        h % rows == 0 and w % cols == 0
        and all(e - s == h // rows for s, e in row_edges)
        and all(e - s == w // cols for s, e in col_edges)
    )
    if uniform:
        bh, bw = h // rows, w // cols
        blocks = x.data.reshape(c, rows, bh, cols, bw).transpose(0, 1, 3, 2, 4)
        flat = blocks.reshape(c, rows, cols, bh * bw)
        local = flat.argmax(axis=3)
        out_data = np.take_along_axis(flat, local[..., None], axis=3)[..., 0]
        rr = np.asarray([s for s, _ in row_edges])[None, :, None] + local // bw
        cc = np.asarray([s for s, _ in col_edges])[None, None, :] + local % bw
        argmax = (np.arange(c)[:, None, None] * h + rr) * w + cc
    else:
        out_data = np.empty((c, rows, cols), dtype=x.data.dtype)
        argmax = np.empty((c, rows, cols), dtype=np.int64)
        chan = np.arange(c)
        for r, (r0, r1) in enumerate(row_edges):
            for q, (c0, c1) in enumerate(col_edges):
                block = x.data[:, r0:r1, c0:c1].reshape(c, -1)
                local = block.argmax(axis=1)
                out_data[:, r, q] = block[chan, local]
                bw = c1 - c0
                argmax[:, r, q] = (chan * h + r0 + local // bw) * w + c0 + local % bw
    out = Tensor(out_data)

    def fn():
        g = np.zeros(c * h * w, dtype=x.data.dtype)
        np.add.at(g, argmax.ravel(), out.grad.ravel())
        _accumulate(x, g.reshape(c, h, w))

    _record((x,), (out,), fn)
    return out, argmax


def max_pool_bins(x: Tensor, rows: int, cols: int):
    """Even-partition max pooling of [C, H, W] down to [C, rows, cols]."""
    if x.ndim != 3:
        raise DimensionError(f"max_pool_bins needs rank 3, got shape {x.shape}")
    _, h, w = x.shape
    if rows > h or cols > w:
        raise DimensionError(
            f"cannot pool {h}x{w} input into {rows}x{cols} bins")
    return pool_bins(x, even_bin_edges(h, rows), even_bin_edges(w, cols))


class LstmParams:
    """One LSTM cell: input weights [D, 4R], recurrent weights [R, 4R], bias [4R].

    Gate order along the last axis is input, forget, candidate, output.
    """

    def __init__(self, wx: Tensor, wh: Tensor, b: Tensor):
        self.wx = wx
        self.wh = wh
        self.b = b

    @property
    def hidden_size(self) -> int:
        return self.wh.shape[0]

    @property
    def input_size(self) -> int:
        return self.wx.shape[0]

    def tensors(self):
        return {"wx": self.wx, "wh": self.wh, "b": self.b}


def lstm_cell(x: Tensor, h_prev: Tensor, c_prev: Tensor, params: LstmParams):
    """Single LSTM step; accepts vectors or [B, .] batches (all ranks equal).

    Fused forward/backward: the whole step is one tape node.
    """
    if not (x.ndim == h_prev.ndim == c_prev.ndim) or x.ndim not in (1, 2):
        raise DimensionError(
            f"lstm_cell rank mismatch: x {x.shape}, h {h_prev.shape}, c {c_prev.shape}")
    r = params.hidden_size
    if x.shape[-1] != params.input_size or h_prev.shape[-1] != r or c_prev.shape[-1] != r:
        raise DimensionError(
            f"lstm_cell size mismatch: x {x.shape}, h {h_prev.shape}, "
            f"wx {params.wx.shape}, wh {params.wh.shape}")
    batched = x.ndim == 2
    xd = x.data if batched else x.data[None, :]
    hd = h_prev.data if batched else h_prev.data[None, :]
    cd = c_prev.data if batched else c_prev.data[None, :]

    z = xd @ params.wx.data + hd @ params.wh.data + params.b.data
    gi = _sigmoid(z[:, :r])
    gf = _sigmoid(z[:, r:2 * r])
    gg = np.tanh(z[:, 2 * r:3 * r])
    go = _sigmoid(z[:, 3 * r:])
    c_new = gf * cd + gi * gg
    tc = np.tanh(c_new)
    h_new = go * tc

    h_out = Tensor(h_new if batched else h_new[0])
    c_out = Tensor(c_new if batched else c_new[0])

    def fn():
        dh = _grad(h_out)
        dcx = _grad(c_out)
        if not batched:
            dh = dh[None, :]
            dcx = dcx[None, :]
        do = dh * tc
        dc = dcx + dh * go * (1.0 - tc * tc)
        dz = np.concatenate([
            dc * gg * gi * (1.0 - gi),
            dc * cd * gf * (1.0 - gf),
            dc * gi * (1.0 - gg * gg),
            do * go * (1.0 - go),
        ], axis=1)
        if x.requires_grad:
            g = dz @ params.wx.data.T
            _accumulate(x, g if batched else g[0])
        if h_prev.requires_grad:
            g = dz @ params.wh.data.T
            _accumulate(h_prev, g if batched else g[0])
        if c_prev.requires_grad:
            g = dc * gf
            _accumulate(c_prev, g if batched else g[0])
        _accumulate(params.wx, xd.T @ dz)
        _accumulate(params.wh, hd.T @ dz)
        _accumulate(params.b, dz.sum(axis=0))

    _record((x, h_prev, c_prev, params.wx, params.wh, params.b),
            (h_out, c_out), fn)
    return h_out, c_out


# ---------------------------------------------------------------------------
# Optimizer


class Adam:
    """ADAM with bias correction; per-call learning rates, shared step count."""

    def __init__(self, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}

    def step(self, named_params: dict[str, Tensor], lr) -> None:
        """Apply one update. `lr` is a float or a name -> rate mapping.

        Parameters without a gradient are skipped; a NaN or infinite gradient
        rejects the whole update.
        """
        rate = (lambda n: lr[n]) if isinstance(lr, dict) else (lambda n: lr)
        updates = []
        for name, p in named_params.items():
            if p.grad is None:
                continue
            if not np.isfinite(p.grad).all():
                raise NumericHealthError(f"non-finite gradient for parameter '{name}'")
            updates.append((name, p, rate(name)))
        self.step_count += 1
        t = self.step_count
        for name, p, eta in updates:
            if eta <= 0.0:
                continue
            g = p.grad
            m = self._m.get(name)
            v = self._v.get(name)
            if m is None:
                m = np.zeros_like(p.data)
                v = np.zeros_like(p.data)
            m = self.beta1 * m + (1.0 - self.beta1) * g
            v = self.beta2 * v + (1.0 - self.beta2) * (g * g)
            self._m[name] = m
            self._v[name] = v
            m_hat = m / (1.0 - self.beta1 ** t)
            v_hat = v / (1.0 - self.beta2 ** t)
            p.data -= eta * m_hat / (np.sqrt(v_hat) + self.eps)


def adam_step(named_params: dict[str, Tensor], state: Adam, lr) -> None:
    state.step(named_params, lr)


# ---------------------------------------------------------------------------
# Finite-difference verification


def finite_diff_check(loss_fn, named_params: dict[str, Tensor], eps: float = 1e-5,
                      max_elements: int | None = None, seed: int = 0,
                      grad_floor: float = 1e-6) -> dict[str, float]:
    """Max relative error of stored analytic grads vs central differences.

    `loss_fn` re-evaluates the loss as a plain float from current parameter
    data.  Elements where both gradients are below `grad_floor` in magnitude
    are skipped.  Large tensors are subsampled down to `max_elements`.
    """
    rng = np.random.default_rng(seed)
    report = {}
    for name, p in named_params.items():
        analytic = p.grad.ravel() if p.grad is not None else np.zeros(p.size)
        flat = p.data.ravel()
        if max_elements is not None and p.size > max_elements:
            elems = rng.choice(p.size, size=max_elements, replace=False)
        else:
            elems = range(p.size)
        worst = 0.0
        for i in elems:
            orig = flat[i]
            flat[i] = orig + eps
            lp = loss_fn()
            flat[i] = orig - eps
            lm = loss_fn()
            flat[i] = orig
            numeric = (lp - lm) / (2.0 * eps)
            ref = max(abs(analytic[i]), abs(numeric))
            if ref > grad_floor:
                worst = max(worst, abs(analytic[i] - numeric) / ref)
        report[name] = worst
    return report
