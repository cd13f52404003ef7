"""Convolutional feature extractor: a VGG-16-shaped stack of thirteen 3x3
convolutions in five blocks, keeping only the max-pool layers after blocks
one, two and four, so the total downsampling is 1/8 in both axes."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import engine
from .engine import Tensor
from .errors import DimensionError

FULL_CHANNELS = (64, 64, 128, 128, 256, 256, 256, 512, 512, 512, 512, 512, 512)
BLOCK_SIZES = (2, 2, 3, 3, 3)
POOL_AFTER = frozenset({1, 2, 4})  # 1-indexed blocks followed by 2x2 pooling


@dataclass(frozen=True)
class BackboneConfig:
    channel_scale: float = 0.125
    frozen_prefix: int = 4  # leading conv layers excluded from updates

    def channels(self) -> tuple[int, ...]:
        return tuple(max(8, math.ceil(c * self.channel_scale)) for c in FULL_CHANNELS)

    @property
    def out_channels(self) -> int:
        return self.channels()[-1]


class BackboneParams:
    """Kernel and bias tensors for each conv layer, in network order."""

    def __init__(self, layers: list[tuple[Tensor, Tensor]]):
        self.layers = layers

    def tensors(self) -> dict[str, Tensor]:
        named = {}
        for i, (k, b) in enumerate(self.layers):
            named[f"conv{i:02d}.kernel"] = k
            named[f"conv{i:02d}.bias"] = b
        return named


def init_backbone(cfg: BackboneConfig, rng: np.random.Generator) -> BackboneParams:
    """Gaussian kernels scaled by fan-in (std sqrt(2/fan_in)), zero biases.

    Thirteen random layers attenuate any fixed-std signal to nothing, so the
    variance-preserving scale is what keeps the top of the stack alive when
    training from scratch.  Layers below `frozen_prefix` are created without
    gradient tracking.
    """
    layers = []
    cin = 3
    for i, cout in enumerate(cfg.channels()):
        fan_in = cin * 9
        kernel = rng.normal(0.0, math.sqrt(2.0 / fan_in), size=(cout, cin, 3, 3))
        trainable = i >= cfg.frozen_prefix
        layers.append((Tensor(kernel, requires_grad=trainable),
                       Tensor(np.zeros(cout), requires_grad=trainable)))
        cin = cout
    return BackboneParams(layers)


def extract_features(image: Tensor, params: BackboneParams,
                     cfg: BackboneConfig) -> Tensor:
    """[3, H, W] image to [C, H/8, W/8] features (floor semantics per pool).

    Callers pad images to multiples of 8 so the three pools divide evenly.
    """
    if image.ndim != 3 or image.shape[0] != 3:
        raise DimensionError(f"expected a [3, H, W] image, got {image.shape}")
    h, w = image.shape[1], image.shape[2]
    if h < 8 or w < 8:
        raise DimensionError(f"image {h}x{w} is smaller than the 8x8 minimum")
    x = image
    layer = 0
    for block, n_convs in enumerate(BLOCK_SIZES, start=1):
        for _ in range(n_convs):
            kernel, bias = params.layers[layer]
            x = engine.relu(engine.conv2d(x, kernel, stride=1, padding=1, bias=bias))
            layer += 1
        if block in POOL_AFTER:
            _, hh, ww = x.shape
            x, _ = engine.max_pool_bins(x, hh // 2, ww // 2)
    return x
