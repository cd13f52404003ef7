"""Synthetic word-image generator with exact ground truth.

Words are stamped from the embedded bitmap font onto pure-color (level 1) or
cluttered (level 2) backgrounds.  Boxes are tight by construction and every
output byte is a deterministic function of (spec, seed).

File formats: binary PPM (P6) images, JSON-lines annotations
({"image", "x1", "y1", "x2", "y2", "text"}), and a JSON manifest.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from . import fontdata
from .errors import ContractError, PlacementError
from .geometry import Box, iou_matrix


class GlyphFont:
    """Per-symbol binary masks on a fixed cell, plus inter-glyph spacing."""

    def __init__(self, raw: dict | None = None):
        raw = raw or fontdata.raw_glyphs()
        self.cell_w = fontdata.GLYPH_W
        self.cell_h = fontdata.GLYPH_H
        self.spacing = fontdata.GLYPH_GAP
        self.masks = {
            ch: np.array([[c == "X" for c in row] for row in rows], dtype=bool)
            for ch, rows in raw.items()
        }
        for ch, mask in self.masks.items():
            if not mask.any():
                raise ContractError(f"glyph {ch!r} has an empty mask")

    def word_mask(self, word: str) -> np.ndarray:
        """Boolean [cell_h, 5n + (n-1)] mask for a word, glyphs one gap apart."""
        if not word:
            raise ContractError("cannot render an empty word")
        columns = []
        for i, ch in enumerate(word):
            if ch not in self.masks:
                raise ContractError(f"no glyph for character {ch!r}")
            if i:
                columns.append(np.zeros((self.cell_h, self.spacing), dtype=bool))
            columns.append(self.masks[ch])
        return np.concatenate(columns, axis=1)


_FONT = GlyphFont()


@dataclass(frozen=True)
class Annotation:
    """Ground-truth box (tight around glyph pixels) plus its transcription."""
    box: Box
    text: str


@dataclass(frozen=True)
class SceneSpec:
    canvas_w: int = 256
    canvas_h: int = 128
    min_words: int = 1
    max_words: int = 4
    scale_choices: tuple = (2.0, 3.0)
    level: int = 1
    min_contrast: int = 96
    min_gap: int = 4
    clutter_count: int = 10
    noise_level: int = 0
    lexicon: tuple = fontdata.LEXICON

    def __post_init__(self):
        if self.level not in (1, 2):
            raise ContractError(f"complexity level must be 1 or 2, got {self.level}")
        if self.min_contrast <= 0:
            raise ContractError("min_contrast must be positive")
        if not self.lexicon:
            raise ContractError("lexicon is empty")


def _scaled_mask(word: str, scale: float) -> np.ndarray:
    """Nearest-neighbor upscale: destination pixel (i, j) copies source
    (floor(i/scale), floor(j/scale)), so source cell [a, b) lands exactly on
    destination [a*scale, b*scale)."""
    base = _FONT.word_mask(word)
    h, w = base.shape
    out_h = math.ceil(h * scale - 1e-9)
    out_w = math.ceil(w * scale - 1e-9)
    rows = np.minimum((np.arange(out_h) / scale).astype(np.int64), h - 1)
    cols = np.minimum((np.arange(out_w) / scale).astype(np.int64), w - 1)
    return base[np.ix_(rows, cols)]


def render_word(word: str, scale: float, color, position, canvas: np.ndarray) -> Annotation:
    """Stamp a word onto the canvas (in place) and return its annotation.

    `position` is the integer top-left pixel.  Raises PlacementError when the
    scaled word does not fit; the caller is expected to resample.
    """
    mask = _scaled_mask(word, scale)
    h, w = mask.shape
    x, y = int(position[0]), int(position[1])
    ch, cw = canvas.shape[:2]
    if x < 0 or y < 0 or x + w > cw or y + h > ch:
        raise PlacementError(
            f"word {word!r} at scale {scale} does not fit at ({x}, {y}) "
            f"on a {cw}x{ch} canvas")
    region = canvas[y:y + h, x:x + w]
    region[mask] = np.asarray(color, dtype=np.uint8)
    return Annotation(Box(float(x), float(y), float(x + w), float(y + h)), word)


def _contrasting_color(rng, reference: np.ndarray, min_contrast: int) -> np.ndarray:
    while True:
        color = rng.integers(0, 256, size=3)
        if int(np.abs(color.astype(int) - reference.astype(int)).max()) >= min_contrast:
            return color.astype(np.uint8)


def _plan_words(spec: SceneSpec, rng) -> tuple[np.ndarray, list]:
    """Background color and non-overlapping word placements.

    All randomness that affects word geometry is drawn here, before any
    clutter, so a level-2 scene matches its level-1 counterpart inside boxes.
    """
    background = rng.integers(0, 256, size=3).astype(np.uint8)
    n_words = int(rng.integers(spec.min_words, spec.max_words + 1))
    placed = []  # (word, scale, color, x, y, w, h)
    occupied = np.zeros((0, 4))
    for _ in range(n_words):
        word = spec.lexicon[rng.integers(len(spec.lexicon))]
        scale = float(spec.scale_choices[rng.integers(len(spec.scale_choices))])
        color = _contrasting_color(rng, background, spec.min_contrast)
        mask_shape = _scaled_mask(word, scale).shape
        h, w = mask_shape
        if w >= spec.canvas_w or h >= spec.canvas_h:
            continue  # cannot fit at all; recorded as a dropped word
        for _attempt in range(100):
            x = int(rng.integers(0, spec.canvas_w - w))
            y = int(rng.integers(0, spec.canvas_h - h))
            gap = spec.min_gap
            candidate = np.array([[x - gap, y - gap, x + w + gap, y + h + gap]],
                                 dtype=np.float64)
            if occupied.shape[0] and iou_matrix(candidate, occupied).max() > 0:
                continue
            placed.append((word, scale, color, x, y, w, h))
            occupied = np.vstack([occupied, candidate])
            break
    return background, placed


def _draw_clutter(canvas: np.ndarray, spec: SceneSpec, rng, keep_out: np.ndarray) -> None:
    """Random rectangles, ellipses, and pixel noise, masked away from word boxes."""
    h, w = canvas.shape[:2]
    allowed = np.ones((h, w), dtype=bool)
    for x1, y1, x2, y2 in keep_out.astype(int):
        allowed[y1:y2, x1:x2] = False
    yy, xx = np.mgrid[0:h, 0:w]
    for _ in range(spec.clutter_count):
        color = rng.integers(0, 256, size=3).astype(np.uint8)
        kind = int(rng.integers(0, 2))
        cx = float(rng.uniform(0, w))
        cy = float(rng.uniform(0, h))
        rx = float(rng.uniform(4, w / 4))
        ry = float(rng.uniform(3, h / 4))
        if kind == 0:
            shape = (np.abs(xx - cx) < rx) & (np.abs(yy - cy) < ry)
        else:
            shape = ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 < 1.0
        canvas[shape & allowed] = color
    if spec.noise_level > 0:
        noise = rng.integers(-spec.noise_level, spec.noise_level + 1,
                             size=canvas.shape)
        noisy = np.clip(canvas.astype(int) + noise, 0, 255).astype(np.uint8)
        canvas[allowed] = noisy[allowed]


def generate_image(spec: SceneSpec, rng) -> tuple[np.ndarray, list[Annotation]]:
    """One scene: uint8 [H, W, 3] image plus exact annotations."""
    background, placed = _plan_words(spec, rng)
    canvas = np.empty((spec.canvas_h, spec.canvas_w, 3), dtype=np.uint8)
    canvas[:] = background
    if spec.level == 2:
        boxes = np.array([[x, y, x + w, y + h] for (_, _, _, x, y, w, h) in placed],
                         dtype=np.float64).reshape(-1, 4)
        _draw_clutter(canvas, spec, rng, boxes)
    annotations = []
    for word, scale, color, x, y, _w, _h in placed:
        annotations.append(render_word(word, scale, color, (x, y), canvas))
    return canvas, annotations


# ---------------------------------------------------------------------------
# PPM and dataset files


def write_ppm(path: str, image: np.ndarray) -> None:
    if image.ndim != 3 or image.shape[2] != 3 or image.dtype != np.uint8:
        raise ContractError(f"PPM writer needs uint8 HxWx3, got {image.dtype} {image.shape}")
    h, w = image.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(image.tobytes())


def read_ppm(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P6"):
        raise IOError(f"{path}: not a binary PPM (P6) file")
    fields = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(int(data[start:pos]))
    pos += 1  # single whitespace after maxval
    w, h, maxval = fields
    if maxval != 255:
        raise IOError(f"{path}: unsupported maxval {maxval}")
    if len(data) - pos < w * h * 3:
        raise IOError(f"{path}: truncated pixel data")
    pixels = np.frombuffer(data, dtype=np.uint8, count=w * h * 3, offset=pos)
    return pixels.reshape(h, w, 3).copy()


def lexicon_hash(lexicon) -> str:
    return hashlib.sha256("\n".join(lexicon).encode("utf-8")).hexdigest()


def generate_dataset(spec: SceneSpec, count: int, seed: int, out_dir: str) -> dict:
    """Write `count` scenes plus annotations.jsonl and manifest.json.

    Every image gets its own child seed of `seed`, so the output tree is
    byte-for-byte reproducible and images are independent of each other.
    """
    os.makedirs(out_dir, exist_ok=True)
    children = np.random.SeedSequence(seed).spawn(count)
    files = []
    try:
        ann_path = os.path.join(out_dir, "annotations.jsonl")
        with open(ann_path, "w", encoding="utf-8") as ann_fh:
            for i in range(count):
                name = f"img_{i:05d}.ppm"
                image, annotations = generate_image(spec, np.random.default_rng(children[i]))
                write_ppm(os.path.join(out_dir, name), image)
                for ann in annotations:
                    ann_fh.write(json.dumps({
                        "image": name,
                        "x1": ann.box.x1, "y1": ann.box.y1,
                        "x2": ann.box.x2, "y2": ann.box.y2,
                        "text": ann.text,
                    }) + "\n")
                files.append({"name": name, "words": len(annotations)})
    except OSError as exc:
        raise IOError(f"failed writing dataset under {out_dir}: {exc}") from exc
    manifest = {
        "spec": asdict(spec),
        "seed": seed,
        "count": count,
        "lexicon_hash": lexicon_hash(spec.lexicon),
        "files": files,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1)
        fh.write("\n")
    return manifest


def load_dataset(data_dir: str) -> list[tuple[str, np.ndarray, list[Annotation]]]:
    """Read a generated dataset back as (name, image, annotations) triples."""
    ann_path = os.path.join(data_dir, "annotations.jsonl")
    by_image: dict[str, list[Annotation]] = {}
    with open(ann_path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            ann = Annotation(Box(rec["x1"], rec["y1"], rec["x2"], rec["y2"]),
                             rec["text"])
            by_image.setdefault(rec["image"], []).append(ann)
    manifest_path = os.path.join(data_dir, "manifest.json")
    if os.path.exists(manifest_path):
        with open(manifest_path, encoding="utf-8") as fh:
            names = [f["name"] for f in json.load(fh)["files"]]
    else:
        names = sorted(n for n in os.listdir(data_dir) if n.endswith(".ppm"))
    return [(name, read_ppm(os.path.join(data_dir, name)), by_image.get(name, []))
            for name in names]
