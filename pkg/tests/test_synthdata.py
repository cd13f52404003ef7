import json
import os

import numpy as np
import pytest

from textspot import synthdata
from textspot.errors import ContractError, PlacementError
from textspot.geometry import iou_matrix
from textspot.synthdata import GlyphFont, SceneSpec, generate_dataset, generate_image


def blank_canvas(w=200, h=100, value=0):
    return np.full((h, w, 3), value, dtype=np.uint8)


class TestFont:
    def test_every_symbol_has_a_mask(self):
        font = GlyphFont()
        for ch in "abcdefghijklmnopqrstuvwxyz0123456789#":
            assert ch in font.masks
            assert font.masks[ch].any()

    def test_masks_fill_their_cell_bounds(self):
        # tight-box arithmetic relies on ink on all four cell edges
        font = GlyphFont()
        for ch, mask in font.masks.items():
            assert mask[0].any() and mask[-1].any(), ch
            assert mask[:, 0].any() and mask[:, -1].any(), ch


class TestRenderWord:
    def test_single_letter_box_is_one_cell(self):
        canvas = blank_canvas()
        ann = synthdata.render_word("a", 1.0, (255, 255, 255), (10, 20), canvas)
        assert (ann.box.width, ann.box.height) == (5.0, 7.0)
        assert (ann.box.x1, ann.box.y1) == (10.0, 20.0)

    def test_two_letter_box_at_scale_two(self):
        canvas = blank_canvas()
        ann = synthdata.render_word("ab", 2.0, (255, 0, 0), (0, 0), canvas)
        assert ann.box.width == (5 + 1 + 5) * 2
        assert ann.box.height == 14

    def test_rendered_pixels_inside_box(self):
        rng = np.random.default_rng(0)
        lex = synthdata.SceneSpec().lexicon
        for _ in range(100):
            word = lex[rng.integers(len(lex))]
            scale = float(rng.choice([1.0, 1.5, 2.0, 3.0]))
            canvas = blank_canvas(400, 120)
            x, y = int(rng.integers(0, 60)), int(rng.integers(0, 40))
            try:
                ann = synthdata.render_word(word, scale, (200, 10, 10), (x, y), canvas)
            except PlacementError:
                continue
            ys, xs = np.nonzero((canvas != 0).any(axis=2))
            assert xs.min() >= ann.box.x1 and xs.max() < ann.box.x2
            assert ys.min() >= ann.box.y1 and ys.max() < ann.box.y2
            # tightness: ink reaches every box edge
            assert xs.min() == ann.box.x1 and xs.max() == ann.box.x2 - 1
            assert ys.min() == ann.box.y1 and ys.max() == ann.box.y2 - 1

    def test_word_exceeding_canvas_rejected(self):
        with pytest.raises(PlacementError):
            synthdata.render_word("hello", 10.0, (1, 1, 1), (0, 0), blank_canvas(60, 30))

    def test_unknown_glyph_rejected(self):
        with pytest.raises(ContractError):
            synthdata.render_word("a!b", 1.0, (1, 1, 1), (0, 0), blank_canvas())


class TestGenerateImage:
    def test_zero_words_gives_constant_image(self):
        spec = SceneSpec(min_words=0, max_words=0)
        image, anns = generate_image(spec, np.random.default_rng(1))
        assert anns == []
        assert (image == image[0, 0]).all()

    def test_boxes_pairwise_disjoint(self):
        spec = SceneSpec(min_words=2, max_words=4)
        for seed in range(20):
            _, anns = generate_image(spec, np.random.default_rng(seed))
            if len(anns) < 2:
                continue
            boxes = np.array([a.box.as_array() for a in anns])
            pair = iou_matrix(boxes, boxes) - np.eye(len(anns))
            assert pair.max() == 0.0

    def test_level1_background_constant_outside_boxes(self):
        spec = SceneSpec(min_words=1, max_words=3)
        image, anns = generate_image(spec, np.random.default_rng(2))
        outside = np.ones(image.shape[:2], dtype=bool)
        for a in anns:
            outside[int(a.box.y1):int(a.box.y2), int(a.box.x1):int(a.box.x2)] = False
        pixels = image[outside]
        assert (pixels == pixels[0]).all()

    def test_text_color_contrast(self):
        spec = SceneSpec(min_words=1, max_words=2, min_contrast=120)
        image, anns = generate_image(spec, np.random.default_rng(3))
        background = image[0, 0].astype(int)
        for a in anns:
            patch = image[int(a.box.y1):int(a.box.y2), int(a.box.x1):int(a.box.x2)]
            ink = patch[(patch != image[0, 0]).any(axis=2)]
            assert np.abs(ink[0].astype(int) - background).max() >= 120

    def test_level2_differs_only_outside_word_boxes(self):
        for seed in (4, 5, 6):
            spec1 = SceneSpec(min_words=1, max_words=3, level=1)
            spec2 = SceneSpec(min_words=1, max_words=3, level=2)
            img1, anns1 = generate_image(spec1, np.random.default_rng(seed))
            img2, anns2 = generate_image(spec2, np.random.default_rng(seed))
            assert [(a.box, a.text) for a in anns1] == [(a.box, a.text) for a in anns2]
            inside = np.zeros(img1.shape[:2], dtype=bool)
            for a in anns1:
                inside[int(a.box.y1):int(a.box.y2), int(a.box.x1):int(a.box.x2)] = True
            assert np.array_equal(img1[inside], img2[inside])
            assert not np.array_equal(img1, img2)  # clutter actually drawn

    def test_invalid_level_rejected(self):
        with pytest.raises(ContractError):
            SceneSpec(level=3)


class TestDataset:
    def test_deterministic_output_tree(self, tmp_path):
        spec = SceneSpec(min_words=1, max_words=3)
        trees = []
        for run in ("a", "b"):
            out = tmp_path / run
            generate_dataset(spec, 10, seed=99, out_dir=str(out))
            tree = {}
            for name in sorted(os.listdir(out)):
                tree[name] = (out / name).read_bytes()
            trees.append(tree)
        assert trees[0] == trees[1]

    def test_manifest_counts_match_annotation_lines(self, tmp_path):
        spec = SceneSpec(min_words=0, max_words=4)
        manifest = generate_dataset(spec, 25, seed=7, out_dir=str(tmp_path))
        total = sum(f["words"] for f in manifest["files"])
        lines = (tmp_path / "annotations.jsonl").read_text().strip().splitlines()
        assert total == len(lines)

    def test_mean_word_count_tracks_distribution(self, tmp_path):
        spec = SceneSpec(min_words=1, max_words=4)
        manifest = generate_dataset(spec, 200, seed=11, out_dir=str(tmp_path))
        mean = sum(f["words"] for f in manifest["files"]) / 200.0
        assert abs(mean - 2.5) <= 0.2 * 2.5

    def test_roundtrip_through_loader(self, tmp_path):
        spec = SceneSpec(min_words=1, max_words=2)
        generate_dataset(spec, 5, seed=3, out_dir=str(tmp_path))
        loaded = synthdata.load_dataset(str(tmp_path))
        assert len(loaded) == 5
        name, image, anns = loaded[0]
        assert name == "img_00000.ppm"
        assert image.shape == (spec.canvas_h, spec.canvas_w, 3)
        regenerated, expected = generate_image(
            spec, np.random.default_rng(np.random.SeedSequence(3).spawn(5)[0]))
        assert np.array_equal(image, regenerated)
        assert [(a.box, a.text) for a in anns] == [(a.box, a.text) for a in expected]

    def test_manifest_records_lexicon_hash(self, tmp_path):
        spec = SceneSpec()
        manifest = generate_dataset(spec, 1, seed=0, out_dir=str(tmp_path))
        assert manifest["lexicon_hash"] == synthdata.lexicon_hash(spec.lexicon)
        on_disk = json.loads((tmp_path / "manifest.json").read_text())
        assert on_disk["lexicon_hash"] == manifest["lexicon_hash"]


class TestPpm:
    def test_write_read_roundtrip(self, tmp_path):
        rng = np.random.default_rng(8)
        image = rng.integers(0, 256, size=(31, 17, 3)).astype(np.uint8)
        path = str(tmp_path / "x.ppm")
        synthdata.write_ppm(path, image)
        assert np.array_equal(synthdata.read_ppm(path), image)

    def test_reject_non_p6(self, tmp_path):
        path = tmp_path / "bad.ppm"
        path.write_bytes(b"P3\n1 1\n255\n0 0 0\n")
        with pytest.raises(IOError):
            synthdata.read_ppm(str(path))

    def test_reject_truncated(self, tmp_path):
        path = tmp_path / "short.ppm"
        path.write_bytes(b"P6\n4 4\n255\n\x00\x00")
        with pytest.raises(IOError):
            synthdata.read_ppm(str(path))
