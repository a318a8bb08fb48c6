#!/usr/bin/env python3
"""
Tests for image files (PGM/PNG), dictionary files (CSV/.npy) and the
dictionary atlas.
"""

import sys
from pathlib import Path

import numpy as np
import png
import pytest
from numpy.testing import assert_allclose, assert_array_equal

sys.path.insert(0, str(Path(__file__).parent))

from src.data.models import Dictionary, GrayImage
from src.learning import overcomplete_dct
from src.utils.atlas import atlas_size, render_atlas, FLAT_TILE_VALUE
from src.utils.dictionary_io import save_dictionary, load_dictionary
from src.utils.errors import ImageFormatError, DictionaryFormatError, InvalidArgumentError
from src.utils.image_io import read_image, write_image, read_pgm


def gradient(height: int = 6, width: int = 9) -> GrayImage:
    return GrayImage(np.add.outer(np.arange(height) * 20.0, np.arange(width) * 7.0))


class TestImageFiles:

    @pytest.mark.parametrize("suffix", [".pgm", ".png"])
    def test_round_trip(self, tmp_path, suffix):
        image = gradient()
        path = write_image(image, tmp_path / f"gradient{suffix}")
        assert_array_equal(read_image(path).pixels, image.pixels)

    def test_writing_rounds_and_clips(self, tmp_path):
        image = GrayImage(np.array([[-12.0, 3.4], [255.6, 100.5]]))
        restored = read_image(write_image(image, tmp_path / "clip.pgm"))
        assert_array_equal(restored.pixels, [[0.0, 3.0], [255.0, 100.0]])

    def test_ascii_pgm_with_comment_and_maxval(self, tmp_path):
        path = tmp_path / "ascii.pgm"
        path.write_bytes(b"P2\n# made by hand\n3 2\n15\n0 5 10\n15 0 5\n")
        assert_allclose(read_pgm(path).pixels, [[0, 85, 170], [255, 0, 85]])

    def test_sixteen_bit_pgm(self, tmp_path):
        path = tmp_path / "deep.pgm"
        raster = np.array([[0, 1023], [511, 1023]], dtype=">u2")
        path.write_bytes(b"P5\n2 2\n1023\n" + raster.tobytes())
        assert_allclose(read_pgm(path).pixels, raster * (255.0 / 1023.0))

    def test_colour_ppm_rejected(self, tmp_path):
        path = tmp_path / "colour.pgm"
        path.write_bytes(b"P6\n1 1\n255\n" + bytes([1, 2, 3]))
        with pytest.raises(ImageFormatError):
            read_image(path)

    def test_truncated_pgm_rejected(self, tmp_path):
        path = tmp_path / "short.pgm"
        path.write_bytes(b"P5\n4 4\n255\n" + bytes(5))
        with pytest.raises(ImageFormatError):
            read_image(path)

    def test_colour_png_rejected(self, tmp_path):
        path = tmp_path / "colour.png"
        with open(path, 'wb') as f:
            png.Writer(width=2, height=1, greyscale=False, bitdepth=8).write(f, [[255, 0, 0, 0, 255, 0]])
        with pytest.raises(ImageFormatError):
            read_image(path)

    def test_grey_alpha_png_keeps_grey_plane(self, tmp_path):
        path = tmp_path / "alpha.png"
        with open(path, 'wb') as f:
            png.Writer(width=2, height=1, greyscale=True, alpha=True, bitdepth=8).write(f, [[10, 255, 200, 0]])
        assert_array_equal(read_image(path).pixels, [[10.0, 200.0]])

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_image(tmp_path / "absent.pgm")

    def test_format_from_signature(self, tmp_path):
        path = write_image(gradient(), tmp_path / "image.png")
        renamed = path.rename(tmp_path / "image.bin")
        assert_array_equal(read_image(renamed).pixels, gradient().pixels)


class TestDictionaryFiles:

    @pytest.mark.parametrize("name", ["dictionary.csv", "dictionary.npy"])
    def test_round_trip_is_exact(self, tmp_path, name):
        dictionary = Dictionary.from_matrix(np.random.default_rng(0).standard_normal((16, 24)))
        restored = load_dictionary(save_dictionary(dictionary, tmp_path / name))
        assert_array_equal(restored.atoms, dictionary.atoms)

    def test_csv_header(self, tmp_path):
        path = save_dictionary(overcomplete_dct(16, 20), tmp_path / "dct.csv")
        lines = path.read_text(encoding='utf-8').splitlines()
        assert lines[0] == "16,20"
        assert len(lines) == 17
        assert len(lines[1].split(',')) == 20

    def test_shape_mismatch_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("2,2\n1,0\n", encoding='utf-8')
        with pytest.raises(DictionaryFormatError):
            load_dictionary(path)

    def test_non_unit_atoms_rejected(self, tmp_path):
        path = tmp_path / "scaled.csv"
        path.write_text("2,2\n2,0\n0,1\n", encoding='utf-8')
        with pytest.raises(DictionaryFormatError):
            load_dictionary(path)

    def test_garbage_rejected(self, tmp_path):
        path = tmp_path / "garbage.csv"
        path.write_text("n,K\nhello\n", encoding='utf-8')
        with pytest.raises(DictionaryFormatError):
            load_dictionary(path)


class TestAtlas:

    def test_full_size_dictionary_layout(self):
        atlas = render_atlas(overcomplete_dct(64, 256))
        assert atlas.shape == (145, 145)
        assert atlas_size(64, 256) == 145
        assert render_atlas(overcomplete_dct(64, 256), border=0).shape == (143, 143)

    def test_tiles_and_separators(self):
        atlas = render_atlas(overcomplete_dct(64, 256), border=1)
        assert np.all(atlas.pixels[0, :] == 0.0)
        assert np.all(atlas.pixels[:, 9] == 0.0)
        # The DC atom is flat, so its tile renders mid-gray
        assert np.all(atlas.pixels[1:9, 1:9] == FLAT_TILE_VALUE)
        second = atlas.pixels[1:9, 10:18]
        assert second.min() == 0.0
        assert second.max() == pytest.approx(255.0)

    def test_single_atom(self):
        dictionary = Dictionary.from_matrix(np.array([[1.0], [2.0], [3.0], [4.0]]))
        atlas = render_atlas(dictionary, border=0)
        assert_allclose(atlas.pixels, [[0.0, 85.0], [170.0, 255.0]])

    def test_partial_last_row(self):
        atlas = render_atlas(overcomplete_dct(16, 5), border=0)
        # three columns, two rows of 4×4 tiles
        assert atlas.shape == (9, 14)

    def test_non_square_atoms_rejected(self):
        dictionary = Dictionary.from_matrix(np.ones((6, 2)))
        with pytest.raises(InvalidArgumentError):
            render_atlas(dictionary)
