"""
Pixel primitives, value-type checks and the PPM/PGM codec.
"""
import numpy as np
import pytest

from src.errors import CodecError, DataFileError, ShapeError, ValidationError
from src.imaging.codec import (
    decode_image,
    decode_labels,
    encode_image,
    encode_labels,
    read_image,
    read_labels,
    write_image,
)
from src.imaging.ops import (
    invert,
    luminance_map,
    mean_luminance,
    mean_saturation,
    min_filter,
    saturation_map,
)
from src.imaging.types import IGNORE_ID, require_same_size, validate_image, validate_label_map


class TestSaturation:

    def test_gray_is_zero(self):
        img = np.full((4, 4, 3), 0.5)
        np.testing.assert_array_equal(saturation_map(img), 0.0)

    def test_pure_red(self):
        assert saturation_map(np.array([[[1.0, 0.0, 0.0]]]))[0, 0] == 1.0

    def test_mixed_pixel(self):
        assert saturation_map(np.array([[[0.8, 0.4, 0.2]]]))[0, 0] == pytest.approx(0.75)

    def test_black_pixel_is_zero(self):
        assert saturation_map(np.zeros((1, 1, 3)))[0, 0] == 0.0

    def test_checkerboard_mean(self):
        img = np.full((4, 4, 3), 0.5)
        img[::2, ::2] = img[1::2, 1::2] = (1.0, 0.0, 0.0)
        assert mean_saturation(img) == pytest.approx(0.5)

    def test_values_in_unit_interval(self, rng):
        sat = saturation_map(rng.uniform(size=(16, 16, 3)))
        assert sat.min() >= 0.0 and sat.max() <= 1.0


class TestInvert:

    def test_zeros_to_ones(self):
        np.testing.assert_array_equal(invert(np.zeros((2, 2, 3))), 1.0)

    def test_involution_is_exact(self, rng):
        img = rng.uniform(size=(16, 16, 3))
        np.testing.assert_array_equal(invert(invert(img)), img)

    def test_pixel(self):
        np.testing.assert_allclose(invert(np.array([[[0.3, 0.6, 0.9]]]))[0, 0], (0.7, 0.4, 0.1))


class TestMinFilter:

    def test_radius_zero_is_identity(self, rng):
        values = rng.uniform(size=(5, 7))
        np.testing.assert_array_equal(min_filter(values, 0), values)

    def test_constant_map(self):
        np.testing.assert_array_equal(min_filter(np.full((6, 6), 0.3), 3), 0.3)

    def test_center_zero_spreads(self):
        values = np.ones((3, 3))
        values[1, 1] = 0.0
        np.testing.assert_array_equal(min_filter(values, 1), 0.0)

    def test_matches_brute_force_with_clamped_edges(self, rng):
        values = rng.uniform(size=(7, 9))
        radius = 2
        out = min_filter(values, radius)
        h, w = values.shape
        for y in range(h):
            for x in range(w):
                window = values[max(0, y - radius):y + radius + 1, max(0, x - radius):x + radius + 1]
                assert out[y, x] == window.min()

    def test_negative_radius(self):
        with pytest.raises(ValidationError):
            min_filter(np.zeros((2, 2)), -1)


class TestLuminance:

    def test_black_and_white(self):
        assert mean_luminance(np.zeros((2, 2, 3))) == 0.0
        assert mean_luminance(np.ones((2, 2, 3))) == 1.0

    def test_half_and_half(self):
        img = np.zeros((2, 2, 3))
        img[0] = 1.0
        assert mean_luminance(img) == pytest.approx(0.5)

    def test_channel_average(self):
        assert luminance_map(np.array([[[0.3, 0.6, 0.9]]]))[0, 0] == pytest.approx(0.6)


class TestValueTypes:

    def test_image_shape(self):
        with pytest.raises(ShapeError):
            validate_image(np.zeros((4, 4)))

    def test_image_range(self):
        with pytest.raises(ValidationError):
            validate_image(np.full((2, 2, 3), 1.5))

    def test_label_range(self):
        with pytest.raises(ValidationError):
            validate_label_map(np.array([[0, 5]]), num_classes=5)

    def test_ignore_allowed(self):
        labels = validate_label_map(np.array([[0, IGNORE_ID]]), num_classes=2)
        assert labels.dtype == np.uint8

    def test_size_mismatch(self):
        with pytest.raises(ShapeError):
            require_same_size(np.zeros((2, 2, 3)), np.zeros((3, 2)))


class TestCodec:

    def test_white_pixel_stream(self):
        data = encode_image(np.ones((1, 1, 3)))
        assert data.startswith(b'P6')
        assert data.endswith(b'\xff\xff\xff')
        np.testing.assert_array_equal(decode_image(data), np.ones((1, 1, 3)))

    def test_random_image_within_quantisation(self, rng):
        img = rng.uniform(size=(16, 16, 3))
        np.testing.assert_allclose(decode_image(encode_image(img)), img, atol=0.5 / 255 + 1e-12)

    def test_labels_are_exact(self, rng):
        labels = rng.integers(0, 5, size=(9, 11)).astype(np.uint8)
        labels[0, 0] = IGNORE_ID
        np.testing.assert_array_equal(decode_labels(encode_labels(labels), 5), labels)

    def test_truncated_payload(self, rng):
        data = encode_image(rng.uniform(size=(8, 8, 3)))
        with pytest.raises(CodecError):
            decode_image(data[:-10])

    def test_wrong_magic(self):
        with pytest.raises(CodecError):
            decode_image(encode_labels(np.zeros((2, 2), dtype=np.uint8)))

    def test_label_out_of_range(self):
        with pytest.raises(CodecError):
            decode_labels(encode_labels(np.full((2, 2), 7, dtype=np.uint8)), num_classes=5)

    @pytest.mark.parametrize('data', [
        b'P6\nabc 2\n255\n',
        b'P6\n1 1\n65536\n\x00\x00\x00',
        b'P6\n1 1',
        b'P6\n',
    ], ids=['non-integer-size', 'maxval-too-large', 'truncated-header', 'magic-only'])
    def test_malformed_headers(self, data):
        with pytest.raises(CodecError):
            decode_image(data)

    @pytest.mark.parametrize('maxval', [15, 100, 254])
    def test_other_maxvals_rejected(self, maxval):
        with pytest.raises(CodecError, match='maxval'):
            decode_image(b'P6\n1 1\n%d\n\x0f\x0f\x0f' % maxval)
        with pytest.raises(CodecError, match='maxval'):
            decode_labels(b'P5\n1 1\n%d\n\x01' % maxval)

    def test_bad_header_file_names_the_file(self, tmp_path):
        bad = tmp_path / 'bad_header.ppm'
        bad.write_bytes(b'P6\nabc 2\n255\n')
        with pytest.raises(DataFileError, match='bad_header.ppm'):
            read_image(bad)
        deep = tmp_path / 'deep.ppm'
        deep.write_bytes(b'P6\n1 1\n15\n\x0f\x0f\x0f')
        with pytest.raises(DataFileError, match='deep.ppm'):
            read_image(deep)

    def test_file_errors_name_the_file(self, tmp_path):
        missing = tmp_path / 'missing.ppm'
        with pytest.raises(DataFileError, match='missing.ppm'):
            read_image(missing)
        corrupt = tmp_path / 'corrupt.pgm'
        corrupt.write_bytes(b'P5\n4 4\n255\n\x00')
        with pytest.raises(DataFileError, match='corrupt.pgm'):
            read_labels(corrupt)

    def test_file_roundtrip(self, tmp_path, rng):
        img = np.rint(rng.uniform(size=(5, 6, 3)) * 255) / 255
        write_image(tmp_path / 'nested' / 'a.ppm', img)
        np.testing.assert_allclose(read_image(tmp_path / 'nested' / 'a.ppm'), img, atol=1e-12)
