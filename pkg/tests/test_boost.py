"""
Visibility boost: airlight, dark channel, transmission, recovery and the
inverse switch, plus physics round trips on synthetic scenes.
"""
import math

import numpy as np
import pytest

from src.data.synth import (
    SceneSpec,
    apply_fog,
    apply_lowlight,
    gen_scene,
    sample_fog_params,
    sample_night_params,
)
from src.errors import ConfigError, ShapeError
from src.imaging.ops import invert, mean_luminance, mean_saturation
from src.visibility.boost import (
    AtmosphericLight,
    VbmConfig,
    boost,
    boost_core,
    boost_with_stats,
    dark_channel,
    estimate_atmospheric_light,
    omega_s,
    recover,
    transmission,
)

WHITE = AtmosphericLight(1.0, 1.0, 1.0)


class TestAtmosphericLight:

    def test_uniform_image(self):
        a = estimate_atmospheric_light(np.full((4, 4, 3), 0.6), VbmConfig())
        assert (a.r, a.g, a.b) == pytest.approx((0.6, 0.6, 0.6))

    def test_single_white_pixel(self):
        img = np.zeros((3, 3, 3))
        img[1, 2] = 1.0
        a = estimate_atmospheric_light(img, VbmConfig(light_sample_count=1))
        assert (a.r, a.g, a.b) == (1.0, 1.0, 1.0)

    def test_average_of_selected_set(self):
        img = np.array([[[1.0, 1.0, 1.0], [0.0, 0.0, 0.0]]])
        a = estimate_atmospheric_light(img, VbmConfig(light_sample_count=2))
        assert (a.r, a.g, a.b) == pytest.approx((0.5, 0.5, 0.5))

    def test_black_image_is_floored(self):
        a = estimate_atmospheric_light(np.zeros((2, 2, 3)), VbmConfig())
        assert min(a.r, a.g, a.b) > 0.0


class TestOmega:

    @pytest.mark.parametrize('mean_sat, expected', [
        (0.0, 1.0),
        (0.25, math.exp(-1.0)),
        (1.0, math.exp(-4.0)),
    ])
    def test_values(self, mean_sat, expected):
        assert omega_s(mean_sat, 4.0) == pytest.approx(expected, rel=1e-12)


class TestDarkChannel:

    def test_image_equal_to_light(self):
        img = np.broadcast_to(np.array([0.9, 0.8, 0.7]), (5, 5, 3)).copy()
        light = AtmosphericLight(0.9, 0.8, 0.7)
        np.testing.assert_allclose(dark_channel(img, light, VbmConfig(patch_radius=1)), 1.0)

    def test_zero_channel_in_window(self):
        img = np.full((5, 5, 3), 0.8)
        img[2, 2, 1] = 0.0
        dark = dark_channel(img, WHITE, VbmConfig(patch_radius=1))
        assert np.all(dark[1:4, 1:4] == 0.0)
        assert dark[0, 0] == pytest.approx(0.8)

    def test_single_pixel(self):
        img = np.array([[[0.5, 0.6, 0.9]]])
        assert dark_channel(img, WHITE, VbmConfig())[0, 0] == pytest.approx(0.5)


class TestTransmission:

    def test_zero_dark(self):
        np.testing.assert_array_equal(transmission(np.zeros((3, 3)), 0.7, VbmConfig()), 1.0)

    def test_floor(self):
        assert transmission(np.ones((1, 1)), 1.0, VbmConfig(t_floor=0.1))[0, 0] == pytest.approx(0.1)

    def test_modulated(self):
        t = transmission(np.full((1, 1), 0.6), 0.3679, VbmConfig())
        assert t[0, 0] == pytest.approx(0.77926, abs=1e-4)


class TestRecover:

    def test_unit_transmission_is_identity(self, rng):
        img = rng.uniform(size=(6, 6, 3))
        np.testing.assert_allclose(recover(img, np.ones((6, 6)), WHITE), img, atol=1e-15)

    def test_veil_only_input(self):
        light = AtmosphericLight(0.9, 0.85, 0.8)
        img = np.broadcast_to(light.as_array(), (4, 4, 3)).copy()
        np.testing.assert_allclose(recover(img, np.full((4, 4), 0.3), light), img, atol=1e-12)

    def test_algebraic_inverse(self, rng):
        clean = rng.uniform(size=(8, 8, 3))
        t = rng.uniform(0.2, 1.0, size=(8, 8))
        light = AtmosphericLight(0.95, 0.9, 0.92)
        hazy = clean * t[..., None] + light.as_array() * (1 - t[..., None])
        np.testing.assert_allclose(recover(hazy, t, light, clip=False), clean, atol=1e-6)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            recover(np.zeros((2, 2, 3)), np.ones((3, 3)), WHITE)


class TestBoost:

    def test_gray_pixel(self):
        img = np.full((1, 1, 3), 0.5)
        result = boost_with_stats(img, VbmConfig())
        assert not result.night
        assert result.omega_s == 1.0
        np.testing.assert_allclose(result.image, img, atol=1e-12)
        np.testing.assert_array_equal(boost(img, VbmConfig()), result.image)

    def test_vivid_image_is_near_identity(self, rng):
        img = np.zeros((8, 8, 3))
        channel = rng.integers(0, 3, size=(8, 8))
        img[np.arange(8)[:, None], np.arange(8)[None, :], channel] = 1.0
        out = boost(img, VbmConfig())
        assert mean_saturation(img) == 1.0
        assert np.max(np.abs(out - img)) <= 0.02

    def test_dark_image_takes_inverse_path(self, rng):
        img = rng.uniform(0.0, 0.1, size=(16, 16, 3))
        cfg = VbmConfig()
        assert mean_luminance(img) < cfg.night_luminance_threshold
        result = boost_with_stats(img, cfg)
        assert result.night
        np.testing.assert_array_equal(result.image, invert(boost_core(invert(img), cfg)))

    def test_output_in_range(self, rng):
        out = boost(rng.uniform(size=(12, 12, 3)), VbmConfig(patch_radius=2))
        assert out.min() >= 0.0 and out.max() <= 1.0

    def test_invalid_config(self):
        with pytest.raises(ConfigError):
            VbmConfig(gamma=0.0)
        with pytest.raises(ConfigError):
            VbmConfig(t_floor=1.0)


class TestPhysicsOnSyntheticScenes:
    """Fog and low light rendered with the scatter model, then boosted."""

    spec = SceneSpec()

    def _scene(self, index):
        rng = np.random.default_rng([11, index])
        clean, _, depth = gen_scene(self.spec, rng)
        return clean, depth, rng

    def test_ground_truth_recovery(self):
        for i in range(100):
            clean, depth, rng = self._scene(i)
            fog = sample_fog_params(rng)
            assert 0.5 <= fog.beta <= 3.0
            foggy = apply_fog(clean, depth, fog)
            t = np.exp(-fog.beta * depth)
            np.testing.assert_allclose(recover(foggy, t, fog.light, clip=False), clean, atol=1e-6)

    def test_boost_improves_foggy_scenes(self):
        cfg = VbmConfig()
        improved = 0
        for i in range(100):
            clean, depth, rng = self._scene(i)
            foggy = apply_fog(clean, depth, sample_fog_params(rng))
            out = boost(foggy, cfg)
            more_saturated = mean_saturation(out) > mean_saturation(foggy)
            closer = np.mean((out - clean) ** 2) < np.mean((foggy - clean) ** 2)
            improved += more_saturated and closer
        assert improved >= 90

    def test_inverse_switch_brightens_low_light(self):
        cfg = VbmConfig()
        brighter = 0
        for i in range(100):
            clean, depth, rng = self._scene(i)
            dark = apply_lowlight(clean, depth, sample_night_params(rng))
            result = boost_with_stats(dark, cfg)
            brighter += result.night and mean_luminance(result.image) > mean_luminance(dark)
        assert brighter >= 90
