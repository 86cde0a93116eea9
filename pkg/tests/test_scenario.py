"""Geometry, config validation and placement sampling."""

import math

import numpy as np
import pytest

from pinchsim import (
    BlockageModel,
    SystemConfig,
    conventional_array_positions,
    dbm_to_watt,
    sample_placement,
    watt_to_dbm,
    waveguide_y_offset,
    waveguide_y_offsets,
)
from pinchsim.montecarlo import _sample_user_xy


def make_cfg(**kw):
    base = dict(num_users=1, d_w=10.0, d_l=40.0, tx_power=0.01, phi=0.1,
                blockage_model=BlockageModel.MODEL_A)
    base.update(kw)
    return SystemConfig(**base)


class TestSystemConfig:
    def test_derived_constants_at_28ghz(self):
        cfg = make_cfg()
        # independent recomputation: eta = (lambda / 4 pi)^2
        lam = 299792458.0 / 28e9
        assert np.isclose(cfg.wavelength, lam, rtol=1e-15)
        assert np.isclose(cfg.guided_wavelength, lam / 1.4, rtol=1e-15)
        assert np.isclose(cfg.path_gain_factor, (lam / (4 * math.pi)) ** 2, rtol=1e-13)
        assert np.isclose(cfg.path_gain_factor, 7.259481705540116e-07, rtol=1e-12)

    @pytest.mark.parametrize("field", ["d_w", "d_l", "height", "carrier_freq",
                                       "noise_power", "tx_power", "n_eff"])
    def test_nonpositive_parameters_rejected(self, field):
        with pytest.raises(ValueError):
            make_cfg(**{field: 0.0})
        with pytest.raises(ValueError):
            make_cfg(**{field: -1.0})

    def test_bad_counts_and_phi_rejected(self):
        with pytest.raises(ValueError):
            make_cfg(num_users=0)
        with pytest.raises(ValueError):
            make_cfg(phi=-0.1)

    def test_dbm_conversions(self):
        assert np.isclose(dbm_to_watt(10.0), 0.01, rtol=1e-12)
        assert np.isclose(dbm_to_watt(-90.0), 1e-12, rtol=1e-12)
        assert np.isclose(watt_to_dbm(dbm_to_watt(23.0)), 23.0, rtol=1e-12)


class TestWaveguideOffsets:
    def test_hand_evaluated_examples(self):
        cfg2 = make_cfg(num_users=2)
        assert waveguide_y_offset(1, cfg2) == pytest.approx(-2.5, abs=1e-12)
        assert waveguide_y_offset(2, cfg2) == pytest.approx(2.5, abs=1e-12)
        # single waveguide is centered by symmetry
        assert waveguide_y_offset(1, make_cfg()) == pytest.approx(0.0, abs=1e-12)

    def test_equal_spacing_and_symmetry(self):
        cfg = make_cfg(num_users=5)
        offs = waveguide_y_offsets(cfg)
        assert np.allclose(np.diff(offs), cfg.d_w / 5, atol=1e-12)
        assert np.allclose(offs, -offs[::-1], atol=1e-12)

    def test_strips_tile_area_without_overlap(self):
        cfg = make_cfg(num_users=4)
        offs = waveguide_y_offsets(cfg)
        half = cfg.strip_width / 2
        edges = np.concatenate([[offs[0] - half], offs + half])
        assert edges[0] == pytest.approx(-cfg.d_w / 2, abs=1e-12)
        assert edges[-1] == pytest.approx(cfg.d_w / 2, abs=1e-12)
        # adjacent strips share exactly one edge
        assert np.allclose(offs[:-1] + half, offs[1:] - half, atol=1e-12)

    def test_index_out_of_range(self):
        cfg = make_cfg(num_users=3)
        for bad in (0, 4, -1):
            with pytest.raises(ValueError):
                waveguide_y_offset(bad, cfg)


class TestConventionalArray:
    def test_single_antenna_at_center(self):
        pos = conventional_array_positions(make_cfg())
        assert np.allclose(pos, [[0.0, 0.0, 3.0]])

    def test_two_antennas_quarter_wavelength(self):
        pos = conventional_array_positions(make_cfg(num_users=2))
        # lambda/4 at 28 GHz with the exact SI speed of light
        assert np.allclose(pos[:, 0], [-0.002676718375, 0.002676718375], rtol=1e-12)
        assert np.allclose(pos[:, 1], 0.0)
        assert np.allclose(pos[:, 2], 3.0)

    @pytest.mark.parametrize("m", [1, 2, 3, 8])
    def test_centered_for_any_size(self, m):
        pos = conventional_array_positions(make_cfg(num_users=m))
        assert abs(pos[:, 0].mean()) < 1e-15
        spacing = np.diff(pos[:, 0])
        if m > 1:
            assert np.allclose(spacing, make_cfg().wavelength / 2, rtol=1e-12)


class TestSamplePlacement:
    def test_same_seed_reproduces_bitwise(self):
        cfg = make_cfg(num_users=3)
        a = sample_placement(cfg, np.random.default_rng(123))
        b = sample_placement(cfg, np.random.default_rng(123))
        assert np.array_equal(a.user_positions, b.user_positions)
        assert np.array_equal(a.pinch_positions, b.pinch_positions)
        assert np.array_equal(a.feed_positions, b.feed_positions)

    def test_constrained_user_sits_under_waveguide(self):
        cfg = make_cfg(constrain_under_waveguide=True)
        pl = sample_placement(cfg, np.random.default_rng(0))
        x, y, z = pl.user_positions[0]
        assert y == 0.0 and z == 0.0
        assert np.allclose(pl.pinch_positions[0], [x, 0.0, 3.0])
        # pinch-to-user distance collapses to the height exactly
        dist = np.linalg.norm(pl.pinch_positions[0] - pl.user_positions[0])
        assert dist == pytest.approx(3.0, abs=1e-12)

    def test_users_stay_inside_their_strips(self):
        cfg = make_cfg(num_users=2)
        rng = np.random.default_rng(7)
        for _ in range(200):
            pl = sample_placement(cfg, rng)
            xs = pl.user_positions[:, 0]
            ys = pl.user_positions[:, 1]
            assert np.all(np.abs(xs) <= cfg.d_l / 2)
            assert -5.0 <= ys[0] <= 0.0
            assert 0.0 <= ys[1] <= 5.0

    def test_pinch_antenna_follows_user_x(self):
        cfg = make_cfg(num_users=3)
        pl = sample_placement(cfg, np.random.default_rng(5))
        assert np.array_equal(pl.pinch_positions[:, 0], pl.user_positions[:, 0])
        assert np.allclose(pl.pinch_positions[:, 1], waveguide_y_offsets(cfg))
        d_sq = np.sum((pl.pinch_positions - pl.user_positions) ** 2, axis=1)
        expected = (pl.user_positions[:, 1] - pl.pinch_positions[:, 1]) ** 2 + 9.0
        assert np.allclose(d_sq, expected, rtol=1e-12)

    def test_feed_points_at_near_edge(self):
        cfg = make_cfg(num_users=2)
        pl = sample_placement(cfg, np.random.default_rng(1))
        assert np.allclose(pl.feed_positions[:, 0], -20.0)
        assert np.allclose(pl.feed_positions[:, 1], waveguide_y_offsets(cfg))
        assert np.allclose(pl.feed_positions[:, 2], 3.0)

    def test_placement_arrays_are_readonly(self):
        pl = sample_placement(make_cfg(), np.random.default_rng(2))
        with pytest.raises(ValueError):
            pl.user_positions[0, 0] = 99.0

    def test_empirical_mean_matches_uniform_moments(self):
        # batch sampler: mean of y over 1e6 draws within 3 sigma of the
        # uniform-strip mean (strip width / sqrt(12 n) per draw)
        cfg = make_cfg(num_users=2)
        rng = np.random.default_rng(2024)
        n = 1_000_000
        x, y = _sample_user_xy(cfg, n, rng)
        beta = np.array([-2.5, 2.5])
        tol = 3.0 * cfg.strip_width / math.sqrt(12.0 * n)
        assert np.all(np.abs(y.mean(axis=0) - beta) <= tol)
        tol_x = 3.0 * cfg.d_l / math.sqrt(12.0 * n)
        assert np.all(np.abs(x.mean(axis=0)) <= tol_x)
