"""Zero forcing, the low-complexity design, and the conventional baseline."""

import math

import numpy as np
import pytest

from pinchsim import (
    BlockageModel,
    BlockageState,
    ChannelMatrix,
    SchemeUsed,
    SystemConfig,
    SystemKind,
    conventional_rates,
    design1_rates,
    design2_rates,
    sample_placement,
    zero_forcing_gains,
    zero_forcing_precoder,
)
from pinchsim.transceiver import design2_rates_from_power, zf_gains_batch


def make_cfg(**kw):
    base = dict(num_users=2, d_w=10.0, d_l=40.0, tx_power=0.01, phi=0.1,
                blockage_model=BlockageModel.MODEL_A)
    base.update(kw)
    return SystemConfig(**base)


def as_channel(h, system=SystemKind.PINCHING):
    h = np.asarray(h, dtype=complex)
    return ChannelMatrix(h=h, magnitudes=np.abs(h), system=system)


def random_channels(n, m, rng, scale=1e-4):
    """Random complex matrices at realistic channel magnitudes."""
    return scale * (rng.standard_normal((n, m, m))
                    + 1j * rng.standard_normal((n, m, m)))


class TestZeroForcingGains:
    def test_single_antenna_gain_is_power_gain(self):
        h = 3e-4 * np.exp(1j * 0.7)
        gains = zero_forcing_gains(np.array([[h]]), 1)
        assert gains.g[0] == pytest.approx(abs(h) ** 2, rel=1e-12)

    def test_diagonal_two_user_example(self):
        gains = zero_forcing_gains(np.diag([1.0, 2.0]).astype(complex), 2)
        assert np.allclose(gains.g, [0.5, 2.0], rtol=1e-12)

    def test_zero_row_signals_rank_deficiency(self):
        h = np.array([[0.0, 0.0], [1.0, 2.0]], dtype=complex)
        assert zero_forcing_gains(h, 2) is None

    def test_zero_column_signals_rank_deficiency(self):
        h = np.array([[0.0, 1.0], [0.0, 2.0]], dtype=complex)
        assert zero_forcing_gains(h, 2) is None

    def test_near_singular_signals_rank_deficiency(self):
        h = np.array([[1.0, 1.0], [1.0, 1.0 + 1e-14]], dtype=complex)
        assert zero_forcing_gains(h, 2) is None

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            zero_forcing_gains(np.ones((2, 3), dtype=complex), 2)
        with pytest.raises(ValueError):
            zero_forcing_gains(np.eye(3, dtype=complex), 2)


class TestZeroForcingPrecoder:
    def test_interference_nulling_and_power(self):
        rng = np.random.default_rng(42)
        for h in random_channels(100, 3, rng):
            w = zero_forcing_precoder(h)
            if w is None:
                continue
            eff = h @ w
            signal = np.abs(np.diag(eff)) ** 2
            cross = np.abs(eff - np.diag(np.diag(eff))) ** 2
            assert np.all(cross.max(axis=1) <= 1e-10 * signal)
            col_power = np.sum(np.abs(w) ** 2, axis=0)
            assert np.allclose(col_power, 1.0 / 3.0, rtol=1e-12)
            assert abs(col_power.sum() - 1.0) <= 1e-12

    def test_effective_gain_matches_reported_gains(self):
        rng = np.random.default_rng(1)
        h = random_channels(1, 2, rng)[0]
        w = zero_forcing_precoder(h)
        gains = zero_forcing_gains(h, 2)
        eff = h @ w
        assert np.allclose(np.abs(np.diag(eff)) ** 2, gains.g, rtol=1e-10)


class TestDesign1:
    def test_single_user_rate(self):
        cfg = make_cfg(num_users=1)
        h = 2.8e-4 * np.exp(-0.3j)
        rv = design1_rates(as_channel([[h]]), cfg)
        expected = math.log2(1 + abs(h) ** 2 * cfg.tx_power / cfg.noise_power)
        assert rv.rates[0] == pytest.approx(expected, rel=1e-12)
        assert rv.scheme_used is SchemeUsed.ZF

    def test_diagonal_channel_splits_power(self):
        cfg = make_cfg()
        h = 3e-4
        rv = design1_rates(as_channel(np.diag([h, h])), cfg)
        expected = math.log2(1 + h ** 2 * cfg.tx_power / (2 * cfg.noise_power))
        assert np.allclose(rv.rates, expected, rtol=1e-12)

    def test_blocked_user_triggers_fallback(self):
        cfg = make_cfg()
        h = np.array([[0.0, 0.0], [0.0, 3e-4]], dtype=complex)
        rv = design1_rates(as_channel(h), cfg)
        assert rv.scheme_used is SchemeUsed.DESIGN2_FALLBACK
        assert rv.rates[0] == 0.0
        assert rv.rates[1] > 0.0

    def test_row_phase_rotation_leaves_rates_unchanged(self):
        cfg = make_cfg(num_users=3)
        rng = np.random.default_rng(5)
        h = random_channels(1, 3, rng)[0]
        base = design1_rates(as_channel(h), cfg).rates
        rot = np.exp(1j * rng.uniform(0, 2 * np.pi, 3))[:, None] * h
        rotated = design1_rates(as_channel(rot), cfg).rates
        assert np.allclose(rotated, base, rtol=1e-11)


class TestDesign2:
    def test_interference_free_when_cross_links_blocked(self):
        cfg = make_cfg()
        h = np.diag([2e-4, 3e-4]).astype(complex)
        rv = design2_rates(as_channel(h), cfg)
        expected = [math.log2(1 + (2e-4) ** 2 * cfg.tx_power / (2 * cfg.noise_power)),
                    math.log2(1 + (3e-4) ** 2 * cfg.tx_power / (2 * cfg.noise_power))]
        assert np.allclose(rv.rates, expected, rtol=1e-12)
        assert rv.scheme_used is SchemeUsed.DESIGN2

    def test_blocked_own_link_gives_zero_rate(self):
        cfg = make_cfg()
        h = np.array([[0.0, 2e-4], [1e-4, 3e-4]], dtype=complex)
        rv = design2_rates(as_channel(h), cfg)
        assert rv.rates[0] == 0.0

    def test_two_user_closed_expression(self):
        cfg = make_cfg()
        a, b = 2.5e-4, 0.8e-4
        h = np.array([[a, b], [0.0, 3e-4]], dtype=complex)
        rv = design2_rates(as_channel(h), cfg)
        expected = math.log2(1 + a * a * cfg.tx_power
                             / (b * b * cfg.tx_power + 2 * cfg.noise_power))
        assert rv.rates[0] == pytest.approx(expected, rel=1e-12)

    def test_monotone_in_interference_and_signal(self):
        cfg = make_cfg()
        own = 2e-4
        cross = np.linspace(0.0, 3e-4, 15)
        rates = [design2_rates(as_channel([[own, c], [0, own]]), cfg).rates[0]
                 for c in cross]
        assert np.all(np.diff(rates) < 0)
        owns = np.linspace(1e-5, 4e-4, 15)
        rates = [design2_rates(as_channel([[o, 1e-4], [0, own]]), cfg).rates[0]
                 for o in owns]
        assert np.all(np.diff(rates) > 0)

    def test_entrywise_phase_rotation_is_exactly_invariant(self):
        cfg = make_cfg(num_users=3)
        rng = np.random.default_rng(9)
        h = random_channels(1, 3, rng)[0]
        base = design2_rates(as_channel(h), cfg).rates
        rot = h * np.exp(1j * rng.uniform(0, 2 * np.pi, (3, 3)))
        # magnitudes unchanged -> identical rates up to rounding in abs()
        assert np.allclose(design2_rates(as_channel(rot), cfg).rates, base,
                           rtol=1e-12)


class TestDesign1VersusDesign2:
    def test_zero_forcing_wins_at_high_snr_when_feasible(self):
        cfg = make_cfg(tx_power=1.0)
        rng = np.random.default_rng(17)
        pl = sample_placement(cfg, rng)
        st = BlockageState(alpha=np.ones((2, 2), dtype=int),
                           system=SystemKind.PINCHING)
        from pinchsim import build_channel_matrix
        chan = build_channel_matrix(pl, st, cfg, SystemKind.PINCHING)
        r1 = design1_rates(chan, cfg)
        r2 = design2_rates(chan, cfg)
        assert r1.scheme_used is SchemeUsed.ZF
        assert r1.rates.sum() >= r2.rates.sum()


class TestConventional:
    def test_blocked_user_has_zero_rate(self):
        cfg = make_cfg()
        pl = sample_placement(cfg, np.random.default_rng(3))
        st = BlockageState(alpha=np.array([0, 1]), system=SystemKind.CONVENTIONAL)
        rv = conventional_rates(pl, st, cfg)
        assert rv.rates[0] == 0.0
        assert rv.rates[1] > 0.0
        assert rv.scheme_used is SchemeUsed.CONVENTIONAL

    def test_single_user_distance_law(self):
        cfg = make_cfg(num_users=1)
        pl = sample_placement(cfg, np.random.default_rng(4))
        st = BlockageState(alpha=np.array([1]), system=SystemKind.CONVENTIONAL)
        rv = conventional_rates(pl, st, cfg)
        r = np.linalg.norm(pl.user_positions[0] - np.array([0, 0, cfg.height]))
        expected = math.log2(1 + cfg.path_gain_factor * cfg.tx_power
                             / (cfg.noise_power * r * r))
        assert rv.rates[0] == pytest.approx(expected, rel=1e-12)

    def test_rate_saturates_in_power(self):
        # 40 dBm vs 60 dBm on a fixed unblocked placement: < 1e-3 bits apart
        rng = np.random.default_rng(6)
        cfg_lo = make_cfg(tx_power=10.0)
        cfg_hi = make_cfg(tx_power=1000.0)
        pl = sample_placement(cfg_lo, rng)
        st = BlockageState(alpha=np.array([1, 1]), system=SystemKind.CONVENTIONAL)
        lo = conventional_rates(pl, st, cfg_lo).rates
        hi = conventional_rates(pl, st, cfg_hi).rates
        assert np.all(hi >= lo)
        assert np.all(hi - lo < 1e-3)


class TestBatchConsistency:
    def test_batch_gains_match_scalar(self):
        rng = np.random.default_rng(21)
        batch = random_channels(64, 3, rng)
        batch[5, 0, :] = 0.0  # inject a rank-deficient realization
        gains, ok = zf_gains_batch(batch)
        for i in range(64):
            scalar = zero_forcing_gains(batch[i], 3)
            if scalar is None:
                assert not ok[i]
            else:
                assert ok[i]
                assert np.allclose(gains[i], scalar.g, rtol=1e-12)

    def test_batch_design2_matches_scalar(self):
        cfg = make_cfg(num_users=3)
        rng = np.random.default_rng(22)
        batch = random_channels(32, 3, rng)
        s_eff = np.abs(batch) ** 2
        rates = design2_rates_from_power(s_eff, cfg.tx_power, cfg.noise_power, 3)
        for i in range(32):
            rv = design2_rates(as_channel(batch[i]), cfg)
            assert np.allclose(rates[i], rv.rates, rtol=1e-12)
