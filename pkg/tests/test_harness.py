"""Monte-Carlo sweep runner: calibration, determinism, orderings, reports."""

import dataclasses

import numpy as np
import numpy.testing as npt
import pytest

from scmlink import codec, harness, numerics, ofdm, presets, stbc


def _mini(name, **kw):
    base = presets.preset(name)
    return dataclasses.replace(base, **kw)


@pytest.fixture(scope="module")
def awgn_curve():
    cfg = _mini("awgn-bpsk", snr_db=tuple(float(s) for s in range(0, 7)), num_blocks=2000)
    return harness.run_ber_sweep(cfg)


class TestAwgnReference:
    def test_matches_q_function(self, awgn_curve):
        theory = harness.theoretical_bpsk_awgn_ber(awgn_curve.snr_db)
        for ber, ref, errs in zip(awgn_curve.ber, theory, awgn_curve.bit_errors):
            if errs >= 100:
                assert ber == pytest.approx(ref, rel=0.10)

    def test_enough_errors_for_the_check(self, awgn_curve):
        # The reference comparison above must not pass vacuously.
        assert np.all(awgn_curve.bit_errors >= 100)

    def test_monotone_nonincreasing(self, awgn_curve):
        assert np.all(np.diff(awgn_curve.ber) <= 0.0)

    def test_total_bits_constant_in_full_mode(self, awgn_curve):
        npt.assert_array_equal(awgn_curve.total_bits, awgn_curve.total_bits[0])

    def test_theoretical_values(self):
        out = harness.theoretical_bpsk_awgn_ber([0.0, 10.0])
        assert out[0] == pytest.approx(0.078649, rel=1e-4)
        assert out[1] == pytest.approx(3.872e-6, rel=1e-3)


class TestNoiseCalibration:
    @staticmethod
    def _measured_rx_power(config, min_samples=100_000):
        # Mirror the transmit path of a burst and run it through the channel
        # with no noise, accumulating received sample power per antenna.
        n_sub = config.ofdm.num_subcarriers
        pairs = harness.burst_pairs(config)
        frame = config.pilot_frame_length if config.estimation == "hadamard_pilot" else 0
        num_symbols = frame + 2 * pairs
        total = 0.0
        count = 0
        batch = 0
        while count < min_samples:
            rng = numerics.rng_stream(config.seed, "chain-data", 0, batch)
            bits = rng.integers(0, 2, size=config.info_bits(pairs), dtype=np.uint8)
            coded = codec.conv_encode(bits, config.coding) if config.coding else bits
            symbols = codec.map_bits(coded, config.modulation)
            il = config.interleaver(pairs)
            if il is not None:
                symbols = codec.interleave(symbols, il)
            sym_grid = symbols.reshape(n_sub, 2 * pairs).T
            grid = stbc.alamouti_encode(sym_grid[0::2], sym_grid[1::2]) / np.sqrt(2.0)
            tx_freq = np.zeros(
                (num_symbols, config.num_tx_antennas, n_sub), dtype=np.complex128
            )
            if frame:
                pilots = stbc.make_pilot_frame(config.num_tx_antennas, frame) / np.sqrt(2.0)
                tx_freq[:frame] = pilots.T[:, :, None]
            tx_freq[frame:] = np.transpose(grid, (2, 0, 1, 3)).reshape(
                2 * pairs, config.num_tx_antennas, n_sub
            )
            tx_time = ofdm.modulate(tx_freq, config.ofdm)
            taps, delays = harness._burst_taps(
                config, num_symbols, harness._channel_seed(config.seed, 0, batch)
            )
            rx_time = harness._apply_quasi_static(tx_time, taps, delays)
            total += float(np.sum(np.abs(rx_time) ** 2))
            count += rx_time.size
            batch += 1
        return total / count

    @pytest.mark.parametrize("name", ["awgn-bpsk", "fig4.4-2path"])
    def test_within_two_tenths_db(self, name):
        # The sweep sets the noise variance to num_rx * mean_rx_power / snr;
        # the constant it divides by must match the power actually arriving
        # at the receiver to within 0.2 dB.
        config = presets.preset(name)
        assumed = harness._mean_rx_power(config)
        measured = self._measured_rx_power(config)
        assert abs(10.0 * np.log10(measured / assumed)) < 0.2


class TestDeterminism:
    def test_full_mode_worker_count_invariant(self):
        cfg = _mini("awgn-bpsk", snr_db=(2.0, 4.0), num_blocks=400)
        one = harness.run_ber_sweep(dataclasses.replace(cfg, workers=1))
        two = harness.run_ber_sweep(dataclasses.replace(cfg, workers=2))
        npt.assert_array_equal(one.bit_errors, two.bit_errors)
        npt.assert_array_equal(one.total_bits, two.total_bits)

    def test_fast_mode_worker_count_invariant(self):
        cfg = _mini(
            "fig4.4-2path", snr_db=(6.0,), num_blocks=2000, fast=True, target_errors=200
        )
        one = harness.run_ber_sweep(dataclasses.replace(cfg, workers=1))
        two = harness.run_ber_sweep(dataclasses.replace(cfg, workers=2))
        npt.assert_array_equal(one.bit_errors, two.bit_errors)
        npt.assert_array_equal(one.total_bits, two.total_bits)

    def test_same_seed_same_curve(self):
        # 4 dB keeps the error count in the hundreds, so two seeds agreeing
        # by chance is not a concern.
        cfg = _mini("fig4.4-2path", snr_db=(4.0,), num_blocks=200)
        a = harness.run_ber_sweep(cfg)
        b = harness.run_ber_sweep(cfg)
        npt.assert_array_equal(a.bit_errors, b.bit_errors)
        c = harness.run_ber_sweep(dataclasses.replace(cfg, seed=7))
        assert not np.array_equal(a.bit_errors, c.bit_errors)


class TestBitAccounting:
    def test_burst_pairs_static_vs_fading(self):
        assert harness.burst_pairs(presets.preset("awgn-bpsk")) == 100
        assert harness.burst_pairs(presets.preset("fig4.4-2path")) == 10
        assert harness.burst_pairs(presets.preset("fig4.6-selective")) == 10

    def test_counted_bits_arithmetic(self):
        # Coded BPSK, 10 pairs: 64 * 20 / 2 - 2 = 638 info bits per burst, of
        # which the first 64 are warm-up.  400 payload blocks = 20 bursts.
        cfg = _mini("fig4.4-2path", snr_db=(60.0,), num_blocks=400)
        curve = harness.run_ber_sweep(cfg)
        assert curve.total_bits[0] == 20 * (638 - 64)

    def test_uncoded_counted_bits(self):
        cfg = _mini("awgn-bpsk", snr_db=(8.0,), num_blocks=400)
        curve = harness.run_ber_sweep(cfg)
        # 100 pairs per burst, uncoded BPSK: 64 * 200 = 12800 bits per burst
        # minus the 64-bit warm-up; 400 blocks = 2 bursts.
        assert curve.total_bits[0] == 2 * (12800 - 64)


class TestHighSnrAndOrderings:
    def test_snr60_zero_errors(self):
        curve = harness.run_ber_sweep(_mini("fig4.4-2path", snr_db=(60.0,), num_blocks=100))
        assert curve.bit_errors[0] == 0

    def test_interleaver_gain_direction(self):
        # At a fixed mid-range SNR the three receiver variants must order:
        # uncoded worst, Viterbi better, Viterbi+interleaver best.
        base = _mini("fig4.4-2path", snr_db=(10.0,), num_blocks=24000, fast=True)
        uncoded = harness.run_ber_sweep(
            dataclasses.replace(base, coding=None, interleaved=False)
        )
        plain = harness.run_ber_sweep(dataclasses.replace(base, interleaved=False))
        interleaved = harness.run_ber_sweep(base)
        assert uncoded.ber[0] > 3.0 * plain.ber[0]
        assert plain.ber[0] > 3.0 * interleaved.ber[0]
        assert uncoded.bit_errors[0] >= 100 and plain.bit_errors[0] >= 100

    def test_diversity_ordering(self):
        cfg22 = _mini("fig4.5-2x2", snr_db=(5.0,), fast=True)
        cfg24 = _mini("fig4.5-2x4", snr_db=(5.0,), fast=True)
        b22 = harness.run_ber_sweep(cfg22)
        b24 = harness.run_ber_sweep(cfg24)
        assert b22.bit_errors[0] >= 100 and b24.bit_errors[0] >= 100
        assert b24.ber[0] <= b22.ber[0]


class TestGuardIntervalWarnings:
    def test_delay_beyond_guard_recorded(self):
        base = presets.preset("fig4.4-2path")
        spec = dataclasses.replace(
            base.rayleigh, tap_delays_s=(0.0, 4.0e-6), tap_powers=(0.5, 0.5)
        )
        cfg = dataclasses.replace(base, rayleigh=spec, snr_db=(10.0,), num_blocks=4)
        curve = harness.run_ber_sweep(cfg)
        assert len(curve.warnings) == 1
        assert "guard interval" in curve.warnings[0]

    def test_presets_fit_the_guard(self):
        for name in presets.CHAIN_PRESET_NAMES:
            cfg = _mini(name, snr_db=(10.0,), num_blocks=4)
            assert harness._guard_warnings(cfg) == ()


class TestConfigValidation:
    def test_bad_fields_rejected(self):
        base = presets.preset("awgn-bpsk")
        with pytest.raises(ValueError, match="channel_kind"):
            dataclasses.replace(base, channel_kind="bogus")
        with pytest.raises(ValueError, match="snr_db"):
            dataclasses.replace(base, snr_db=())
        with pytest.raises(ValueError, match="num_blocks"):
            dataclasses.replace(base, num_blocks=0)
        with pytest.raises(ValueError, match="estimation"):
            dataclasses.replace(base, estimation="psychic")
        with pytest.raises(ValueError, match="num_rx_antennas"):
            dataclasses.replace(base, num_rx_antennas=0)

    def test_channel_spec_required(self):
        rl = presets.preset("fig4.4-2path")
        with pytest.raises(ValueError, match="RayleighSpec"):
            dataclasses.replace(rl, rayleigh=None)


class TestAoaReport:
    def test_case1_single_user_echoes_config(self):
        case = presets.preset("scm-case1")
        report = harness.run_aoa_case(case)
        assert report.estimated_deg.shape == (1,)
        npt.assert_allclose(report.distances_m, [174.33], atol=1e-9)
        npt.assert_allclose(report.directions_deg, [-157.3], atol=1e-9)
        npt.assert_allclose(report.link_angles_deg, [30.0], atol=1e-9)
