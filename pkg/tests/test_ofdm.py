"""OFDM modulator, demodulator, and zero-forcing equalizer."""

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scmlink import ofdm
from scmlink.ofdm import OfdmConfig

_DEFAULT = OfdmConfig()


def _random_symbols(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


class TestModulate:
    def test_zero_in_zero_out(self):
        out = ofdm.modulate(np.zeros(64, dtype=np.complex128), _DEFAULT)
        npt.assert_array_equal(out, np.zeros(64 + 10, dtype=np.complex128))

    def test_small_delta(self):
        cfg = OfdmConfig(num_subcarriers=4, cp_length=0)
        sym = np.array([1.0, 0.0, 0.0, 0.0], dtype=np.complex128)
        npt.assert_allclose(ofdm.modulate(sym, cfg), np.full(4, 0.5 + 0.0j), atol=1e-12)

    def test_cyclic_prefix_copies_tail(self):
        rng = np.random.default_rng(20)
        tx = ofdm.modulate(_random_symbols(rng, 64), _DEFAULT)
        assert tx.shape == (74,)
        npt.assert_allclose(tx[:10], tx[-10:], atol=1e-12)

    def test_unitary_body_energy(self):
        rng = np.random.default_rng(21)
        sym = _random_symbols(rng, 64)
        tx = ofdm.modulate(sym, _DEFAULT)
        body = tx[_DEFAULT.cp_length:]
        assert np.sum(np.abs(body) ** 2) == pytest.approx(np.sum(np.abs(sym) ** 2), abs=1e-12)

    def test_wrong_length_rejected(self):
        with pytest.raises(ValueError):
            ofdm.modulate(np.zeros(63, dtype=np.complex128), _DEFAULT)


class TestDemodulate:
    def test_roundtrip(self):
        rng = np.random.default_rng(22)
        sym = _random_symbols(rng, 64)
        npt.assert_allclose(ofdm.demodulate(ofdm.modulate(sym, _DEFAULT), _DEFAULT), sym, atol=1e-12)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_roundtrip_property(self, seed):
        rng = np.random.default_rng(seed)
        sym = _random_symbols(rng, 64)
        npt.assert_allclose(ofdm.demodulate(ofdm.modulate(sym, _DEFAULT), _DEFAULT), sym, atol=1e-12)

    def test_single_tap_scales(self):
        rng = np.random.default_rng(23)
        sym = _random_symbols(rng, 64)
        rx = 0.5 * ofdm.modulate(sym, _DEFAULT)
        npt.assert_allclose(ofdm.demodulate(rx, _DEFAULT), 0.5 * sym, atol=1e-12)

    def test_multipath_diagonalizes(self):
        # Any impulse response no longer than cp_length + 1 taps acts per
        # subcarrier as multiplication by its DFT gain; the oracle is plain
        # linear convolution of the CP-extended word.
        rng = np.random.default_rng(24)
        sym = _random_symbols(rng, 64)
        tx = ofdm.modulate(sym, _DEFAULT)
        h = np.array([0.9, 0.0, 0.4 - 0.2j, 0.1j])
        rx = np.convolve(tx, h)[: tx.size]
        gains = np.fft.fft(h, 64)
        npt.assert_allclose(ofdm.demodulate(rx, _DEFAULT), gains * sym, atol=1e-10)


class TestEqualize:
    def test_all_ones_channel_identity(self):
        rng = np.random.default_rng(25)
        sym = _random_symbols(rng, 64)
        eq, erased = ofdm.equalize(sym, np.ones(64, dtype=np.complex128))
        npt.assert_allclose(eq, sym, atol=1e-12)
        assert not erased.any()

    def test_exact_recovery(self):
        rng = np.random.default_rng(26)
        sym = _random_symbols(rng, 64)
        h = _random_symbols(rng, 64)
        eq, erased = ofdm.equalize(h * sym, h)
        npt.assert_allclose(eq, sym, atol=1e-12)
        assert not erased.any()

    def test_zero_bin_flagged(self):
        sym = np.ones(8, dtype=np.complex128)
        h = np.ones(8, dtype=np.complex128)
        h[3] = 0.0
        eq, erased = ofdm.equalize(h * sym, h)
        assert eq[3] == 0.0
        assert erased[3]
        assert erased.sum() == 1
        npt.assert_allclose(eq[~erased], 1.0, atol=1e-12)
