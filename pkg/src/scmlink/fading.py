"""Rayleigh tapped-delay-line channel with Jakes-style Doppler.

Each tap is a sum of >= 64 equal-amplitude sinusoids whose Doppler shifts
follow ``f_d * cos(angle)`` over a uniformly spaced (randomly rotated) angle
grid, with independent uniform phases. That yields Rayleigh envelopes and
the classical J0(2*pi*f_d*tau) autocorrelation without storing any state:
taps are explicit functions of time, so disjoint time ranges can be
evaluated independently (and in parallel) without changing the realization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics

__all__ = [
    "TdlConfig",
    "FadingRealization",
    "TdlProcess",
    "generate_taps",
    "apply",
    "scm_frequency_response",
]

# Largest chunk of exp() evaluations per call, to bound peak memory.
_CHUNK = 8_000_000


@dataclass(frozen=True)
class TdlConfig:
    """Tapped-delay-line description.

    Tap delays are quantized to the sample grid; powers must sum to one.
    ``doppler_hz`` is used verbatim (0 freezes the taps). ``max_delay_s``
    bounds the profile; experiment presets keep it within the cyclic prefix
    unless explicitly reproducing the longer published profile.
    """

    tap_delays_s: tuple[float, ...]
    tap_powers: tuple[float, ...]
    doppler_hz: float
    sample_time_s: float = 0.2e-6
    num_sinusoids: int = 128
    max_delay_s: float = 5e-6

    def __post_init__(self) -> None:
        d = np.asarray(self.tap_delays_s, dtype=np.float64)
        p = np.asarray(self.tap_powers, dtype=np.float64)
        if d.size < 1:
            raise ValueError("tap_delays_s must hold at least one tap")
        if d.size != p.size:
            raise ValueError(
                f"tap_delays_s has {d.size} entries but tap_powers has {p.size}"
            )
        if np.any(d < 0) or np.any(np.diff(d) <= 0):
            raise ValueError("tap_delays_s must be non-negative and strictly ascending")
        if np.any(d > self.max_delay_s):
            raise ValueError(
                f"tap_delays_s exceed max_delay_s={self.max_delay_s}: {self.tap_delays_s}"
            )
        if np.any(p <= 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"tap_powers must be positive and sum to 1, got {self.tap_powers}")
        if self.doppler_hz < 0:
            raise ValueError(f"doppler_hz must be >= 0, got {self.doppler_hz}")
        if self.sample_time_s <= 0:
            raise ValueError(f"sample_time_s must be positive, got {self.sample_time_s}")
        if self.num_sinusoids < 64:
            raise ValueError(f"num_sinusoids must be >= 64, got {self.num_sinusoids}")
        if len(set(self.delay_samples.tolist())) != d.size:
            raise ValueError(
                f"tap_delays_s collapse onto the same sample(s) at sample_time_s="
                f"{self.sample_time_s}: {self.tap_delays_s}"
            )

    @property
    def num_taps(self) -> int:
        return len(self.tap_delays_s)

    @property
    def delay_samples(self) -> np.ndarray:
        """Tap delays quantized to the sample grid (integer samples)."""
        return np.rint(np.asarray(self.tap_delays_s) / self.sample_time_s).astype(np.int64)


@dataclass(frozen=True)
class FadingRealization:
    """A sampled tap trajectory: ``taps[p, n]`` at times ``n * sample_time_s``."""

    taps: np.ndarray
    delay_samples: np.ndarray
    sample_time_s: float


class TdlProcess:
    """Jakes process bank for a grid of (rx, tx) antenna pairs.

    Every (rx, tx, tap) triple gets its own independent sinusoid bank keyed
    from ``(seed, 'tdl', rx, tx, tap)``, so spatial branches are
    uncorrelated and the realization does not depend on evaluation order.
    """

    def __init__(self, config: TdlConfig, seed: int, num_rx: int = 1, num_tx: int = 1):
        self.config = config
        self.num_rx = num_rx
        self.num_tx = num_tx
        ns = config.num_sinusoids
        omega = np.empty((num_rx, num_tx, config.num_taps, ns))
        phase = np.empty_like(omega)
        for j in range(num_rx):
            for i in range(num_tx):
                for p in range(config.num_taps):
                    rng = numerics.rng_stream(seed, "tdl", j, i, p)
                    rotation = rng.uniform()
                    angles = 2.0 * np.pi * (np.arange(ns) + rotation) / ns
                    omega[j, i, p] = 2.0 * np.pi * config.doppler_hz * np.cos(angles)
                    phase[j, i, p] = rng.uniform(0.0, 2.0 * np.pi, ns)
        self._omega = omega.reshape(-1, ns)
        self._phase = phase.reshape(-1, ns)
        per_tap = np.sqrt(np.asarray(config.tap_powers) / ns)
        self._amp_rows = np.repeat(per_tap, ns).reshape(config.num_taps, ns)
        self._amp_rows = np.tile(self._amp_rows, (num_rx * num_tx, 1))

    def taps_at(self, times_s: np.ndarray) -> np.ndarray:
        """Evaluate tap gains at arbitrary times.

        Returns complex ``[num_rx, num_tx, num_taps, len(times)]`` with
        per-tap mean power equal to the configured tap power.
        """
        t = np.asarray(times_s, dtype=np.float64).reshape(-1)
        ns = self.config.num_sinusoids
        rows = self._omega.shape[0]
        out = np.empty((rows, t.size), dtype=np.complex128)
        step = max(1, _CHUNK // (rows * ns))
        for lo in range(0, t.size, step):
            hi = min(lo + step, t.size)
            theta = self._omega[:, :, None] * t[None, None, lo:hi] + self._phase[:, :, None]
            bank = np.exp(1j * theta)
            bank *= self._amp_rows[:, :, None]
            out[:, lo:hi] = bank.sum(axis=1)
        return out.reshape(self.num_rx, self.num_tx, self.config.num_taps, t.size)


def generate_taps(config: TdlConfig, num_samples: int, seed: int) -> FadingRealization:
    """Sample one single-antenna tap trajectory on the config's sample grid."""
    if num_samples < 1:
        raise ValueError(f"num_samples must be >= 1, got {num_samples}")
    proc = TdlProcess(config, seed)
    times = np.arange(num_samples) * config.sample_time_s
    return FadingRealization(
        taps=proc.taps_at(times)[0, 0],
        delay_samples=config.delay_samples.copy(),
        sample_time_s=config.sample_time_s,
    )


def apply(tx_samples: np.ndarray, fading: FadingRealization) -> np.ndarray:
    """Pass a sample stream through the time-varying tapped delay line.

    ``y[n] = sum_p taps[p, n] * x[n - d_p]`` for n in
    ``[0, len(x) + max_delay)``; the realization must cover that output
    range. The tail carries the delayed echoes of the final input samples.
    """
    x = np.asarray(tx_samples, dtype=np.complex128)
    if x.ndim != 1:
        raise ValueError(f"tx_samples must be 1-D, got shape {x.shape}")
    delays = fading.delay_samples
    out_len = x.size + int(delays.max())
    if fading.taps.shape[1] < out_len:
        raise ValueError(
            f"fading realization covers {fading.taps.shape[1]} samples but the "
            f"output needs {out_len}"
        )
    y = np.zeros(out_len, dtype=np.complex128)
    for p, d in enumerate(delays):
        y[d : d + x.size] += fading.taps[p, d : d + x.size] * x
    return y


def scm_frequency_response(tensor, link: int, time_index: int, ofdm_config) -> np.ndarray:
    """Per-subcarrier MIMO response of one spatial-channel-model link.

    ``tensor`` is a ChannelTensor (see :mod:`scmlink.scm`); the slice at
    ``(link, time_index)`` holds per-path coefficient matrices which are
    summed with their delay phase ramps:

    ``H[l, m, k] = sum_p h[l, m, p] * exp(-2j*pi * k * df * delay_p)``

    with ``df = 1 / (num_subcarriers * sample_time_s)``.
    """
    coeffs = tensor.coefficients
    n_links, n_times = coeffs.shape[2], coeffs.shape[4]
    if not 0 <= link < n_links:
        raise ValueError(f"link index {link} out of range [0, {n_links})")
    if not 0 <= time_index < n_times:
        raise ValueError(f"time index {time_index} out of range [0, {n_times})")
    h = coeffs[:, :, link, :, time_index]  # [L, M, K]
    delays = np.asarray(tensor.path_params[link].delays_s)
    df = 1.0 / (ofdm_config.num_subcarriers * ofdm_config.sample_time_s)
    k = np.arange(ofdm_config.num_subcarriers)
    ramp = np.exp(-2j * np.pi * df * np.outer(delays, k))  # [K, n_sc]
    return np.einsum("lmp,pk->lmk", h, ramp)
