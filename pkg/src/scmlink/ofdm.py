"""Cyclic-prefix OFDM modulation, demodulation, and per-bin equalization.

Transforms are unitary (1/sqrt(N) both ways) so symbol energy is preserved
end to end and noise variance is the same in either domain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics

__all__ = ["OfdmConfig", "modulate", "demodulate", "equalize"]

# Bins whose channel magnitude falls below this are zeroed and flagged as
# erasures instead of amplifying noise by a near-singular inversion.
EQUALIZER_EPS = 1e-9


@dataclass(frozen=True)
class OfdmConfig:
    num_subcarriers: int = 64
    cp_length: int = 10
    sample_time_s: float = 0.2e-6

    def __post_init__(self) -> None:
        n = self.num_subcarriers
        if n < 2 or (n & (n - 1)) != 0:
            raise ValueError(f"num_subcarriers must be a power of two >= 2, got {n}")
        if self.cp_length < 0:
            raise ValueError(f"cp_length must be >= 0, got {self.cp_length}")
        if self.sample_time_s <= 0:
            raise ValueError(f"sample_time_s must be positive, got {self.sample_time_s}")

    @property
    def symbol_length(self) -> int:
        """Time-domain samples per OFDM symbol including the cyclic prefix."""
        return self.num_subcarriers + self.cp_length

    @property
    def symbol_duration_s(self) -> float:
        return self.symbol_length * self.sample_time_s

    @property
    def subcarrier_spacing_hz(self) -> float:
        return 1.0 / (self.num_subcarriers * self.sample_time_s)

    def cp_covers(self, channel_length: int) -> bool:
        """True when a channel impulse response of this length is absorbed
        by the cyclic prefix (no inter-symbol interference)."""
        return channel_length <= self.cp_length + 1


def modulate(symbols: np.ndarray, config: OfdmConfig) -> np.ndarray:
    """Frequency-domain symbols -> time-domain samples with cyclic prefix.

    The last axis must hold ``num_subcarriers`` entries; leading axes are
    treated as independent OFDM symbols. Output last axis has
    ``num_subcarriers + cp_length`` samples.
    """
    sym = np.asarray(symbols, dtype=np.complex128)
    if sym.shape[-1] != config.num_subcarriers:
        raise ValueError(
            f"expected {config.num_subcarriers} subcarrier symbols, got {sym.shape[-1]}"
        )
    time = numerics.ifft(sym, axis=-1)
    if config.cp_length == 0:
        return time
    return np.concatenate([time[..., -config.cp_length :], time], axis=-1)


def demodulate(samples: np.ndarray, config: OfdmConfig) -> np.ndarray:
    """Time-domain samples (with cyclic prefix) -> frequency-domain symbols."""
    x = np.asarray(samples, dtype=np.complex128)
    if x.shape[-1] != config.symbol_length:
        raise ValueError(
            f"expected {config.symbol_length} time samples per OFDM symbol, got {x.shape[-1]}"
        )
    return numerics.fft(x[..., config.cp_length :], axis=-1)


def equalize(rx_symbols: np.ndarray, channel: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-bin division of received symbols by the channel response.

    Returns ``(equalized, erasures)``. Bins where ``|channel| < 1e-9`` are
    zeroed and flagged True in the boolean erasure mask so downstream
    demapping can treat them as carrying no information.
    """
    rx = np.asarray(rx_symbols, dtype=np.complex128)
    h = np.asarray(channel, dtype=np.complex128)
    if rx.shape != h.shape:
        raise ValueError(f"shape mismatch: rx {rx.shape} vs channel {h.shape}")
    erasures = np.abs(h) < EQUALIZER_EPS
    safe = np.where(erasures, 1.0, h)
    eq = np.where(erasures, 0.0, rx / safe)
    return eq, erasures
