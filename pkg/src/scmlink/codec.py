"""Convolutional coding, block interleaving, and Gray PSK/QAM mapping.

The Viterbi decoder has two interchangeable kernels: a Cython extension
(:mod:`scmlink._viterbi_cy`) and a batched numpy fallback
(:mod:`scmlink._viterbi_np`). Whichever imports first wins; the active one
is reported by :data:`VITERBI_BACKEND`. ``benchmarks/bench_viterbi.py``
compares their throughput.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

try:
    from . import _viterbi_cy as _kernel
except ImportError:  # compiled extension not built; numpy path is equivalent
    from . import _viterbi_np as _kernel

VITERBI_BACKEND: str = _kernel.BACKEND

__all__ = [
    "ConvCodeConfig",
    "InterleaverConfig",
    "ModulationConfig",
    "VITERBI_BACKEND",
    "conv_encode",
    "viterbi_decode",
    "interleave",
    "deinterleave",
    "constellation",
    "bits_per_symbol",
    "map_bits",
    "demap_symbols",
]


@dataclass(frozen=True)
class ConvCodeConfig:
    """Rate-1/2 binary convolutional code.

    ``generators`` are the usual octal tap constants (current input in the
    top bit), e.g. the default (7, 5) = (111, 101) with constraint length 3.
    Encoding starts from the zero state and appends a zero tail of
    ``constraint_length - 1`` bits so every block terminates in state zero.
    """

    constraint_length: int = 3
    generators: tuple[int, int] = (7, 5)
    traceback_depth: int = 15

    def __post_init__(self) -> None:
        k = self.constraint_length
        if not 2 <= k <= 12:
            raise ValueError(f"constraint_length must be in [2, 12], got {k}")
        if len(self.generators) != 2:
            raise ValueError("rate is fixed at 1/2: exactly two generators required")
        for g in self.generators:
            if not 0 < g < (1 << k):
                raise ValueError(f"generator {g:o} (octal) does not fit constraint length {k}")
        if self.traceback_depth < k:
            raise ValueError(
                f"traceback_depth {self.traceback_depth} shorter than constraint length {k}"
            )

    @property
    def num_states(self) -> int:
        return 1 << (self.constraint_length - 1)

    @property
    def tail_bits(self) -> int:
        return self.constraint_length - 1


@lru_cache(maxsize=16)
def _trellis_tables(constraint_length: int, generators: tuple[int, int]):
    """Predecessor table and output-pattern table for the decoder kernels."""
    k = constraint_length
    num_states = 1 << (k - 1)
    prev_state = np.empty((num_states, 2), dtype=np.int32)
    prev_pattern = np.empty((num_states, 2), dtype=np.int32)
    mask = num_states - 1
    for ns in range(num_states):
        b = ns >> (k - 2)  # input bit that caused the transition into ns
        for j in range(2):
            ps = ((ns << 1) & mask) | j
            window = (b << (k - 1)) | ps
            o0 = bin(window & generators[0]).count("1") & 1
            o1 = bin(window & generators[1]).count("1") & 1
            prev_state[ns, j] = ps
            prev_pattern[ns, j] = (o0 << 1) | o1
    return prev_state, prev_pattern


def _as_bit_rows(bits: np.ndarray, name: str) -> tuple[np.ndarray, bool]:
    arr = np.asarray(bits)
    if arr.ndim == 1:
        return arr[None, :], True
    if arr.ndim == 2:
        return arr, False
    raise ValueError(f"{name} must be 1-D or 2-D, got {arr.ndim}-D")


def conv_encode(bits: np.ndarray, config: ConvCodeConfig = ConvCodeConfig()) -> np.ndarray:
    """Encode a bit vector (or a batch of rows) with the zero-tailed code.

    Output length is ``2 * (len(bits) + constraint_length - 1)`` with the two
    generator outputs interleaved per input bit.
    """
    rows, squeeze = _as_bit_rows(bits, "bits")
    if rows.size and not np.isin(rows, (0, 1)).all():
        raise ValueError("bits must contain only 0 and 1")
    rows = rows.astype(np.uint8)
    k = config.constraint_length
    n_rows, n_bits = rows.shape
    x = np.concatenate([rows, np.zeros((n_rows, k - 1), dtype=np.uint8)], axis=1)
    padded = np.concatenate([np.zeros((n_rows, k - 1), dtype=np.uint8), x], axis=1)
    total = n_bits + k - 1
    out = np.empty((n_rows, total, 2), dtype=np.uint8)
    for j, gen in enumerate(config.generators):
        acc = np.zeros((n_rows, total), dtype=np.uint8)
        for tap in range(k):
            if (gen >> (k - 1 - tap)) & 1:
                acc ^= padded[:, k - 1 - tap : k - 1 - tap + total]
        out[:, :, j] = acc
    flat = out.reshape(n_rows, 2 * total)
    return flat[0] if squeeze else flat


def viterbi_decode(
    received: np.ndarray,
    config: ConvCodeConfig = ConvCodeConfig(),
    soft: bool = False,
    terminated: bool = True,
) -> np.ndarray:
    """Maximum-likelihood decode of one block or a batch of blocks.

    Hard input is 0/1 decisions scored by Hamming distance; soft input is
    per-bit reliabilities toward bit 1 scored by absolute difference (the two
    coincide for 0/1 input). Terminated blocks trace back from the zero state
    and the tail bits are stripped; otherwise the best-metric final state is
    used and all decided bits are returned.
    """
    rows, squeeze = _as_bit_rows(received, "received")
    if rows.shape[1] == 0 or rows.shape[1] % 2:
        raise ValueError(f"received length must be a positive multiple of 2, got {rows.shape[1]}")
    if soft:
        rows = rows.astype(np.float64)
        if not np.all(np.isfinite(rows)):
            raise ValueError("soft input contains NaN or Inf")
    else:
        if not np.isin(rows, (0, 1)).all():
            raise ValueError("hard input must contain only 0 and 1")
        rows = rows.astype(np.float64)
    steps = rows.shape[1] // 2
    n_tail = config.tail_bits if terminated else 0
    if steps <= n_tail:
        raise ValueError(f"{steps} trellis steps cannot carry a {n_tail}-bit tail")
    prev_state, prev_pattern = _trellis_tables(config.constraint_length, config.generators)
    r = rows.reshape(rows.shape[0], steps, 2)
    decoded = _kernel.decode_batch(r, prev_state, prev_pattern, n_tail, terminated)
    return decoded[0] if squeeze else decoded


@dataclass(frozen=True)
class InterleaverConfig:
    """Block interleaver: written row-wise, read column-wise.

    For the OFDM chain, ``cols`` is the number of subcarriers and ``rows``
    the number of code bits riding on each subcarrier within a codeword, so
    adjacent code bits come out on adjacent subcarriers (frequency domain)
    or adjacent symbol slots (time domain).
    """

    rows: int
    cols: int
    domain: str = "frequency"

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"interleaver dimensions must be positive, got {self.rows}x{self.cols}")
        if self.domain not in ("frequency", "time"):
            raise ValueError(f"interleaver domain must be 'frequency' or 'time', got {self.domain!r}")

    @property
    def block_length(self) -> int:
        return self.rows * self.cols


def interleave(x: np.ndarray, config: InterleaverConfig) -> np.ndarray:
    x = np.asarray(x)
    if x.shape[-1] != config.block_length:
        raise ValueError(
            f"interleaver block length {config.block_length} != input length {x.shape[-1]}"
        )
    shape = x.shape[:-1]
    return x.reshape(shape + (config.rows, config.cols)).swapaxes(-1, -2).reshape(shape + (-1,))


def deinterleave(x: np.ndarray, config: InterleaverConfig) -> np.ndarray:
    x = np.asarray(x)
    if x.shape[-1] != config.block_length:
        raise ValueError(
            f"interleaver block length {config.block_length} != input length {x.shape[-1]}"
        )
    shape = x.shape[:-1]
    return x.reshape(shape + (config.cols, config.rows)).swapaxes(-1, -2).reshape(shape + (-1,))


@dataclass(frozen=True)
class ModulationConfig:
    """Gray-labelled PSK or square QAM with unit average symbol energy.

    PSK places the label ``gray(m)`` at angle ``2*pi*m/M`` (so order 2 maps
    bit 0 to +1 and bit 1 to -1). QAM of order 4 uses one sign bit per axis
    (00 in the first quadrant); order 16 uses the per-axis Gray levels
    {00: -3, 01: -1, 11: +1, 10: +3} scaled by 1/sqrt(10). The first bit of
    each group is the most significant.
    """

    family: str = "psk"
    order: int = 2

    def __post_init__(self) -> None:
        if self.family not in ("psk", "qam"):
            raise ValueError(f"modulation family must be 'psk' or 'qam', got {self.family!r}")
        if self.order not in (2, 4, 16):
            raise ValueError(f"modulation order must be 2, 4, or 16, got {self.order}")


def bits_per_symbol(config: ModulationConfig) -> int:
    return int(np.log2(config.order))


_QAM16_LEVELS = np.array([-3.0, -1.0, 3.0, 1.0])  # indexed by the 2-bit label value


@lru_cache(maxsize=8)
def _points(family: str, order: int) -> np.ndarray:
    """Constellation points indexed by symbol value (bits MSB-first)."""
    if order == 2:
        return np.array([1.0 + 0.0j, -1.0 + 0.0j])
    if family == "psk":
        pts = np.empty(order, dtype=np.complex128)
        for m in range(order):
            label = m ^ (m >> 1)
            pts[label] = np.exp(2j * np.pi * m / order)
        return pts
    if order == 4:
        v = np.arange(4)
        return (((1 - 2 * (v >> 1)) + 1j * (1 - 2 * (v & 1))) / np.sqrt(2)).astype(np.complex128)
    v = np.arange(16)
    i_level = _QAM16_LEVELS[v >> 2]
    q_level = _QAM16_LEVELS[v & 3]
    return ((i_level + 1j * q_level) / np.sqrt(10)).astype(np.complex128)


def constellation(config: ModulationConfig) -> np.ndarray:
    """Return the constellation, indexed by symbol value (a copy)."""
    return _points(config.family, config.order).copy()


def map_bits(bits: np.ndarray, config: ModulationConfig) -> np.ndarray:
    """Map a bit vector to unit-average-energy symbols, MSB first per group."""
    arr = np.asarray(bits)
    if arr.ndim != 1:
        raise ValueError(f"map_bits expects a 1-D bit vector, got {arr.ndim}-D")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError("bits must contain only 0 and 1")
    b = bits_per_symbol(config)
    if arr.size % b:
        raise ValueError(f"bit count {arr.size} is not a multiple of {b}")
    groups = arr.astype(np.int64).reshape(-1, b)
    values = groups @ (1 << np.arange(b - 1, -1, -1, dtype=np.int64))
    return _points(config.family, config.order)[values]


def demap_symbols(
    symbols: np.ndarray,
    config: ModulationConfig,
    soft: bool = False,
    erasures: np.ndarray | None = None,
) -> np.ndarray:
    """Demap symbols to bits (hard) or per-bit reliabilities in [0, 1] (soft).

    Soft output for each bit is d0/(d0+d1) where d0/d1 are the squared
    distances to the nearest constellation point labelled 0/1 at that
    position, i.e. 0 means a confident 0 and 1 a confident 1. Positions
    flagged in ``erasures`` carry no information: hard output 0, soft 0.5.
    """
    sym = np.asarray(symbols, dtype=np.complex128)
    if sym.ndim != 1:
        raise ValueError(f"demap_symbols expects a 1-D symbol vector, got {sym.ndim}-D")
    b = bits_per_symbol(config)
    pts = _points(config.family, config.order)
    labels = np.arange(config.order)
    dist2 = np.abs(sym[:, None] - pts[None, :]) ** 2
    if erasures is not None:
        erasures = np.asarray(erasures, dtype=bool)
        if erasures.shape != sym.shape:
            raise ValueError("erasures mask must match the symbol vector shape")
    if not soft:
        values = np.argmin(dist2, axis=1)
        if erasures is not None:
            values = np.where(erasures, 0, values)
        shifts = np.arange(b - 1, -1, -1)
        return ((values[:, None] >> shifts[None, :]) & 1).astype(np.uint8).reshape(-1)
    rel = np.empty((sym.size, b))
    for pos in range(b):
        bit = (labels >> (b - 1 - pos)) & 1
        d0 = dist2[:, bit == 0].min(axis=1)
        d1 = dist2[:, bit == 1].min(axis=1)
        rel[:, pos] = d0 / (d0 + d1 + 1e-300)
    if erasures is not None:
        rel[erasures, :] = 0.5
    return rel.reshape(-1)
