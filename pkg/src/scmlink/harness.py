"""Monte-Carlo link simulation: coded Alamouti MIMO-OFDM over fading channels.

The transmit chain per burst is: info bits -> convolutional encoder ->
block interleaver -> constellation mapper -> Alamouti pairing across
consecutive OFDM symbols per subcarrier -> OFDM modulation on two transmit
antennas. The channel is applied in the time domain with quasi-static taps
per OFDM symbol (tap spill past a symbol carries into the next one, so
delays longer than the cyclic prefix produce genuine interference). The
receiver estimates CSI from a Hadamard pilot frame preceding each burst
(or uses the exact response), combines, equalizes, demaps, deinterleaves,
and Viterbi-decodes.

SNR convention: ``snr_db`` is the average post-combiner symbol SNR. Noise
of variance ``num_rx * mean_rx_power / snr`` is added per receive antenna
sample, which reduces to Es/N0 for a single-antenna AWGN link.

Each (snr point, burst) pair draws its bits, noise, and channel
realization from keyed streams, so results are reproducible and do not
depend on worker scheduling.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import aoa as aoa_mod
from . import codec, fading, numerics, ofdm, scm, stbc

__all__ = [
    "RayleighSpec",
    "ScmChainSpec",
    "ExperimentConfig",
    "BerCurve",
    "AoaCaseConfig",
    "AoaReport",
    "burst_pairs",
    "run_ber_sweep",
    "run_aoa_case",
    "theoretical_bpsk_awgn_ber",
]

_CHANNEL_KINDS = ("awgn", "rayleigh", "scm")
_ESTIMATION_MODES = ("perfect", "hadamard_pilot")
# Fixed frame format: one pilot frame then 10 Alamouti pairs, sized so the
# payload spans about a tenth of the coherence time 0.423 / f_d at the
# highest supported Doppler (141.6 Hz). Because the format does not adapt
# to f_d, channel-estimate staleness grows with Doppler, which is what
# produces the irreducible high-Doppler error floor.
_BURST_PAIRS_FADING = 10
_BURST_PAIRS_STATIC = 100


@dataclass(frozen=True)
class RayleighSpec:
    """Tapped-delay-line Rayleigh channel for the link chain."""

    tap_delays_s: tuple[float, ...]
    tap_powers: tuple[float, ...]
    doppler_hz: float


@dataclass(frozen=True)
class ScmChainSpec:
    """Geometric channel for the link chain: one AP-to-user link."""

    config: scm.ScmConfig
    link: scm.LinkConfig


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one BER-vs-SNR experiment."""

    name: str
    channel_kind: str
    num_rx_antennas: int
    modulation: codec.ModulationConfig
    snr_db: tuple[float, ...]
    ofdm: ofdm.OfdmConfig = field(default_factory=ofdm.OfdmConfig)
    coding: codec.ConvCodeConfig | None = field(default_factory=codec.ConvCodeConfig)
    interleaved: bool = True
    estimation: str = "hadamard_pilot"
    num_blocks: int = 20000
    seed: int = 42
    rayleigh: RayleighSpec | None = None
    scm: ScmChainSpec | None = None
    pilot_frame_length: int = 8
    soft_decisions: bool = False
    fast: bool = False
    target_errors: int = 500
    workers: int | None = None

    def __post_init__(self) -> None:
        if self.channel_kind not in _CHANNEL_KINDS:
            raise ValueError(f"channel_kind must be one of {_CHANNEL_KINDS}, got {self.channel_kind!r}")
        if self.estimation not in _ESTIMATION_MODES:
            raise ValueError(f"estimation must be one of {_ESTIMATION_MODES}, got {self.estimation!r}")
        if self.channel_kind == "rayleigh" and self.rayleigh is None:
            raise ValueError("rayleigh channel requires a RayleighSpec")
        if self.channel_kind == "scm" and self.scm is None:
            raise ValueError("scm channel requires a ScmChainSpec")
        if self.num_rx_antennas < 1:
            raise ValueError(f"num_rx_antennas must be >= 1, got {self.num_rx_antennas}")
        if len(self.snr_db) < 1:
            raise ValueError("snr_db must hold at least one point")
        if self.num_blocks < 4:
            raise ValueError(f"num_blocks must be >= 4, got {self.num_blocks}")
        if self.pilot_frame_length < 2 or self.pilot_frame_length & (self.pilot_frame_length - 1):
            raise ValueError(
                f"pilot_frame_length must be a power of two >= 2, got {self.pilot_frame_length}"
            )
        if self.target_errors < 1:
            raise ValueError(f"target_errors must be >= 1, got {self.target_errors}")

    @property
    def num_tx_antennas(self) -> int:
        return 2

    def info_bits(self, num_pairs: int) -> int:
        """Info bits carried by a payload of ``num_pairs`` Alamouti pairs.

        The payload forms a single codeword: rate-1/2 coded with a zero
        tail, ``2 * (n + tail)`` coded bits fill the grid exactly.
        """
        capacity = 2 * num_pairs * self.ofdm.num_subcarriers * codec.bits_per_symbol(self.modulation)
        if self.coding is None:
            return capacity
        return capacity // 2 - self.coding.tail_bits

    @property
    def doppler_hz(self) -> float:
        if self.channel_kind == "rayleigh":
            return self.rayleigh.doppler_hz
        if self.channel_kind == "scm":
            return self.scm.link.speed_mps / self.scm.config.wavelength_m
        return 0.0

    def interleaver(self, num_pairs: int) -> codec.InterleaverConfig | None:
        """Symbol-level block interleaver over one codeword: rows = OFDM
        symbols per codeword, cols = subcarriers.

        The plain chain parallelizes the symbol stream time-major, so one
        codeword sends long runs of consecutive coded symbols down each
        subcarrier and a faded bin erases a whole run. Interleaving
        transposes that order, spreading adjacent code symbols across
        subcarriers so fades hit isolated, correctable positions.
        """
        if not self.interleaved:
            return None
        return codec.InterleaverConfig(rows=2 * num_pairs, cols=self.ofdm.num_subcarriers)


def burst_pairs(config: ExperimentConfig) -> int:
    """Alamouti pairs per pilot-to-pilot burst.

    Fixed frame format (see module constants); a static channel uses long
    bursts as a pure batching granularity.
    """
    if config.doppler_hz <= 0:
        return _BURST_PAIRS_STATIC
    return _BURST_PAIRS_FADING


def _channel_seed(seed: int, snr_index: int, batch_index: int) -> int:
    rng = numerics.rng_stream(seed, "chain-channel", snr_index, batch_index)
    return int(rng.integers(0, 2**62))


def _mean_rx_power(config: ExperimentConfig) -> float:
    """Average received power per antenna for unit-energy constellation
    symbols split across the two transmit antennas."""
    if config.channel_kind == "awgn":
        return 0.5
    return 1.0


def _burst_taps(
    config: ExperimentConfig, num_symbols: int, channel_seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Quasi-static channel taps for one burst.

    Returns ``(taps[num_rx, num_tx, P, num_symbols], delay_samples[P])``
    evaluated at the start time of each OFDM symbol.
    """
    nr, nt = config.num_rx_antennas, config.num_tx_antennas
    times = np.arange(num_symbols) * config.ofdm.symbol_duration_s
    if config.channel_kind == "awgn":
        taps = np.zeros((nr, nt, 1, num_symbols), dtype=np.complex128)
        taps[0, 0, 0, :] = 1.0
        return taps, np.zeros(1, dtype=np.int64)
    if config.channel_kind == "rayleigh":
        spec = config.rayleigh
        tdl = fading.TdlConfig(
            tap_delays_s=spec.tap_delays_s,
            tap_powers=spec.tap_powers,
            doppler_hz=spec.doppler_hz,
            sample_time_s=config.ofdm.sample_time_s,
        )
        process = fading.TdlProcess(tdl, channel_seed, num_rx=nr, num_tx=nt)
        return process.taps_at(times), tdl.delay_samples
    spec = config.scm
    ap = scm.AntennaConfig(num_elements=nt)
    user = scm.AntennaConfig(num_elements=nr)
    params = scm.draw_bulk_parameters(spec.config, (spec.link,), channel_seed)[0]
    coeff = scm.channel_coefficients(params, ap, user, spec.link, spec.config, times)
    taps = np.transpose(coeff, (1, 0, 2, 3))  # [rx=user, tx=ap, path, time]
    delays = np.rint(params.delays_s / config.ofdm.sample_time_s).astype(np.int64)
    return taps, delays


def _apply_quasi_static(
    tx: np.ndarray, taps: np.ndarray, delay_samples: np.ndarray
) -> np.ndarray:
    """Run per-symbol blocks through the tapped channel.

    ``tx`` is ``[T, num_tx, symbol_len]``; taps are held constant within
    each symbol. Tap output extending past a symbol is added to the head
    of the next symbol, preserving contiguous-stream semantics.
    """
    num_symbols, _, sym_len = tx.shape
    num_rx = taps.shape[0]
    max_delay = int(delay_samples.max())
    ext = np.zeros((num_symbols, num_rx, sym_len + max_delay), dtype=np.complex128)
    for p, d in enumerate(delay_samples):
        contrib = np.einsum("jit,tis->tjs", taps[:, :, p, :], tx)
        ext[:, :, d : d + sym_len] += contrib
    out = ext[:, :, :sym_len].copy()
    if max_delay:
        out[1:, :, :max_delay] += ext[:-1, :, sym_len:]
    return out


def _frequency_response(
    taps: np.ndarray, delay_samples: np.ndarray, num_subcarriers: int
) -> np.ndarray:
    """Per-subcarrier response ``[..., P, T] -> [..., T, K]`` summed over taps."""
    k = np.arange(num_subcarriers)
    phase = np.exp(-2j * np.pi * np.multiply.outer(delay_samples, k) / num_subcarriers)
    return np.einsum("...pt,pk->...tk", taps, phase)


def _run_burst(
    config: ExperimentConfig, snr_index: int, batch_index: int
) -> tuple[int, int]:
    """Simulate one pilot-plus-payload burst; returns (bit_errors, bits).

    The whole payload is one codeword. Without interleaving its symbols
    fill the grid time-major (down each subcarrier first); the interleaver
    transposes that to frequency-major order.
    """
    cfg_ofdm = config.ofdm
    n_sub = cfg_ofdm.num_subcarriers
    bits_sym = codec.bits_per_symbol(config.modulation)
    pairs = burst_pairs(config)
    total_pairs = config.num_blocks // 2
    pairs = min(pairs, total_pairs - batch_index * pairs)  # final partial burst

    use_pilots = config.estimation == "hadamard_pilot"
    frame = config.pilot_frame_length if use_pilots else 0
    num_symbols = frame + 2 * pairs

    rng = numerics.rng_stream(config.seed, "chain-data", snr_index, batch_index)
    n_info = config.info_bits(pairs)
    bits = rng.integers(0, 2, size=n_info, dtype=np.uint8)

    if config.coding is not None:
        coded = codec.conv_encode(bits, config.coding)
    else:
        coded = bits
    symbols = codec.map_bits(coded, config.modulation)
    il = config.interleaver(pairs)
    if il is not None:
        symbols = codec.interleave(symbols, il)
    # Time-major serial-to-parallel: stream position q lands on subcarrier
    # q // (2 * pairs) at payload slot q % (2 * pairs).
    sym_grid = symbols.reshape(n_sub, 2 * pairs).T  # [slot, subcarrier]
    grid = stbc.alamouti_encode(sym_grid[0::2], sym_grid[1::2]) / np.sqrt(2.0)

    tx_freq = np.zeros((num_symbols, config.num_tx_antennas, n_sub), dtype=np.complex128)
    if use_pilots:
        pilots = stbc.make_pilot_frame(config.num_tx_antennas, frame) / np.sqrt(2.0)
        tx_freq[:frame] = pilots.T[:, :, None]
    # grid axes: (slot within pair, antenna, pair, subcarrier)
    data = np.transpose(grid, (2, 0, 1, 3)).reshape(2 * pairs, config.num_tx_antennas, n_sub)
    tx_freq[frame:] = data

    tx_time = ofdm.modulate(tx_freq, cfg_ofdm)
    taps, delays = _burst_taps(config, num_symbols, _channel_seed(config.seed, snr_index, batch_index))
    rx_time = _apply_quasi_static(tx_time, taps, delays)

    snr = 10.0 ** (config.snr_db[snr_index] / 10.0)
    sigma2 = config.num_rx_antennas * _mean_rx_power(config) / snr
    noise_rng = numerics.rng_stream(config.seed, "chain-noise", snr_index, batch_index)
    rx_time = rx_time + np.sqrt(sigma2 / 2.0) * (
        noise_rng.standard_normal(rx_time.shape) + 1j * noise_rng.standard_normal(rx_time.shape)
    )

    rx_freq = ofdm.demodulate(rx_time, cfg_ofdm)

    if use_pilots:
        estimate = stbc.estimate_csi(np.transpose(rx_freq[:frame], (1, 0, 2)), pilots)
        h_eff = np.broadcast_to(
            estimate.h[:, :, None, :], estimate.h.shape[:2] + (pairs, n_sub)
        )
    else:
        pair_starts = frame + 2 * np.arange(pairs)
        # [rx, tx, pairs, k]; the sqrt(2) folds the tx power split into the
        # effective channel, exactly as the pilot path estimates it.
        h_eff = _frequency_response(taps[:, :, :, pair_starts], delays, n_sub) / np.sqrt(2.0)

    received = np.stack(
        (
            np.transpose(rx_freq[frame + 0 :: 2], (1, 0, 2)),
            np.transpose(rx_freq[frame + 1 :: 2], (1, 0, 2)),
        )
    )  # [slot, rx, pairs, k]
    s1_hat, s2_hat, gain = stbc.alamouti_combine(received, h_eff)
    eq1, er1 = ofdm.equalize(s1_hat, gain)
    eq2, er2 = ofdm.equalize(s2_hat, gain)
    # Back to the stream order: undo the time-major fill.
    eq_grid = np.empty((2 * pairs, n_sub), dtype=np.complex128)
    eq_grid[0::2] = eq1
    eq_grid[1::2] = eq2
    er_grid = np.empty((2 * pairs, n_sub), dtype=bool)
    er_grid[0::2] = er1
    er_grid[1::2] = er2
    eq = eq_grid.T.reshape(-1)
    erased = er_grid.T.reshape(-1)
    if il is not None:
        eq = codec.deinterleave(eq, il)
        erased = codec.deinterleave(erased, il)

    rx_bits = codec.demap_symbols(
        eq, config.modulation, soft=config.soft_decisions, erasures=erased
    )
    if config.coding is not None:
        decoded = codec.viterbi_decode(
            rx_bits, config.coding, soft=config.soft_decisions, terminated=True
        )
    else:
        decoded = (rx_bits >= 0.5).astype(np.uint8) if config.soft_decisions else rx_bits

    wrong = decoded != bits
    # Warm-up: skip the first block's worth of decoded bits (decoder
    # start-of-codeword and clean-start transients).
    skip = n_sub * bits_sym
    skip = skip if n_info > skip else 0
    errors = int(wrong[skip:].sum())
    counted = int(n_info - skip)
    return errors, counted


def _run_task(args: tuple[ExperimentConfig, int, int]) -> tuple[int, int, int, int]:
    config, snr_index, batch_index = args
    errors, counted = _run_burst(config, snr_index, batch_index)
    return snr_index, batch_index, errors, counted


@dataclass(frozen=True)
class BerCurve:
    """Aggregated sweep result, one row per SNR point.

    ``config`` is the resolved experiment the rows came from and feeds the
    metadata sidecar on export; ``warnings`` records conditions the run
    proceeded through (e.g. a delay profile exceeding the guard interval).
    """

    name: str
    snr_db: np.ndarray
    bit_errors: np.ndarray
    total_bits: np.ndarray
    elapsed_s: float = 0.0
    config: ExperimentConfig | None = None
    warnings: tuple[str, ...] = ()

    @property
    def ber(self) -> np.ndarray:
        out = np.zeros_like(self.snr_db, dtype=np.float64)
        mask = self.total_bits > 0
        out[mask] = self.bit_errors[mask] / self.total_bits[mask]
        return out


def _guard_warnings(config: ExperimentConfig) -> tuple[str, ...]:
    """Flag delay profiles that can spill past the cyclic prefix."""
    guard_s = config.ofdm.cp_length * config.ofdm.sample_time_s
    if config.channel_kind == "rayleigh":
        worst = max(config.rayleigh.tap_delays_s)
    elif config.channel_kind == "scm":
        c = config.scm.config
        if c.fixed_path_delays_s is not None:
            worst = max(c.fixed_path_delays_s)
        elif c.max_path_delay_s is not None:
            worst = c.max_path_delay_s
        else:
            worst = math.inf
    else:
        return ()
    if worst > guard_s + 1e-12:
        return (
            f"channel delay profile extends to {worst:.3g} s, beyond the "
            f"{guard_s:.3g} s guard interval; run proceeds with intersymbol "
            "interference",
        )
    return ()


def _num_batches(config: ExperimentConfig) -> int:
    total_pairs = config.num_blocks // 2
    per = burst_pairs(config)
    return (total_pairs + per - 1) // per


def _aggregate_fast(
    results: dict[tuple[int, int], tuple[int, int]],
    num_batches: int,
    target: int,
    snr_index: int,
) -> tuple[int, int, bool]:
    """Fold batch results in index order, stopping after the batch that
    reaches the error target. Returns (errors, bits, complete)."""
    errors = 0
    bits = 0
    for b in range(num_batches):
        key = (snr_index, b)
        if key not in results:
            return errors, bits, False
        e, n = results[key]
        errors += e
        bits += n
        if errors >= target:
            return errors, bits, True
    return errors, bits, True


def run_ber_sweep(config: ExperimentConfig, progress=None) -> BerCurve:
    """Run the Monte-Carlo sweep over all SNR points.

    In fast mode each point stops after the burst (in index order) that
    accumulates ``target_errors`` bit errors, so results are identical to
    a truncated full run regardless of worker count. ``progress`` is an
    optional callable fed one line per completed point.
    """
    start = time.monotonic()
    num_points = len(config.snr_db)
    num_batches = _num_batches(config)
    errors = np.zeros(num_points, dtype=np.int64)
    bits = np.zeros(num_points, dtype=np.int64)
    workers = config.workers or os.cpu_count() or 1

    if config.fast:
        for s in range(num_points):
            if workers == 1:
                e_tot = n_tot = 0
                for b in range(num_batches):
                    _, _, e, n = _run_task((config, s, b))
                    e_tot += e
                    n_tot += n
                    if e_tot >= config.target_errors:
                        break
            else:
                # Dispatch in waves so early stopping skips most batches;
                # the stop rule reads results in batch-index order, so the
                # outcome matches a serial run exactly.
                results: dict[tuple[int, int], tuple[int, int]] = {}
                done = False
                next_batch = 0
                with ProcessPoolExecutor(max_workers=workers) as pool:
                    while not done and next_batch < num_batches:
                        wave = range(next_batch, min(next_batch + 2 * workers, num_batches))
                        for si, bi, e, n in pool.map(
                            _run_task, [(config, s, b) for b in wave]
                        ):
                            results[(si, bi)] = (e, n)
                        next_batch = wave.stop
                        e_tot, n_tot, done = _aggregate_fast(
                            results, num_batches, config.target_errors, s
                        )
            errors[s], bits[s] = e_tot, n_tot
            if progress:
                progress(_point_line(config, s, int(e_tot), int(n_tot)))
    else:
        tasks = [(config, s, b) for s in range(num_points) for b in range(num_batches)]
        if workers == 1:
            results_iter = map(_run_task, tasks)
        else:
            pool = ProcessPoolExecutor(max_workers=workers)
            results_iter = pool.map(_run_task, tasks, chunksize=4)
        for si, bi, e, n in results_iter:
            errors[si] += e
            bits[si] += n
            if progress and bi == num_batches - 1:
                progress(_point_line(config, si, int(errors[si]), int(bits[si])))
        if workers != 1:
            pool.shutdown()

    return BerCurve(
        name=config.name,
        snr_db=np.asarray(config.snr_db, dtype=np.float64),
        bit_errors=errors,
        total_bits=bits,
        elapsed_s=time.monotonic() - start,
        config=config,
        warnings=_guard_warnings(config),
    )


def _point_line(config: ExperimentConfig, s: int, e: int, n: int) -> str:
    ber = e / n if n else 0.0
    return f"snr {config.snr_db[s]:6.1f} dB  errors {e:8d}  bits {n:10d}  ber {ber:.3e}"


def theoretical_bpsk_awgn_ber(snr_db) -> np.ndarray:
    """Q(sqrt(2 * snr)) reference for uncoded BPSK on AWGN."""
    from math import erfc

    snr = 10.0 ** (np.asarray(snr_db, dtype=np.float64) / 10.0)
    return np.asarray([0.5 * erfc(np.sqrt(s)) for s in np.atleast_1d(snr)])


@dataclass(frozen=True)
class AoaCaseConfig:
    """One direction-finding scene: geometry plus generation parameters."""

    name: str
    config: scm.ScmConfig
    ap: scm.AntennaConfig
    user: scm.AntennaConfig
    links: tuple[scm.LinkConfig, ...]
    num_time_samples: int = 10
    seed: int = 42


@dataclass(frozen=True)
class AoaReport:
    """Estimated arrival angles next to the per-link scene truth."""

    name: str
    estimated_deg: np.ndarray
    link_angles_deg: np.ndarray
    distances_m: np.ndarray
    directions_deg: np.ndarray
    path_loss_db: np.ndarray
    spectrum_grid_deg: np.ndarray
    spectrum: np.ndarray
    tensor_dims: tuple[int, int, int, int, int]
    elapsed_s: float


def run_aoa_case(case: AoaCaseConfig, seed: int | None = None) -> AoaReport:
    """Generate the scene tensor and estimate one angle per link."""
    start = time.monotonic()
    use_seed = case.seed if seed is None else seed
    tensor = scm.generate(
        case.config, case.ap, case.user, case.links, case.num_time_samples, use_seed
    )
    estimate = aoa_mod.music_estimate(
        aoa_mod.snapshots_from_tensor(tensor), num_sources=len(case.links)
    )
    return AoaReport(
        name=case.name,
        estimated_deg=estimate.angles_deg,
        link_angles_deg=np.asarray([l.theta_ap_deg for l in case.links]),
        distances_m=np.asarray([l.distance_m for l in case.links]),
        directions_deg=np.asarray([l.direction_deg for l in case.links]),
        path_loss_db=np.asarray([p.path_loss_db for p in tensor.path_params]),
        spectrum_grid_deg=estimate.grid_deg,
        spectrum=estimate.spectrum,
        tensor_dims=tensor.dims,
        elapsed_s=time.monotonic() - start,
    )
