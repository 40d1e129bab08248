"""Alamouti space-time block coding and pilot-based channel estimation.

The 2-transmit Alamouti scheme sends ``[s1, s2]`` in the first slot and
``[-s2*, s1*]`` in the second; linear combining at any number of receive
antennas recovers both symbols with diversity gain ``sum |h|^2`` and no
cross-talk when the channel holds still over the pair.

Channel state is estimated from per-antenna Hadamard pilot sequences:
orthogonal over the frame, so correlating the received frame against each
transmit pilot isolates that antenna's channel exactly in the noiseless
constant-channel case.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "alamouti_encode",
    "alamouti_combine",
    "make_pilot_frame",
    "estimate_csi",
    "CsiEstimate",
    "select_channel_rows",
]


def alamouti_encode(s1: np.ndarray, s2: np.ndarray) -> np.ndarray:
    """Space-time grid for symbol pairs.

    ``s1``/``s2`` are scalars or equal-shape arrays. Output shape is
    ``(2, 2) + s1.shape``: axis 0 is the time slot, axis 1 the transmit
    antenna, so ``out[0] = [s1, s2]`` and ``out[1] = [-conj(s2), conj(s1)]``.
    """
    a = np.asarray(s1, dtype=np.complex128)
    b = np.asarray(s2, dtype=np.complex128)
    if a.shape != b.shape:
        raise ValueError(f"s1 and s2 shapes differ: {a.shape} vs {b.shape}")
    grid = np.empty((2, 2) + a.shape, dtype=np.complex128)
    grid[0, 0] = a
    grid[0, 1] = b
    grid[1, 0] = -np.conj(b)
    grid[1, 1] = np.conj(a)
    return grid


def alamouti_combine(received: np.ndarray, channel: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Combine a received Alamouti pair across receive antennas.

    Parameters
    ----------
    received : complex [2, num_rx, ...]
        Slot-1 and slot-2 observations per receive antenna.
    channel : complex [num_rx, 2, ...]
        Channel coefficients ``h[j, i]`` from transmit antenna i to receive
        antenna j, assumed constant over the pair.

    Returns ``(s1_hat, s2_hat, gain)`` where for a true channel equal to
    ``channel`` the combiner output is ``gain * s + noise`` with
    ``gain = sum |h|^2`` and zero cross-talk between s1 and s2.
    """
    r = np.asarray(received, dtype=np.complex128)
    h = np.asarray(channel, dtype=np.complex128)
    if r.ndim < 2 or r.shape[0] != 2:
        raise ValueError(f"received must have shape [2, num_rx, ...], got {r.shape}")
    if h.ndim < 2 or h.shape[1] != 2 or h.shape[0] != r.shape[1] or h.shape[2:] != r.shape[2:]:
        raise ValueError(f"channel shape {h.shape} inconsistent with received {r.shape}")
    r1, r2 = r[0], r[1]
    h1, h2 = h[:, 0], h[:, 1]
    s1 = (np.conj(h1) * r1 + h2 * np.conj(r2)).sum(axis=0)
    s2 = (np.conj(h2) * r1 - h1 * np.conj(r2)).sum(axis=0)
    gain = (np.abs(h1) ** 2 + np.abs(h2) ** 2).sum(axis=0)
    return s1, s2, gain


def make_pilot_frame(num_tx: int, frame_len: int) -> np.ndarray:
    """Per-antenna BPSK pilot sequences: rows 0..num_tx-1 of the Sylvester
    Hadamard matrix of order ``frame_len`` (row 0 is all +1).

    Distinct rows are orthogonal over the frame, which is what makes the
    correlation estimator in :func:`estimate_csi` exact.
    """
    if frame_len < 1 or (frame_len & (frame_len - 1)) != 0:
        raise ValueError(f"frame_len must be a power of two, got {frame_len}")
    if not 1 <= num_tx <= frame_len:
        raise ValueError(f"num_tx must be in [1, {frame_len}], got {num_tx}")
    h = np.array([[1.0]])
    while h.shape[0] < frame_len:
        h = np.block([[h, h], [h, -h]])
    return h[:num_tx].copy()


@dataclass(frozen=True)
class CsiEstimate:
    """Channel estimate per (receive antenna, transmit antenna, subcarrier).

    ``quality`` holds the mean reconstruction residual power of the pilot
    frame per (receive antenna, subcarrier), broadcast across the transmit
    axis: near zero means the constant-channel model explained the frame.
    """

    h: np.ndarray
    quality: np.ndarray


def estimate_csi(received_pilots: np.ndarray, pilots: np.ndarray) -> CsiEstimate:
    """Correlate a received pilot frame against the transmit pilots.

    Parameters
    ----------
    received_pilots : complex [num_rx, frame_len, num_subcarriers]
        Frequency-domain observations during the pilot frame.
    pilots : real [num_tx, frame_len]
        The transmitted Hadamard pilot rows.

    Returns the least-squares estimate ``h[j, i, k] = sum_t r[j, t, k] *
    pilot[i, t] / sum_t pilot[i, t]^2``, exact for a constant channel
    without noise. Pilot rows may carry any common amplitude scale (e.g.
    rows transmitted at reduced power); for unit-magnitude entries and
    noise of variance ``sigma^2`` per sample the per-entry error variance
    is ``sigma^2 / frame_len``.
    """
    r = np.asarray(received_pilots, dtype=np.complex128)
    p = np.asarray(pilots, dtype=np.float64)
    if r.ndim != 3:
        raise ValueError(f"received_pilots must be [num_rx, frame_len, num_subcarriers], got {r.shape}")
    if p.ndim != 2 or p.shape[1] != r.shape[1]:
        raise ValueError(f"pilots shape {p.shape} inconsistent with received frame {r.shape}")
    row_energy = np.sum(p * p, axis=1)
    if np.any(row_energy <= 0):
        raise ValueError("pilot rows must have positive energy")
    h = np.einsum("jtk,it->jik", r, p) / row_energy[None, :, None]
    recon = np.einsum("jik,it->jtk", h, p)
    residual = np.mean(np.abs(r - recon) ** 2, axis=1)  # [num_rx, num_subcarriers]
    quality = np.broadcast_to(residual[:, None, :], h.shape).copy()
    return CsiEstimate(h=h, quality=quality)


def select_channel_rows(
    h: np.ndarray,
    power_tol_db: float = 1.0,
    corr_threshold: float = 0.9,
) -> tuple[np.ndarray, np.ndarray]:
    """Drop redundant receive rows of a channel matrix.

    A row is redundant when its normalized correlation with a stronger row
    exceeds ``corr_threshold`` (exact duplicates correlate at 1). Rows are
    scanned in descending power order, ties broken toward the lower index,
    and each row is kept only if it clears the threshold against every row
    already kept, so of any correlated pair the higher-power row survives.
    Power differences alone never delete a row: ``power_tol_db`` only sets
    the band within which two correlated rows count as "equal power" (the
    earlier index then wins, which the descending stable scan already
    guarantees). Returns ``(reduced, kept_indices)`` with ``kept_indices``
    sorted ascending. The operation is idempotent.
    """
    m = np.atleast_2d(np.asarray(h, dtype=np.complex128))
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D channel matrix, got shape {np.shape(h)}")
    if not 0 < corr_threshold <= 1:
        raise ValueError(f"corr_threshold must be in (0, 1], got {corr_threshold}")
    powers = np.sum(np.abs(m) ** 2, axis=1)
    tol = 10.0 ** (power_tol_db / 10.0)
    # Stable order: power descending, row index ascending among near-ties so
    # reruns on the reduced matrix keep exactly the same rows.
    order = sorted(range(m.shape[0]), key=lambda i: (-powers[i], i))
    kept: list[int] = []
    for i in order:
        ok = True
        for j in kept:
            denom = np.sqrt(powers[i] * powers[j])
            corr = 1.0 if denom == 0.0 else abs(np.vdot(m[j], m[i])) / denom
            if corr > corr_threshold:
                # Correlated with a kept row, which has >= power because of
                # the scan order: drop this one.
                ok = False
                break
        if ok:
            kept.append(i)
    kept_sorted = np.array(sorted(kept), dtype=np.int64)
    return m[kept_sorted].copy(), kept_sorted
