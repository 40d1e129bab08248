"""Angle-of-arrival estimation with the MUSIC pseudospectrum.

Snapshots are vectors across the access-point array. The sample covariance
is eigendecomposed, the eigenvectors paired with the smallest eigenvalues
span the noise subspace, and source angles show up as sharp maxima of
1 / ||E_n^H a(theta)||^2 over a dense angle grid.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import numerics, scm

__all__ = [
    "ArraySnapshotSet",
    "AoaEstimate",
    "steering_vector",
    "snapshots_from_tensor",
    "music_estimate",
]

# Relative eigenvalue threshold below which a direction is treated as pure
# noise regardless of the requested source count.
_RANK_EPS = 1e-12
# Floor for the projection norm so ideal nulls don't divide by zero.
_SPECTRUM_FLOOR = 1e-300


def steering_vector(
    angles_deg, num_elements: int, spacing_wavelengths: float = 0.5
) -> np.ndarray:
    """Array response ``a[l] = exp(j 2 pi spacing l sin(theta))``.

    Returns ``[num_elements]`` for a scalar angle, ``[num_elements, A]``
    for a vector of angles.
    """
    if num_elements < 1:
        raise ValueError(f"num_elements must be >= 1, got {num_elements}")
    if spacing_wavelengths <= 0:
        raise ValueError(f"spacing_wavelengths must be positive, got {spacing_wavelengths}")
    theta = np.deg2rad(np.asarray(angles_deg, dtype=np.float64))
    l = np.arange(num_elements)
    phase = 2.0 * np.pi * spacing_wavelengths * np.multiply.outer(l, np.sin(theta))
    return np.exp(1j * phase)


@dataclass(frozen=True)
class ArraySnapshotSet:
    """Snapshots ``[num_elements, num_snapshots]`` plus the element spacing
    they were observed with."""

    snapshots: np.ndarray
    spacing_wavelengths: float = 0.5

    def __post_init__(self) -> None:
        s = self.snapshots
        if s.ndim != 2 or s.shape[0] < 2 or s.shape[1] < 1:
            raise ValueError(
                f"snapshots must be [num_elements >= 2, num_snapshots >= 1], got {s.shape}"
            )
        if self.spacing_wavelengths <= 0:
            raise ValueError(
                f"spacing_wavelengths must be positive, got {self.spacing_wavelengths}"
            )

    @property
    def num_elements(self) -> int:
        return self.snapshots.shape[0]


def snapshots_from_tensor(tensor: scm.ChannelTensor) -> ArraySnapshotSet:
    """Pool a channel tensor into AP-side snapshots.

    Coefficients are averaged over the user elements, then every (link,
    path, time) combination becomes one snapshot column, giving
    ``[L, N * K * S]``.
    """
    c = tensor.coefficients
    pooled = c.mean(axis=1)  # [L, N, K, S]
    snaps = pooled.reshape(c.shape[0], -1)
    return ArraySnapshotSet(snapshots=snaps, spacing_wavelengths=tensor.ap_spacing_wavelengths)


@dataclass(frozen=True)
class AoaEstimate:
    """MUSIC result: detected angles (ascending), the scanned grid, the
    pseudospectrum over it, and the covariance eigenvalues (ascending)."""

    angles_deg: np.ndarray
    grid_deg: np.ndarray
    spectrum: np.ndarray
    eigenvalues: np.ndarray


def _find_peaks(grid: np.ndarray, spectrum: np.ndarray, count: int, min_sep_deg: float):
    inner = (spectrum[1:-1] > spectrum[:-2]) & (spectrum[1:-1] >= spectrum[2:])
    idx = np.flatnonzero(inner) + 1
    order = idx[np.argsort(spectrum[idx])[::-1]]
    kept: list[int] = []
    for i in order:
        if all(abs(grid[i] - grid[j]) >= min_sep_deg for j in kept):
            kept.append(i)
        if len(kept) == count:
            break
    return kept


def music_estimate(
    snapshots: ArraySnapshotSet,
    num_sources: int,
    grid_step_deg: float = 0.1,
    min_separation_deg: float = 2.0,
) -> AoaEstimate:
    """Estimate ``num_sources`` arrival angles from array snapshots.

    The angle grid spans [-90, 90] degrees. Candidate peaks are local
    maxima of the pseudospectrum taken in descending height with a minimum
    mutual separation; fewer peaks than requested raises a warning and
    returns what was found.
    """
    s = snapshots.snapshots
    num_el, num_snap = s.shape
    if not 1 <= num_sources < num_el:
        raise ValueError(
            f"num_sources must be in [1, num_elements), got {num_sources} for {num_el} elements"
        )
    if grid_step_deg <= 0:
        raise ValueError(f"grid_step_deg must be positive, got {grid_step_deg}")
    if num_snap < num_sources:
        warnings.warn(
            f"only {num_snap} snapshots for {num_sources} sources; covariance is rank deficient",
            stacklevel=2,
        )

    cov = s @ s.conj().T / num_snap
    eigvals, eigvecs = numerics.herm_eig(cov)

    noise_dim = num_el - num_sources
    near_zero = int(np.count_nonzero(eigvals < _RANK_EPS * max(eigvals[-1], 0.0)))
    if near_zero > noise_dim:
        warnings.warn(
            f"{near_zero} near-zero eigenvalues exceed the expected noise dimension "
            f"{noise_dim}; treating all of them as noise",
            stacklevel=2,
        )
        noise_dim = near_zero
    noise_basis = eigvecs[:, :noise_dim]

    num_points = int(round(180.0 / grid_step_deg)) + 1
    grid = -90.0 + grid_step_deg * np.arange(num_points)
    a = steering_vector(grid, num_el, snapshots.spacing_wavelengths)
    denom = np.sum(np.abs(noise_basis.conj().T @ a) ** 2, axis=0)
    spectrum = 1.0 / np.maximum(denom, _SPECTRUM_FLOOR)

    kept = _find_peaks(grid, spectrum, num_sources, min_separation_deg)
    if len(kept) < num_sources:
        warnings.warn(
            f"found {len(kept)} spectrum peaks for {num_sources} requested sources",
            stacklevel=2,
        )
    angles = np.sort(grid[kept])
    return AoaEstimate(
        angles_deg=angles, grid_deg=grid, spectrum=spectrum, eigenvalues=eigvals
    )
