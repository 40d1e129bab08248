"""Geometric spatial channel model for outdoor urban macro/micro cells.

Each link (one access point array to one user array) carries a handful of
paths, each composed of 20 fixed-offset sub-paths around a randomly drawn
mean angle. A path coefficient between AP element l and user element u is

    h[l, u](t) = sqrt(P * sigma_sf / S) * sum_over_subpaths(
        sqrt(G_ap(aod)) * exp(j [k d_l sin(aod) + phi])
        * sqrt(G_user(aoa)) * exp(j k d_u sin(aoa))
        * exp(j k v cos(aoa - theta_v) t) )

with k = 2*pi/lambda, d_* the element positions along the arrays, P the
path power, sigma_sf the lognormal shadow factor and v the user speed.
Large-scale quantities (delays, powers, angles, phases) are drawn once per
link from keyed random streams, so regeneration is deterministic and
independent of evaluation order.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from . import numerics

__all__ = [
    "SPEED_OF_LIGHT",
    "AntennaConfig",
    "LinkConfig",
    "ScmConfig",
    "PathParams",
    "ChannelTensor",
    "subpath_offsets",
    "wrap_angle_deg",
    "path_loss_db",
    "draw_bulk_parameters",
    "channel_coefficients",
    "generate",
    "save_tensor",
    "load_tensor",
]

SPEED_OF_LIGHT = 299_792_458.0

# Fixed sub-path angle offsets (degrees) around each path's mean angle, as
# +/- pairs. Three columns are defined: the AP side at 2 deg per-path angle
# spread (urban macro), the AP side at 5 deg (urban micro), and the user
# side at 35 deg (both scenarios).
_OFFSET_HALF = {
    ("urban_macro", "ap"): (
        0.0784, 0.3197, 0.5013, 0.8014, 1.1348,
        1.2945, 1.8541, 2.3416, 2.9984, 4.2132,
    ),
    ("urban_micro", "ap"): (
        0.3012, 0.7573, 1.1989, 1.9147, 2.6524,
        3.4572, 4.5142, 5.6942, 7.4265, 10.8754,
    ),
    ("urban_macro", "user"): (
        1.4985, 5.1425, 9.0190, 12.8045, 15.8562,
        22.8766, 31.0487, 39.5124, 51.2375, 74.5423,
    ),
}
_OFFSET_HALF[("urban_micro", "user")] = _OFFSET_HALF[("urban_macro", "user")]

_SCENARIOS = ("urban_macro", "urban_micro")

# Scenario defaults: per-path angle spread at the AP, rms delay spread,
# shadow-fading standard deviation (NLOS), and NLOS path-loss curves.
_AP_PATH_SPREAD_DEG = {"urban_macro": 2.0, "urban_micro": 5.0}
_USER_PATH_SPREAD_DEG = 35.0
_RMS_DELAY_SPREAD_S = {"urban_macro": 0.65e-6, "urban_micro": 0.25e-6}
_SHADOW_STD_DB = {"urban_macro": 8.0, "urban_micro": 10.0}
_SHADOW_STD_LOS_DB = 4.0
_PATH_LOSS_NLOS = {"urban_macro": (34.5, 3.5), "urban_micro": (34.53, 3.8)}
_PATH_LOSS_LOS = (30.18, 2.6)


def subpath_offsets(scenario: str, side: str) -> np.ndarray:
    """The 20 sub-path offsets (degrees) in fixed +/- pair order.

    ``side`` is ``"ap"`` or ``"user"``. Offsets come in pairs
    ``[+a1, -a1, +a2, -a2, ...]`` and sum to zero exactly.
    """
    if scenario not in _SCENARIOS:
        raise ValueError(f"scenario must be one of {_SCENARIOS}, got {scenario!r}")
    if side not in ("ap", "user"):
        raise ValueError(f"side must be 'ap' or 'user', got {side!r}")
    half = np.asarray(_OFFSET_HALF[(scenario, side)])
    out = np.empty(2 * half.size)
    out[0::2] = half
    out[1::2] = -half
    return out


def wrap_angle_deg(angle):
    """Wrap angles (degrees) into (-180, 180]."""
    return 180.0 - (180.0 - np.asarray(angle, dtype=np.float64)) % 360.0


@dataclass(frozen=True)
class AntennaConfig:
    """Uniform linear array along the broadside axis.

    Element positions are ``index * spacing_wavelengths`` (in wavelengths).
    An optional azimuth gain pattern is given as parallel tuples of angles
    (degrees) and gains (dBi) and is linearly interpolated; omitted means
    omnidirectional 0 dBi.
    """

    num_elements: int
    spacing_wavelengths: float = 0.5
    pattern_angles_deg: tuple[float, ...] | None = None
    pattern_gains_dbi: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.num_elements < 1:
            raise ValueError(f"num_elements must be >= 1, got {self.num_elements}")
        if self.spacing_wavelengths <= 0:
            raise ValueError(
                f"spacing_wavelengths must be positive, got {self.spacing_wavelengths}"
            )
        if (self.pattern_angles_deg is None) != (self.pattern_gains_dbi is None):
            raise ValueError("pattern_angles_deg and pattern_gains_dbi must be given together")
        if self.pattern_angles_deg is not None:
            a = np.asarray(self.pattern_angles_deg, dtype=np.float64)
            g = np.asarray(self.pattern_gains_dbi, dtype=np.float64)
            if a.size != g.size or a.size < 2:
                raise ValueError(
                    "pattern_angles_deg and pattern_gains_dbi must be equal-length (>= 2)"
                )
            if np.any(np.diff(a) <= 0):
                raise ValueError("pattern_angles_deg must be strictly ascending")

    @property
    def positions_wavelengths(self) -> np.ndarray:
        return np.arange(self.num_elements) * self.spacing_wavelengths

    def gain_linear(self, angles_deg: np.ndarray) -> np.ndarray:
        """Linear power gain toward the given azimuth angles."""
        if self.pattern_angles_deg is None:
            return np.ones_like(np.asarray(angles_deg, dtype=np.float64))
        db = np.interp(
            np.asarray(angles_deg, dtype=np.float64),
            np.asarray(self.pattern_angles_deg),
            np.asarray(self.pattern_gains_dbi),
        )
        return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class LinkConfig:
    """One AP-to-user link: geometry and user motion."""

    theta_ap_deg: float
    theta_user_deg: float
    distance_m: float
    speed_mps: float = 0.0
    direction_deg: float = 0.0

    def __post_init__(self) -> None:
        if self.distance_m <= 0:
            raise ValueError(f"distance_m must be positive, got {self.distance_m}")
        if self.speed_mps < 0:
            raise ValueError(f"speed_mps must be >= 0, got {self.speed_mps}")
        for name in ("theta_ap_deg", "theta_user_deg", "direction_deg"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")


@dataclass(frozen=True)
class ScmConfig:
    """Scenario-level model parameters.

    ``None`` fields fall back to scenario defaults. ``fixed_path_delays_s``
    bypasses the random delay draw (used e.g. to force a flat channel);
    ``max_path_delay_s`` clamps drawn delays so the profile stays within a
    chosen guard interval.
    """

    scenario: str = "urban_micro"
    num_paths: int = 3
    subpaths_per_path: int = 20
    center_frequency_hz: float = 2.0e9
    sample_density: float = 3.0
    los: bool = False
    rician_k_db: float = 6.0
    ap_composite_angle_spread_deg: float | None = None
    rms_delay_spread_s: float | None = None
    max_path_delay_s: float | None = None
    fixed_path_delays_s: tuple[float, ...] | None = None
    shadow_std_db: float | None = None
    path_loss_intercept_db: float | None = None
    path_loss_exponent: float | None = None

    def __post_init__(self) -> None:
        if self.scenario not in _SCENARIOS:
            raise ValueError(f"scenario must be one of {_SCENARIOS}, got {self.scenario!r}")
        if self.num_paths < 1:
            raise ValueError(f"num_paths must be >= 1, got {self.num_paths}")
        if self.subpaths_per_path not in (1, 20):
            raise ValueError(
                "subpaths_per_path must be 20 (tabulated offsets) or 1 (single ray), "
                f"got {self.subpaths_per_path}"
            )
        if self.center_frequency_hz <= 0:
            raise ValueError(
                f"center_frequency_hz must be positive, got {self.center_frequency_hz}"
            )
        if self.sample_density < 1:
            raise ValueError(f"sample_density must be >= 1, got {self.sample_density}")
        if self.scenario == "urban_macro" and self.ap_composite_angle_spread_deg is not None:
            if self.ap_composite_angle_spread_deg not in (80.0, 150.0):
                raise ValueError(
                    "ap_composite_angle_spread_deg must be 80 or 150 for urban_macro, "
                    f"got {self.ap_composite_angle_spread_deg}"
                )
        if self.fixed_path_delays_s is not None:
            d = np.asarray(self.fixed_path_delays_s, dtype=np.float64)
            if d.size != self.num_paths:
                raise ValueError(
                    f"fixed_path_delays_s has {d.size} entries for num_paths={self.num_paths}"
                )
            if np.any(d < 0) or np.any(np.diff(d) < 0):
                raise ValueError("fixed_path_delays_s must be non-negative and ascending")
        for name in ("rms_delay_spread_s", "max_path_delay_s"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive, got {v}")
        if self.shadow_std_db is not None and self.shadow_std_db < 0:
            raise ValueError(f"shadow_std_db must be >= 0, got {self.shadow_std_db}")

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.center_frequency_hz

    @property
    def ap_path_spread_deg(self) -> float:
        return _AP_PATH_SPREAD_DEG[self.scenario]

    @property
    def user_path_spread_deg(self) -> float:
        return _USER_PATH_SPREAD_DEG

    @property
    def effective_rms_delay_spread_s(self) -> float:
        if self.rms_delay_spread_s is not None:
            return self.rms_delay_spread_s
        return _RMS_DELAY_SPREAD_S[self.scenario]

    @property
    def effective_shadow_std_db(self) -> float:
        if self.shadow_std_db is not None:
            return self.shadow_std_db
        return _SHADOW_STD_LOS_DB if self.los else _SHADOW_STD_DB[self.scenario]


def path_loss_db(distance_m: float, config: ScmConfig) -> float:
    """Distance path loss in dB.

    NLOS: 34.5 + 35*log10(d) (urban macro), 34.53 + 38*log10(d) (urban
    micro). LOS uses a free-space-like exponent of 2.6. Intercept and
    exponent can be overridden through the config.
    """
    if distance_m <= 0:
        raise ValueError(f"distance_m must be positive, got {distance_m}")
    if config.los:
        intercept, exponent = _PATH_LOSS_LOS
    else:
        intercept, exponent = _PATH_LOSS_NLOS[config.scenario]
    if config.path_loss_intercept_db is not None:
        intercept = config.path_loss_intercept_db
    if config.path_loss_exponent is not None:
        exponent = config.path_loss_exponent
    return intercept + 10.0 * exponent * np.log10(distance_m)


@dataclass(frozen=True)
class PathParams:
    """Large-scale random draw for one link.

    Angles are per (path, sub-path) in degrees, wrapped to (-180, 180].
    ``shadow_fading`` is the linear power factor (1.0 when shadowing is
    disabled). LOS fields are None for NLOS links.
    """

    delays_s: np.ndarray
    powers: np.ndarray
    shadow_fading: float
    path_loss_db: float
    aod_deg: np.ndarray
    aoa_deg: np.ndarray
    phases_rad: np.ndarray
    los_phase_rad: float | None = None

    def __post_init__(self) -> None:
        k, s = self.aod_deg.shape
        if not (
            self.delays_s.shape == (k,)
            and self.powers.shape == (k,)
            and self.aoa_deg.shape == (k, s)
            and self.phases_rad.shape == (k, s)
        ):
            raise ValueError("inconsistent PathParams array shapes")


def _offsets_for(config: ScmConfig, side: str) -> np.ndarray:
    if config.subpaths_per_path == 1:
        return np.zeros(1)
    return subpath_offsets(config.scenario, side)


def draw_bulk_parameters(
    config: ScmConfig, links: list[LinkConfig] | tuple[LinkConfig, ...], seed: int
) -> tuple[PathParams, ...]:
    """Draw delays, powers, shadow fading, angles, and phases per link.

    Each link uses its own keyed stream ``(seed, 'scm-bulk', link_index)``
    with a fixed draw order, so results are independent of link evaluation
    order and other consumers of the seed.
    """
    if len(links) == 0:
        raise ValueError("links must hold at least one LinkConfig")
    out = []
    k = config.num_paths
    for index, link in enumerate(links):
        if not isinstance(link, LinkConfig):
            raise ValueError(f"links[{index}] is not a LinkConfig")
        rng = numerics.rng_stream(seed, "scm-bulk", index)
        if config.fixed_path_delays_s is not None:
            delays = np.asarray(config.fixed_path_delays_s, dtype=np.float64).copy()
        else:
            delays = np.sort(rng.exponential(config.effective_rms_delay_spread_s, size=k))
            delays -= delays[0]
            if config.max_path_delay_s is not None:
                delays = np.minimum(delays, config.max_path_delay_s)
        # Power decays with delay, with a 3 dB lognormal per-path ripple.
        ripple_db = 3.0 * rng.standard_normal(k)
        powers = np.exp(-delays / config.effective_rms_delay_spread_s) * 10.0 ** (
            -0.1 * ripple_db
        )
        powers /= powers.sum()
        std_db = config.effective_shadow_std_db
        shadow = float(10.0 ** (std_db * rng.standard_normal() / 10.0)) if std_db > 0 else 1.0
        mean_aod = link.theta_ap_deg + config.ap_path_spread_deg * rng.standard_normal(k)
        mean_aoa = link.theta_user_deg + config.user_path_spread_deg * rng.standard_normal(k)
        aod = wrap_angle_deg(mean_aod[:, None] + _offsets_for(config, "ap")[None, :])
        aoa = wrap_angle_deg(mean_aoa[:, None] + _offsets_for(config, "user")[None, :])
        phases = rng.uniform(0.0, 2.0 * np.pi, size=aod.shape)
        los_phase = float(rng.uniform(0.0, 2.0 * np.pi)) if config.los else None
        out.append(
            PathParams(
                delays_s=delays,
                powers=powers,
                shadow_fading=shadow,
                path_loss_db=float(path_loss_db(link.distance_m, config)),
                aod_deg=aod,
                aoa_deg=aoa,
                phases_rad=phases,
                los_phase_rad=los_phase,
            )
        )
    return tuple(out)


def _rician_k_linear(config: ScmConfig) -> float:
    return 10.0 ** (config.rician_k_db / 10.0)


def channel_coefficients(
    params: PathParams,
    ap: AntennaConfig,
    user: AntennaConfig,
    link: LinkConfig,
    config: ScmConfig,
    times_s: np.ndarray,
) -> np.ndarray:
    """Per-path MIMO coefficients for one link at the given times.

    Returns complex ``[L, M, K, T]`` (AP elements, user elements, paths,
    times). Under LOS a direct ray at the exact link angles is folded into
    path 0 with Rician factor K, and the scattered power is rescaled by
    1/(K+1) so total mean power is preserved.
    """
    t = np.atleast_1d(np.asarray(times_s, dtype=np.float64))
    lam = config.wavelength_m
    wavenum = 2.0 * np.pi / lam
    d_ap = ap.positions_wavelengths * lam
    d_user = user.positions_wavelengths * lam
    k_paths, n_sub = params.aod_deg.shape

    aod = np.deg2rad(params.aod_deg)
    aoa = np.deg2rad(params.aoa_deg)
    gain_ap = np.sqrt(ap.gain_linear(params.aod_deg))
    gain_user = np.sqrt(user.gain_linear(params.aoa_deg))
    theta_v = np.deg2rad(link.direction_deg)

    # [L, K, S] and [M, K, S] steering factors, [K, S, T] Doppler rotation
    a_ap = gain_ap[None, :, :] * np.exp(
        1j * (wavenum * d_ap[:, None, None] * np.sin(aod)[None, :, :] + params.phases_rad[None, :, :])
    )
    a_user = gain_user[None, :, :] * np.exp(
        1j * wavenum * d_user[:, None, None] * np.sin(aoa)[None, :, :]
    )
    doppler_rate = wavenum * link.speed_mps * np.cos(aoa - theta_v)  # [K, S]
    rotation = np.exp(1j * doppler_rate[:, :, None] * t[None, None, :])

    scale = np.sqrt(params.powers * params.shadow_fading / n_sub)
    if config.los:
        scale = scale / np.sqrt(_rician_k_linear(config) + 1.0)
    h = np.einsum("lks,mks,kst->lmkt", a_ap, a_user, rotation) * scale[None, None, :, None]

    if config.los:
        k_lin = _rician_k_linear(config)
        amp = np.sqrt(params.shadow_fading * k_lin / (k_lin + 1.0))
        aod0 = np.deg2rad(link.theta_ap_deg)
        aoa0 = np.deg2rad(link.theta_user_deg)
        v_ap = np.sqrt(ap.gain_linear(link.theta_ap_deg)) * np.exp(
            1j * wavenum * d_ap * np.sin(aod0)
        )
        v_user = np.sqrt(user.gain_linear(link.theta_user_deg)) * np.exp(
            1j * wavenum * d_user * np.sin(aoa0)
        )
        rot0 = np.exp(
            1j * (wavenum * link.speed_mps * np.cos(aoa0 - theta_v) * t + params.los_phase_rad)
        )
        h[:, :, 0, :] += amp * v_ap[:, None, None] * v_user[None, :, None] * rot0[None, None, :]
    return h


@dataclass(frozen=True)
class ChannelTensor:
    """Generated channel: ``coefficients[l, m, n, k, s]`` over AP elements,
    user elements, links, paths, and time samples spaced ``delta_t_s``."""

    coefficients: np.ndarray
    delta_t_s: float
    path_params: tuple[PathParams, ...]
    links: tuple[LinkConfig, ...]
    center_frequency_hz: float
    ap_spacing_wavelengths: float = 0.5

    @property
    def dims(self) -> tuple[int, int, int, int, int]:
        return tuple(self.coefficients.shape)


def time_step_s(config: ScmConfig, links) -> float:
    """Channel sampling interval: half a wavelength of motion divided by the
    sample density, for the fastest user; 1 ms when nothing moves."""
    vmax = max(link.speed_mps for link in links)
    if vmax <= 0:
        return 1e-3
    return config.wavelength_m / (2.0 * config.sample_density * vmax)


def generate(
    config: ScmConfig,
    ap: AntennaConfig,
    user: AntennaConfig,
    links: list[LinkConfig] | tuple[LinkConfig, ...],
    num_time_samples: int,
    seed: int,
) -> ChannelTensor:
    """Draw bulk parameters and evaluate coefficients for every link.

    Output dims are ``[L, M, N, K, S]`` = (AP elements, user elements,
    links, paths, time samples).
    """
    if num_time_samples < 1:
        raise ValueError(f"num_time_samples must be >= 1, got {num_time_samples}")
    links = tuple(links)
    params = draw_bulk_parameters(config, links, seed)
    dt = time_step_s(config, links)
    times = np.arange(num_time_samples) * dt
    coeffs = np.empty(
        (
            ap.num_elements,
            user.num_elements,
            len(links),
            config.num_paths,
            num_time_samples,
        ),
        dtype=np.complex128,
    )
    for n, (link, p) in enumerate(zip(links, params)):
        coeffs[:, :, n, :, :] = channel_coefficients(p, ap, user, link, config, times)
    return ChannelTensor(
        coefficients=coeffs,
        delta_t_s=dt,
        path_params=params,
        links=links,
        center_frequency_hz=config.center_frequency_hz,
        ap_spacing_wavelengths=ap.spacing_wavelengths,
    )


_MAGIC = b"SCM5"


def save_tensor(tensor: ChannelTensor, path: str) -> None:
    """Write the binary tensor plus a JSON sidecar (`<path>.json`).

    Layout: magic ``SCM5``; five little-endian u32 dims L, M, N, K, S;
    little-endian f64 ``delta_t_s``; then the coefficients in C (row-major)
    order as interleaved (re, im) f64 pairs. The sidecar carries the
    per-link bulk parameters and link geometry.
    """
    c = np.ascontiguousarray(tensor.coefficients, dtype=np.complex128)
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(struct.pack("<5I", *c.shape))
        f.write(struct.pack("<d", tensor.delta_t_s))
        interleaved = np.empty(c.shape + (2,), dtype="<f8")
        interleaved[..., 0] = c.real
        interleaved[..., 1] = c.imag
        f.write(interleaved.tobytes())
    sidecar = {
        "delta_t_s": tensor.delta_t_s,
        "center_frequency_hz": tensor.center_frequency_hz,
        "ap_spacing_wavelengths": tensor.ap_spacing_wavelengths,
        "links": [
            {
                "theta_ap_deg": l.theta_ap_deg,
                "theta_user_deg": l.theta_user_deg,
                "distance_m": l.distance_m,
                "speed_mps": l.speed_mps,
                "direction_deg": l.direction_deg,
            }
            for l in tensor.links
        ],
        "path_params": [
            {
                "delays_s": p.delays_s.tolist(),
                "powers": p.powers.tolist(),
                "shadow_fading": p.shadow_fading,
                "path_loss_db": p.path_loss_db,
                "aod_deg": p.aod_deg.tolist(),
                "aoa_deg": p.aoa_deg.tolist(),
                "phases_rad": p.phases_rad.tolist(),
                "los_phase_rad": p.los_phase_rad,
            }
            for p in tensor.path_params
        ],
    }
    with open(path + ".json", "w") as f:
        json.dump(sidecar, f, indent=1)


def load_tensor(path: str) -> ChannelTensor:
    """Read a tensor written by :func:`save_tensor` (and its sidecar)."""
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != _MAGIC:
            raise ValueError(f"not a channel tensor file (magic {magic!r})")
        dims = struct.unpack("<5I", f.read(20))
        (dt,) = struct.unpack("<d", f.read(8))
        flat = np.frombuffer(f.read(), dtype="<f8")
    expected = 2 * int(np.prod(dims))
    if flat.size != expected:
        raise ValueError(f"tensor payload has {flat.size} f64 values, expected {expected}")
    pairs = flat.reshape(dims + (2,))
    coeffs = (pairs[..., 0] + 1j * pairs[..., 1]).astype(np.complex128)
    with open(path + ".json") as f:
        sidecar = json.load(f)
    links = tuple(LinkConfig(**entry) for entry in sidecar["links"])
    params = tuple(
        PathParams(
            delays_s=np.asarray(p["delays_s"]),
            powers=np.asarray(p["powers"]),
            shadow_fading=p["shadow_fading"],
            path_loss_db=p["path_loss_db"],
            aod_deg=np.asarray(p["aod_deg"]),
            aoa_deg=np.asarray(p["aoa_deg"]),
            phases_rad=np.asarray(p["phases_rad"]),
            los_phase_rad=p["los_phase_rad"],
        )
        for p in sidecar["path_params"]
    )
    return ChannelTensor(
        coefficients=coeffs,
        delta_t_s=dt,
        path_params=params,
        links=links,
        center_frequency_hz=sidecar["center_frequency_hz"],
        ap_spacing_wavelengths=sidecar["ap_spacing_wavelengths"],
    )
