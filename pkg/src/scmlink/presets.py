"""Catalog of named, fully resolved experiment configurations.

Chain presets (``fig4.*``, ``awgn-bpsk``) resolve to :class:`ExperimentConfig`
sweeps; scene presets (``scm-case*``) resolve to :class:`AoaCaseConfig`
direction-finding cases. The names are part of the public CLI surface:
``scmlink list-presets`` prints this catalog.
"""

from __future__ import annotations

from . import codec, harness, scm

__all__ = [
    "PRESET_NAMES",
    "AOA_PRESET_NAMES",
    "CHAIN_PRESET_NAMES",
    "GUARD_S",
    "STRICT_MAX_DELAY_S",
    "preset",
]

CHAIN_FC_HZ = 2.4e9
_LAMBDA_M = scm.SPEED_OF_LIGHT / CHAIN_FC_HZ
_SNR_FULL = tuple(float(s) for s in range(1, 36))
_SNR_AWGN = tuple(float(s) for s in range(0, 11))

# The OFDM guard interval is 10 samples of 0.2 us. Random SCM delay draws are
# clamped to it by default so presets stay ISI-free; strict mode lifts the
# clamp to the full 5 us delay budget and lets run_ber_sweep record the guard
# violation in the curve metadata instead.
GUARD_S = 2.0e-6
STRICT_MAX_DELAY_S = 5.0e-6

_BPSK = codec.ModulationConfig(family="psk", order=2)

_FIG47_MODULATIONS = {
    "bpsk": _BPSK,
    "qpsk": codec.ModulationConfig(family="psk", order=4),
    "4qam": codec.ModulationConfig(family="qam", order=4),
    "16qam": codec.ModulationConfig(family="qam", order=16),
    "16psk": codec.ModulationConfig(family="psk", order=16),
}
_FIG48_DOPPLERS_HZ = (10.0, 50.0, 100.0, 141.6)


def _rayleigh_chain(name, delays_s, num_rx=2, modulation=_BPSK):
    """Equal-power tapped-delay-line chain at 100 Hz Doppler."""
    k = len(delays_s)
    spec = harness.RayleighSpec(
        tap_delays_s=tuple(delays_s), tap_powers=(1.0 / k,) * k, doppler_hz=100.0
    )
    return harness.ExperimentConfig(
        name=name,
        channel_kind="rayleigh",
        num_rx_antennas=num_rx,
        modulation=modulation,
        snr_db=_SNR_FULL,
        rayleigh=spec,
    )


def _scm_chain(name, delays_s, doppler_hz, los, modulation=_BPSK, max_delay_s=GUARD_S):
    """Urban-micro geometric chain with pinned path delays.

    The delay profile is fixed so flat vs selective presets differ only in
    frequency selectivity; shadow fading is off so curves are noise-limited
    rather than lognormal-outage-limited. User speed encodes the Doppler.
    """
    cfg = scm.ScmConfig(
        scenario="urban_micro",
        num_paths=len(delays_s),
        center_frequency_hz=CHAIN_FC_HZ,
        los=los,
        rician_k_db=6.0,
        rms_delay_spread_s=3.5e-6,
        max_path_delay_s=max_delay_s,
        fixed_path_delays_s=tuple(delays_s),
        shadow_std_db=0.0,
    )
    link = scm.LinkConfig(
        theta_ap_deg=20.0,
        theta_user_deg=10.0,
        distance_m=300.0,
        speed_mps=doppler_hz * _LAMBDA_M,
        direction_deg=0.0,
    )
    return harness.ExperimentConfig(
        name=name,
        channel_kind="scm",
        num_rx_antennas=2,
        modulation=modulation,
        snr_db=_SNR_FULL,
        scm=harness.ScmChainSpec(config=cfg, link=link),
    )


def _aoa_case(name, scenario, num_paths, links):
    """LOS direction-finding scene: 8-element AP array, 2-element users."""
    return harness.AoaCaseConfig(
        name=name,
        config=scm.ScmConfig(
            scenario=scenario, num_paths=num_paths, los=True, shadow_std_db=0.0
        ),
        ap=scm.AntennaConfig(num_elements=8),
        user=scm.AntennaConfig(num_elements=2),
        links=tuple(links),
        num_time_samples=10,
        seed=42,
    )


def _catalog(strict: bool):
    max_delay = STRICT_MAX_DELAY_S if strict else GUARD_S
    two = (0.0, 1.6e-6)
    three = (0.0, 0.8e-6, 1.6e-6)
    four = (0.0, 0.6e-6, 1.0e-6, 1.6e-6)

    cat = {}
    cat["awgn-bpsk"] = harness.ExperimentConfig(
        name="awgn-bpsk",
        channel_kind="awgn",
        num_rx_antennas=1,
        modulation=_BPSK,
        snr_db=_SNR_AWGN,
        coding=None,
        interleaved=False,
        estimation="perfect",
    )

    cat["fig4.4-2path"] = _rayleigh_chain("fig4.4-2path", two)
    cat["fig4.4-3path"] = _rayleigh_chain("fig4.4-3path", three)
    cat["fig4.4-4path"] = _rayleigh_chain("fig4.4-4path", four)
    cat["fig4.5-2x2"] = _rayleigh_chain("fig4.5-2x2", two, num_rx=2)
    cat["fig4.5-2x4"] = _rayleigh_chain("fig4.5-2x4", two, num_rx=4)

    # Flat keeps both geometric paths at delay zero so only the frequency
    # selectivity differs between the fig4.6 pair. LOS keeps whole-burst
    # fade outages out of the comparison window.
    cat["fig4.6-flat"] = _scm_chain(
        "fig4.6-flat", (0.0, 0.0), 100.0, los=True, max_delay_s=max_delay
    )
    cat["fig4.6-selective"] = _scm_chain(
        "fig4.6-selective", two, 100.0, los=True, max_delay_s=max_delay
    )

    for tag, mod in _FIG47_MODULATIONS.items():
        cat[f"fig4.7-{tag}"] = _scm_chain(
            f"fig4.7-{tag}", two, 10.0, los=False, modulation=mod, max_delay_s=max_delay
        )
    for fd in _FIG48_DOPPLERS_HZ:
        cat[f"fig4.8-doppler-{fd:g}"] = _scm_chain(
            f"fig4.8-doppler-{fd:g}",
            two,
            fd,
            los=False,
            modulation=_FIG47_MODULATIONS["16qam"],
            max_delay_s=max_delay,
        )

    cat["scm-case1"] = _aoa_case(
        "scm-case1",
        "urban_micro",
        1,
        [
            scm.LinkConfig(
                theta_ap_deg=30.0,
                theta_user_deg=0.0,
                distance_m=174.33,
                speed_mps=5.0,
                direction_deg=-157.3,
            )
        ],
    )
    cat["scm-case2"] = _aoa_case(
        "scm-case2",
        "urban_micro",
        3,
        [
            scm.LinkConfig(
                theta_ap_deg=-40.0,
                theta_user_deg=10.0,
                distance_m=349.2884,
                speed_mps=5.0,
                direction_deg=109.7538,
            ),
            scm.LinkConfig(
                theta_ap_deg=20.0,
                theta_user_deg=-15.0,
                distance_m=422.5138,
                speed_mps=5.0,
                direction_deg=147.0231,
            ),
            scm.LinkConfig(
                theta_ap_deg=40.0,
                theta_user_deg=20.0,
                distance_m=422.8360,
                speed_mps=5.0,
                direction_deg=-96.5180,
            ),
        ],
    )
    cat["scm-case3"] = _aoa_case(
        "scm-case3",
        "urban_macro",
        2,
        [
            scm.LinkConfig(
                theta_ap_deg=-40.0,
                theta_user_deg=10.0,
                distance_m=498.5580,
                speed_mps=5.0,
                direction_deg=104.8044,
            ),
            scm.LinkConfig(
                theta_ap_deg=40.0,
                theta_user_deg=-15.0,
                distance_m=374.4319,
                speed_mps=5.0,
                direction_deg=113.3827,
            ),
        ],
    )
    return cat


AOA_PRESET_NAMES = ("scm-case1", "scm-case2", "scm-case3")
PRESET_NAMES = tuple(sorted(_catalog(False)))
CHAIN_PRESET_NAMES = tuple(n for n in PRESET_NAMES if n not in AOA_PRESET_NAMES)


def preset(name, *, strict_paper_params=False):
    """Resolve a preset name to its fully specified configuration.

    Chain presets return an :class:`harness.ExperimentConfig`; scene presets
    return an :class:`harness.AoaCaseConfig`. ``strict_paper_params`` lifts
    the guard-interval clamp on random SCM path delays (inert for the pinned
    delay profiles above). Unknown names raise ``KeyError`` naming the
    available catalog.
    """
    cat = _catalog(strict_paper_params)
    try:
        return cat[name]
    except KeyError:
        known = ", ".join(sorted(cat))
        raise KeyError(f"unknown preset {name!r}; available presets: {known}") from None
