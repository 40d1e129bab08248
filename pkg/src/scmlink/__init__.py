"""scmlink: spatial-channel-model MU-MIMO link simulation.

Subpackages and modules:

- :mod:`scmlink.numerics`  shared numeric kernels (unitary FFT, Hermitian eig,
  Bessel J0, keyed random streams)
- :mod:`scmlink.codec`     convolutional code, Viterbi decoder, interleaver,
  PSK/QAM mapping
- :mod:`scmlink.ofdm`      cyclic-prefix OFDM modulator/demodulator/equalizer
- :mod:`scmlink.stbc`      Alamouti space-time coding, Hadamard pilot CSI
  estimation, channel-row selection
- :mod:`scmlink.fading`    Rayleigh tapped-delay-line channel (Jakes Doppler)
- :mod:`scmlink.scm`       geometric spatial channel model (urban macro/micro)
- :mod:`scmlink.aoa`       MUSIC angle-of-arrival estimation
- :mod:`scmlink.harness`   end-to-end BER sweeps and direction-finding runs
- :mod:`scmlink.presets`   the documented experiment catalog
- :mod:`scmlink.emit`      CSV/JSON-metadata/SVG export
- :mod:`scmlink.cli`       the ``scmlink`` command-line entry point
"""

__version__ = "0.1.0"

__all__ = [
    "numerics",
    "codec",
    "ofdm",
    "stbc",
    "fading",
    "scm",
    "aoa",
    "harness",
    "presets",
    "emit",
    "cli",
]
