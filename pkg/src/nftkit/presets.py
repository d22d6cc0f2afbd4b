"""Built-in benchmark pulses with their reference spectra and default grids.

Three pulses recur throughout the experiments and tests:

* ``2sol``: two bound modes at 0.6j and 0.3j with equal amplitudes j/3.
* ``5sol``: five bound modes, amplitudes of mixed phase, a stiffer target.
* ``sech22``: the analytic pulse 2.2/cosh(t), whose bound modes sit at 1.7j
  and 0.7j with amplitudes -1 and +1; unlike the other two it also carries a
  small radiative component, making it a useful non-reflectionless check.

Each preset records the time span T and default sample count M used by the
reference experiments, so accuracy checks are reproducible one-liners.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .darboux import DiscreteSpectrum, darboux, sech_pulse
from .signal import NFTError, Pulse, TimeGrid


@dataclass(frozen=True)
class Preset:
    """A named benchmark pulse with reference spectrum and default grid."""

    name: str
    T: float
    M: int
    reference: DiscreteSpectrum
    sech_amplitude: float | None = None

    def grid(self, M: int | None = None) -> TimeGrid:
        return TimeGrid(T=self.T, M=self.M if M is None else M)

    def build(self, grid: TimeGrid | None = None) -> Pulse:
        """Materialize the pulse on the given grid (default grid if None)."""
        g = self.grid() if grid is None else grid
        if self.sech_amplitude is not None:
            return sech_pulse(self.sech_amplitude, g)
        pulse, _ = darboux(self.reference, g)
        return pulse


def two_soliton_spectrum(alpha: float = 0.0) -> DiscreteSpectrum:
    """The two-mode benchmark spectrum with a phase offset on the second b."""
    return DiscreteSpectrum(
        np.array([0.6j, 0.3j]),
        np.array([1j / 3, (1j / 3) * np.exp(1j * alpha)]),
    )


_FIVE_LAMBDAS = np.array([1.5j, 1.2j, 0.9j, 0.6j, 0.3j])
_FIVE_BS = np.array([
    0.8855 + 0.1109j,
    -1.4293 - 0.6778j,
    1.0701 + 0.2486j,
    -0.0965 + 1.0385j,
    0.3345 + 0.8551j,
])

# 2.2/cosh(t) binds modes at j*(2.2 - 1/2) and j*(2.2 - 3/2) with b_k = (-1)^k.
_SECH_REFERENCE = DiscreteSpectrum(
    np.array([1.7j, 0.7j]), np.array([-1.0 + 0j, 1.0 + 0j])
)

PRESETS: dict[str, Preset] = {
    "2sol": Preset("2sol", T=35.34, M=365, reference=two_soliton_spectrum()),
    "5sol": Preset("5sol", T=35.34, M=909,
                   reference=DiscreteSpectrum(_FIVE_LAMBDAS, _FIVE_BS)),
    "sech22": Preset("sech22", T=24.0, M=329, reference=_SECH_REFERENCE,
                     sech_amplitude=2.2),
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        valid = ", ".join(sorted(PRESETS))
        raise NFTError(f"unknown preset {name!r}: expected one of {valid}") from None
