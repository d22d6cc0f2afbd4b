"""Discrete nonlinear Fourier spectra of focusing pulses and their noise statistics."""

from .collocation import (FCMode, FCOperator, FCPolicy, WindowSpec,
                          build_operator, extract_b, fc_modes, filter_discrete,
                          forward_nft, solve_modes, truncation_time)
from .darboux import (DiscreteSpectrum, JostSolutions, darboux,
                      evolve_spectrum, read_spectrum, sech_pulse,
                      soliton_a_coefficient, write_spectrum)
from .montecarlo import (MCConfig, MCResult, SweepRow, compare_to_analytic,
                         error_sweep, greedy_match, run_mc, write_sweep_csv)
from .perturbation import (CovarianceReport, ModePerturbationKit, build_kit,
                           coupling_matrix, covariance_report, drazin_inverse,
                           eigenprojector, export_report, sensitivity_rows)
from .presets import PRESETS, Preset, get_preset, two_soliton_spectrum
from .scattering import (NewtonRecord, ScatteringState, find_eigenvalues,
                         oracle_b, propagate)
from .signal import (FourierCoefficients, NFTError, NoiseModel, Pulse,
                     TimeGrid, colored_covariance, dft_coefficients,
                     inverse_dft, read_pulse, sample_awgn, sample_noise,
                     sigma_from_snr, write_pulse)

__version__ = "0.1.0"

__all__ = [
    "CovarianceReport", "DiscreteSpectrum", "FCMode", "FCOperator", "FCPolicy",
    "FourierCoefficients", "JostSolutions", "MCConfig", "MCResult",
    "ModePerturbationKit", "NFTError", "NewtonRecord", "NoiseModel", "PRESETS",
    "Preset", "Pulse", "ScatteringState", "SweepRow", "TimeGrid", "WindowSpec",
    "build_kit", "build_operator", "colored_covariance", "compare_to_analytic",
    "coupling_matrix", "covariance_report", "darboux", "dft_coefficients",
    "drazin_inverse", "eigenprojector", "error_sweep", "evolve_spectrum",
    "export_report", "extract_b", "fc_modes", "filter_discrete",
    "find_eigenvalues", "forward_nft", "get_preset", "greedy_match",
    "inverse_dft", "oracle_b", "propagate", "read_pulse", "read_spectrum",
    "run_mc", "sample_awgn", "sample_noise", "sech_pulse", "sensitivity_rows",
    "sigma_from_snr", "solve_modes", "soliton_a_coefficient",
    "truncation_time", "two_soliton_spectrum", "write_pulse", "write_spectrum",
    "write_sweep_csv",
]
