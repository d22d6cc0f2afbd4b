"""Analytic spectrum variances of the two-mode pulse versus amplitude phase.

The second amplitude is rotated by exp(j*alpha) while the eigenvalues stay
fixed, which reshapes the pulse and with it every sensitivity. The sweep
writes one row per alpha with the scalar variances of both eigenvalues and
both amplitudes plus the real eigenvalue cross term, ready for plotting
against alpha/(2*pi).
"""

import argparse
import os

import numpy as np

from nftkit.collocation import FCPolicy, WindowSpec, fc_modes
from nftkit.darboux import darboux
from nftkit.perturbation import build_kit, covariance_report
from nftkit.presets import get_preset, two_soliton_spectrum
from nftkit.signal import NoiseModel, colored_covariance, sigma_from_snr


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--snr", type=float, default=10.0,
                        help="SNR in dB used to scale the variances")
    parser.add_argument("--points", type=int, default=41,
                        help="number of alpha samples across one period")
    parser.add_argument("--M", type=int, default=None,
                        help="grid size (default: preset default)")
    parser.add_argument("--out", default="results/phase_sweep.csv")
    args = parser.parse_args()

    preset = get_preset("2sol")
    grid = preset.grid(args.M)
    windows = WindowSpec.hann(grid)
    R = colored_covariance(NoiseModel(sigma=1.0), grid)
    policy = FCPolicy(count=2)

    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    fracs = np.linspace(0.0, 1.0, args.points)
    with open(args.out, "w") as fh:
        fh.write("alpha_frac,alpha,sigma2_lambda_1,sigma2_lambda_2,"
                 "sigma2_b_1,sigma2_b_2,re_cross_lambda_12\n")
        for frac in fracs:
            alpha = 2.0 * np.pi * frac
            pulse, _ = darboux(two_soliton_spectrum(alpha), grid)
            sigma = sigma_from_snr(pulse, args.snr)
            op, modes = fc_modes(pulse, policy, windows)
            kits = [build_kit(op.L, m, grid, windows) for m in modes]
            report = covariance_report(kits, R, sigma=sigma)
            fh.write(",".join("%.17g" % v for v in (
                frac, alpha,
                report.sigma2_lambda(0), report.sigma2_lambda(1),
                report.sigma2_b(0), report.sigma2_b(1),
                report.cross_lambda(0, 1))) + "\n")
            print(f"alpha/2pi={frac:6.4f}  "
                  f"s2_l1={report.sigma2_lambda(0):.4e}  "
                  f"s2_l2={report.sigma2_lambda(1):.4e}")
    print(f"wrote {args.points} rows -> {args.out}")


if __name__ == "__main__":
    main()
