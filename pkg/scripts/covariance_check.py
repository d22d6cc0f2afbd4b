"""Full 4K x 4K covariance of the two-mode spectrum: prediction vs sampling.

Synthesizes the two-mode pulse at a chosen amplitude phase, predicts the
joint eigenvalue/amplitude covariance analytically, estimates the same
matrix by Monte-Carlo, and writes both matrices plus a comparison summary.
The Frobenius relative error is the headline number; entrywise ratios catch
any block the aggregate would hide.
"""

import argparse
import json
import os
import time

import numpy as np

from nftkit.collocation import FCPolicy, WindowSpec, fc_modes
from nftkit.darboux import DiscreteSpectrum, darboux
from nftkit.montecarlo import MCConfig, compare_to_analytic, run_mc
from nftkit.perturbation import build_kit, covariance_report, write_matrix_csv
from nftkit.presets import get_preset, two_soliton_spectrum
from nftkit.signal import NoiseModel, colored_covariance, sigma_from_snr


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--alpha-frac", type=float, default=0.5,
                        help="phase of the second amplitude over 2*pi")
    parser.add_argument("--snr", type=float, default=10.0)
    parser.add_argument("--realizations", "-R", type=int, default=1024)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--out-dir", default="results/covariance_check")
    args = parser.parse_args()

    grid = get_preset("2sol").grid()
    alpha = 2.0 * np.pi * args.alpha_frac
    pulse, _ = darboux(two_soliton_spectrum(alpha), grid)
    windows = WindowSpec.hann(grid)
    op, modes = fc_modes(pulse, FCPolicy(count=2), windows)
    reference = DiscreteSpectrum(np.array([m.lam for m in modes]),
                                 np.array([m.b for m in modes]))
    kits = [build_kit(op.L, m, grid, windows) for m in modes]
    report = covariance_report(kits, colored_covariance(NoiseModel(1.0), grid))

    sigma = sigma_from_snr(pulse, args.snr)
    config = MCConfig(realizations=args.realizations, snr_db=args.snr,
                      seed=args.seed, threads=args.threads)
    t0 = time.time()
    result = run_mc(pulse, reference, config, FCPolicy(), windows)
    elapsed = time.time() - t0
    comparison = compare_to_analytic(result, report)

    os.makedirs(args.out_dir, exist_ok=True)
    write_matrix_csv(result.C_emp,
                     os.path.join(args.out_dir, "C_empirical.csv"))
    write_matrix_csv(sigma ** 2 * report.C_full,
                     os.path.join(args.out_dir, "C_analytic.csv"))
    summary = {
        "alpha_frac": args.alpha_frac,
        "snr_db": args.snr,
        "sigma": sigma,
        "realizations": args.realizations,
        "retained": result.retained,
        "outliers": result.outliers,
        "seed": args.seed,
        "elapsed_seconds": elapsed,
        "bias_norm": float(np.linalg.norm(result.bias)),
        "comparison": comparison,
    }
    if result.flag:
        summary["flag"] = result.flag
    with open(os.path.join(args.out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    print(f"retained {result.retained}/{args.realizations} "
          f"in {elapsed:.1f}s")
    print(f"frobenius relative error: "
          f"{comparison['frobenius_relative_error']:.4f}")
    print(f"wrote -> {args.out_dir}")


if __name__ == "__main__":
    main()
