"""Accuracy of both spectrum algorithms as the sampling grid refines.

Writes one CSV per preset with columns M, algorithm, k, err_lambda, err_b,
suitable for a log-log error plot. The default M lists span the range where
the collocation error falls from ~1e-1 to its roundoff floor.
"""

import argparse
import os

from nftkit.montecarlo import error_sweep, write_sweep_csv
from nftkit.presets import PRESETS, get_preset

DEFAULT_GRIDS = {
    "2sol": [47, 65, 91, 129, 183, 257, 365, 515, 727, 1029, 1455],
    "5sol": [115, 161, 229, 323, 455, 643, 909, 1285, 1817],
    "sech22": [33, 47, 65, 91, 129, 181, 257, 363, 513, 725, 1025],
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--preset", choices=sorted(PRESETS), action="append",
                        help="preset to sweep (repeatable; default: all)")
    parser.add_argument("--M-list", dest="m_list",
                        help="comma-separated odd sample counts (overrides default)")
    parser.add_argument("--no-oracle", action="store_true",
                        help="skip the transfer-matrix oracle rows")
    parser.add_argument("--out-dir", default="results/grid_refinement")
    args = parser.parse_args()

    names = args.preset or sorted(PRESETS)
    os.makedirs(args.out_dir, exist_ok=True)
    for name in names:
        preset = get_preset(name)
        M_list = ([int(x) for x in args.m_list.split(",")]
                  if args.m_list else DEFAULT_GRIDS[name])
        rows = error_sweep(preset.build, preset.reference, preset.T, M_list,
                           oracle=not args.no_oracle)
        path = os.path.join(args.out_dir, f"{name}.csv")
        write_sweep_csv(rows, path)
        ok = [r.err_lambda for r in rows if r.algorithm == "fc" and not r.failed]
        worst = f"{max(ok):.3e}" if ok else "n/a"
        print(f"{name}: {len(M_list)} grids -> {path} "
              f"(worst fc lambda error {worst})")


if __name__ == "__main__":
    main()
