"""Mean |Im zeta| of random-wave zeros against degree, with the exact
expectation for the complex Gaussian ensemble alongside.

    python3 scripts/zero_scaling.py [--seeds 50]
"""

import argparse

from grauert_lab.fits import fit_loglog
from grauert_lab.zeros import expected_mean_abs_imag, mean_abs_imag

ap = argparse.ArgumentParser()
ap.add_argument("--seeds", type=int, default=50)
ap.add_argument("--degrees", type=int, nargs="+", default=[25, 50, 100, 200, 400])
args = ap.parse_args()

seeds = range(args.seeds)
real = [mean_abs_imag(N, seeds) for N in args.degrees]
cplx = [mean_abs_imag(N, seeds, complex_coefficients=True) for N in args.degrees]
exact = [expected_mean_abs_imag(N) for N in args.degrees]
print(f"{'N':>5} {'real MC':>12} {'complex MC':>12} {'complex exact':>14}")
for row in zip(args.degrees, real, cplx, exact):
    print(f"{row[0]:5d} {row[1]:12.6f} {row[2]:12.6f} {row[3]:14.6f}")
for name, vals in (("real MC", real), ("complex MC", cplx), ("complex exact", exact)):
    print(f"slope ({name}): {fit_loglog(args.degrees, vals).slope:.4f}")
