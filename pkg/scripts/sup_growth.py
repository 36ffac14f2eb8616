"""Growth rate (1/lambda) log sup |phi^C| over the tube boundary for zonal
harmonics on S^2, compared with tau.

    python3 scripts/sup_growth.py [--tau 0.3] [--degrees 50 100 200 400]
"""

import argparse

from grauert_lab.eigenbasis import zonal_mode
from grauert_lab.projector import supnorm_scan

ap = argparse.ArgumentParser()
ap.add_argument("--tau", type=float, default=0.3)
ap.add_argument("--degrees", type=int, nargs="+", default=[50, 100, 200, 400])
args = ap.parse_args()

for l in args.degrees:
    scan = supnorm_scan(zonal_mode(l), args.tau)
    print(f"l={l:4d} rate={scan.rate:.5f} tau-rate={args.tau - scan.rate:.5f}")
