"""Rank every metro/core hop chain by how well it fits the saving targets.

    python scripts/calibrate_chain.py --top 10 --out fits.csv
"""

import argparse
import csv
import sys

from fogplace.calibration import FOG_MODES, ChainSpace, calibrate, format_fit
from fogplace.energy import EnergyOptions


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--top", type=int, default=5)
    ap.add_argument("--out", help="write every fit as CSV")
    ap.add_argument("--dedicated-cloud", action="store_true",
                    help="charge cloud processing instances their full idle power")
    ap.add_argument("--max-core-routers", type=int, default=ChainSpace().max_core_routers)
    args = ap.parse_args(argv)

    options = EnergyOptions(cloud_idle_share=1.0 if args.dedicated_cloud else None)
    space = ChainSpace(max_core_routers=args.max_core_routers)
    fits = calibrate(space, options=options)
    for fit in fits[: args.top]:
        print(format_fit(fit))
    met = [f for f in fits if f.meets_savings]
    print(f"{len(fits)} chains searched, {sum(f.admissible for f in fits)} admissible, "
          f"{len(met)} meet both saving targets", file=sys.stderr)

    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            head = ["rank", "chain", "admissible", "first_residual", "last_residual"]
            for pm in fits[0].pat_max:
                head += [f"saving_{m.value}_{pm}" for m in FOG_MODES] + [f"mfa_vs_sfa_{pm}"]
            w.writerow(head)
            for i, f in enumerate(fits, 1):
                row = [i, " > ".join(f.chain), f.admissible, f"{f.first_residual:.4f}",
                       f"{f.last_residual:.4f}"]
                for s, d in zip(f.savings, f.mfa_vs_sfa):
                    row += [f"{x:.4f}" for x in s] + [f"{d:.4f}"]
                w.writerow(row)


if __name__ == "__main__":
    main()
