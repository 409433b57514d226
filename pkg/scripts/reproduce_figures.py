"""Write the CSV data behind figures 1-4 into an output directory.

    python3 scripts/reproduce_figures.py [outdir] [--force-exact]
"""

import argparse
import logging
import time
from pathlib import Path

from noisyqsl import figures


def main():
    p = argparse.ArgumentParser()
    p.add_argument("outdir", nargs="?", default="figures_out")
    p.add_argument("--force-exact", action="store_true",
                   help="also compute the exact N=5 curve for figure 2 (slow)")
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)

    jobs = {
        "figure1.csv": lambda: figures.figure1(sdp=True),
        "figure2_N5.csv": lambda: figures.figure2(N=5, force_exact=args.force_exact),
        "figure2_N3.csv": lambda: figures.figure2(N=3, ratios=9),
        "figure3.csv": figures.figure3,
        "figure4.csv": figures.figure4,
    }
    for name, job in jobs.items():
        t0 = time.perf_counter()
        table = job()
        with open(out / name, "w", newline="\n") as fh:
            figures.write_csv(table, fh)
        logging.info("%s: %d rows in %.1f s", name, len(table.rows), time.perf_counter() - t0)


if __name__ == "__main__":
    main()
