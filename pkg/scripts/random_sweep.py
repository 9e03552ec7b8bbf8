"""Run the solver on random instances and tabulate its work against conditioning.

Prints one CSV row per instance with the run statistics and the sampled
condition estimate, in the spirit of a stats-versus-condition table.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time

import numpy as np

from kts import fixtures
from kts.conditioning import estimate_cond
from kts.solver import SolverOptions, solve


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=10)
    parser.add_argument("--degrees", type=int, nargs="+", default=[2, 2])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--grid", type=int, default=20)
    parser.add_argument("--min-width", type=float, default=2.0**-20)
    parser.add_argument("--max-boxes", type=int, default=None)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    opts = SolverOptions(min_width=args.min_width, max_boxes=args.max_boxes)
    fields = [
        "instance",
        "cond",
        "boxes_examined",
        "smallest_width",
        "max_newton_iters",
        "segments_found",
        "unresolved_boxes",
        "curves",
        "seconds",
    ]
    out = csv.DictWriter(sys.stdout, fieldnames=fields)
    out.writeheader()
    for k in range(args.count):
        net = fixtures.random_instance(rng, tuple(args.degrees))
        t0 = time.perf_counter()
        result = solve(net, opts)
        seconds = time.perf_counter() - t0
        cond = estimate_cond(net, args.grid, result.visited_centers).value
        row = {"instance": k, "cond": f"{cond:.4g}", "curves": len(result.curves), "seconds": f"{seconds:.2f}"}
        row.update(result.stats.as_dict())
        out.writerow(row)
        sys.stdout.flush()


if __name__ == "__main__":
    main()
