"""Solve the surface/surface intersection fixture and estimate its condition number.

The full subdivision of this instance needs boxes far below 2^-12 before the
Kantorovich test passes anywhere, so the run is capped by ``--max-boxes``.
"""

from __future__ import annotations

import argparse
import time

from kts import fixtures
from kts.conditioning import estimate_cond
from kts.solver import SolverOptions, solve


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-boxes", type=int, default=40_000)
    parser.add_argument("--grid", type=int, default=20)
    args = parser.parse_args()

    net = fixtures.ssi_instance()
    t0 = time.perf_counter()
    result = solve(net, SolverOptions(max_boxes=args.max_boxes))
    t1 = time.perf_counter()
    est = estimate_cond(net, args.grid, result.visited_centers)
    t2 = time.perf_counter()

    print(f"degrees {net.degrees}, n = {net.n}")
    for key, value in result.stats.as_dict().items():
        print(f"{key:>18}: {value}")
    print(f"{'curves':>18}: {len(result.curves)}")
    print(f"{'solve time':>18}: {t1 - t0:.1f} s")
    print(f"{'condition':>18}: {est.value:.2f} at {est.argmax_point} ({est.samples_used} samples, {t2 - t1:.1f} s)")


if __name__ == "__main__":
    main()
