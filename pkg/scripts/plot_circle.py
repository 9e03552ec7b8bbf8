"""Write the circle fixture's traced curve as an SVG file."""

from __future__ import annotations

import argparse
from pathlib import Path

from kts import fixtures
from kts.cli import emit
from kts.solver import solve


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--radius", type=float, default=fixtures.CIRCLE_RADIUS)
    parser.add_argument("--out", type=Path, default=Path("circle.svg"))
    args = parser.parse_args()
    result = solve(fixtures.circle(args.radius))
    args.out.write_text(emit(result, "svg"), encoding="utf-8")
    c = result.curves
    print(f"{len(c)} curve(s), length {sum(x.length() for x in c):.6f}, written to {args.out}")


if __name__ == "__main__":
    main()
