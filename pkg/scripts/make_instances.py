"""Write the reference instances as JSON files under instances/."""

from __future__ import annotations

import argparse
import json
from pathlib import Path

from kts import fixtures
from kts.cli import dump_instance


def _surface(points) -> dict:
    m1, m2 = points.shape[0] - 1, points.shape[1] - 1
    return {"degrees": [m1, m2], "control_points": points.reshape(-1, 3).tolist()}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=Path(__file__).resolve().parents[1] / "instances", type=Path)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    plain = {
        "circle.json": fixtures.circle(),
        "two_lines.json": fixtures.two_lines(),
        "constant.json": fixtures.constant(1.0),
    }
    for name, net in plain.items():
        (args.out / name).write_text(dump_instance(net), encoding="utf-8")
    ssi = {"ssi": [_surface(fixtures.SSI_P), _surface(fixtures.SSI_Q)]}
    (args.out / "ssi_tables12.json").write_text(json.dumps(ssi, indent=1) + "\n", encoding="utf-8")
    print(f"wrote {len(plain) + 1} instances to {args.out}")


if __name__ == "__main__":
    main()
