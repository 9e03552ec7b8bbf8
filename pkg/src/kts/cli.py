"""Command-line front end.

Usage::

    python -m kts solve INSTANCE.json [--emit {csv,json,svg}] [--cond] [--grid N] ...

Instance files are UTF-8 JSON objects, either a plain system::

    {"n": 1, "degrees": [2, 2], "control_points": [[b_00], [b_01], ...]}

with control points listed in row-major multi-index order (last index
fastest), or a surface/surface intersection built from two parametric
surfaces in R^3::

    {"ssi": [{"degrees": [2, 2], "control_points": [[x, y, z], ...]},
             {"degrees": [3, 3], "control_points": [[x, y, z], ...]}]}

Exit status is 0 on clean completion, 2 when some boxes were left
unresolved and 1 on input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from math import prod
from pathlib import Path

from .bernstein import ControlNet, from_ssi
from .conditioning import CondEstimate, estimate_cond
from .solver import CurveSet, SolverOptions, solve

__all__ = [
    "InstanceError",
    "parse_instance",
    "load_instance",
    "dump_instance",
    "emit",
    "build_parser",
    "run",
    "main",
]

FORMATS = ("csv", "json", "svg")
SVG_STROKE = 0.002


class InstanceError(ValueError):
    """Malformed instance description; the message names the offending field."""


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _parse_net(obj, where: str, n: int | None) -> ControlNet:
    if not isinstance(obj, dict):
        raise InstanceError(f"{where}: expected a JSON object")
    if "degrees" not in obj:
        raise InstanceError(f"{where}.degrees: missing")
    if "control_points" not in obj:
        raise InstanceError(f"{where}.control_points: missing")
    degrees = obj["degrees"]
    if not isinstance(degrees, list) or not degrees or not all(
        isinstance(m, int) and not isinstance(m, bool) and m >= 0 for m in degrees
    ):
        raise InstanceError(f"{where}.degrees: expected a non-empty list of non-negative integers")
    pts = obj["control_points"]
    count = prod(m + 1 for m in degrees)
    if not isinstance(pts, list) or len(pts) != count:
        got = len(pts) if isinstance(pts, list) else type(pts).__name__
        raise InstanceError(f"{where}.control_points: expected {count} points for degrees {degrees}, got {got}")
    width = n if n is not None else (len(pts[0]) if isinstance(pts[0], list) else -1)
    for k, p in enumerate(pts):
        if (
            not isinstance(p, list)
            or len(p) != width
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in p)
        ):
            raise InstanceError(f"{where}.control_points[{k}]: expected a list of {width} numbers")
    try:
        return ControlNet.from_flat(width, degrees, pts)
    except ValueError as exc:
        raise InstanceError(f"{where}.control_points: {exc}") from None


def parse_instance(data) -> ControlNet:
    """Build a control net from a decoded JSON instance (dict) or JSON text."""
    if isinstance(data, (str, bytes)):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise InstanceError(f"not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise InstanceError("instance: expected a JSON object")
    if "ssi" in data:
        surfaces = data["ssi"]
        if not isinstance(surfaces, list) or len(surfaces) != 2:
            raise InstanceError("ssi: expected a list of two surface objects")
        p, q = (_parse_net(s, f"ssi[{k}]", 3) for k, s in enumerate(surfaces))
        for k, s in enumerate((p, q)):
            if s.nvars != 2:
                raise InstanceError(f"ssi[{k}].degrees: a surface needs exactly 2 degrees")
        return from_ssi(p, q)
    if "n" not in data:
        raise InstanceError("n: missing")
    n = data["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise InstanceError("n: expected a positive integer")
    net = _parse_net(data, "instance", n)
    if net.nvars != n + 1:
        raise InstanceError(f"degrees: expected n + 1 = {n + 1} entries, got {net.nvars}")
    return net


def load_instance(path) -> ControlNet:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InstanceError(f"cannot read {path}: {exc.strerror}") from None
    return parse_instance(text)


def dump_instance(net: ControlNet) -> str:
    """Canonical JSON text of a plain instance: 17 significant digits, row-major points."""
    rows = ",\n    ".join("[" + ", ".join(_fmt(v) for v in p) + "]" for p in net.flat())
    degrees = ", ".join(str(m) for m in net.degrees)
    return f'{{\n  "n": {net.n},\n  "degrees": [{degrees}],\n  "control_points": [\n    {rows}\n  ]\n}}\n'


def _emit_csv(result: CurveSet) -> str:
    dim = next((c.points.shape[1] for c in result.curves), 0)
    lines = ["curve_id,closed," + ",".join(f"x{k + 1}" for k in range(dim))]
    for cid, c in enumerate(result.curves):
        closed = int(c.closed)
        for p in c.points:
            lines.append(f"{cid},{closed}," + ",".join(_fmt(v) for v in p))
    return "\n".join(lines) + "\n"


def _emit_json(result: CurveSet, cond: CondEstimate | None) -> str:
    doc = {
        "curves": [{"closed": c.closed, "points": c.points.tolist()} for c in result.curves],
        "stats": result.stats.as_dict(),
    }
    if cond is not None:
        doc["cond"] = {
            "value": cond.value,
            "argmax_point": cond.argmax_point.tolist(),
            "samples_used": cond.samples_used,
        }
    return json.dumps(doc, indent=1) + "\n"


def _emit_svg(result: CurveSet, project: tuple[int, int]) -> str:
    a, b = project
    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 1 1">',
        '<rect x="0" y="0" width="1" height="1" fill="none" stroke="#999" stroke-width="0.002"/>',
    ]
    for c in result.curves:
        # flip the vertical axis so that x_b grows upwards
        xy = [f"{p[a]:.9f},{1.0 - p[b]:.9f}" for p in c.points]
        d = "M " + " L ".join(xy) + (" Z" if c.closed else "")
        parts.append(f'<path d="{d}" fill="none" stroke="black" stroke-width="{SVG_STROKE}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit(result: CurveSet, fmt: str, cond: CondEstimate | None = None, project=(1, 2)) -> str:
    """Render a solve result as csv, json or svg text.

    ``project`` picks the two (1-based) coordinates drawn by the svg output.
    """
    if fmt == "csv":
        return _emit_csv(result)
    if fmt == "json":
        return _emit_json(result, cond)
    if fmt == "svg":
        dim = len(result.visited_centers[0]) if result.visited_centers is not None else 2
        i, j = project
        if not (1 <= i <= dim and 1 <= j <= dim and i != j):
            raise ValueError(f"projection {project} is invalid for {dim} coordinates")
        return _emit_svg(result, (i - 1, j - 1))
    raise ValueError(f"unknown output format {fmt!r}; choose from {', '.join(FORMATS)}")


def _summary(result: CurveSet, cond: CondEstimate | None, with_stats: bool) -> str:
    s = result.stats
    nc = len(result.curves)
    closed = sum(c.closed for c in result.curves)
    box_word = "box" if s.boxes_examined == 1 else "boxes"
    lines = [f"{nc} curve{'' if nc == 1 else 's'}, {s.boxes_examined} {box_word} examined"]
    if nc:
        lines.append(f"closed curves: {closed}")
    if with_stats:
        lines += [f"{k}: {v}" for k, v in s.as_dict().items()]
    if cond is not None:
        pt = ", ".join(f"{v:.6g}" for v in cond.argmax_point)
        lines.append(f"condition estimate: {cond.value:.6g} at ({pt}), {cond.samples_used} samples")
    return "\n".join(lines) + "\n"


def _projection(text: str) -> tuple[int, int]:
    try:
        i, j = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected two comma-separated coordinate numbers, e.g. 1,2") from None
    return i, j


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kts", description="Kantorovich-test subdivision curve solver")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("solve", help="trace the solution curves of an instance file")
    p.add_argument("instance", help="JSON instance file")
    d = SolverOptions()
    p.add_argument("--min-width", type=float, default=d.min_width, help="smallest box width before giving up")
    p.add_argument("--trace-step", type=float, default=d.trace_step, help="level step of the tracer (default r/8)")
    p.add_argument("--newton-tol", type=float, default=d.newton_tol)
    p.add_argument("--max-newton-iter", type=int, default=d.max_newton_iter)
    p.add_argument("--max-boxes", type=int, default=d.max_boxes, help="stop after examining this many boxes")
    p.add_argument("--cond", action="store_true", help="also estimate the condition number")
    p.add_argument("--grid", type=int, default=20, help="grid points per axis for --cond")
    p.add_argument("--emit", choices=FORMATS, default=None, help="write curves in this format")
    p.add_argument("--project", type=_projection, default=(1, 2), help="coordinate pair drawn by svg output")
    p.add_argument("--stats", action="store_true", help="print the run statistics")
    p.add_argument(
        "--parallel",
        action="store_true",
        help="examine boxes on a thread pool; results are settled in queue order",
    )
    p.add_argument("-o", "--output", default=None, help="write the emitted text here instead of stdout")
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # bad flags are input errors; --help exits cleanly
        return 0 if exc.code in (0, None) else 1
    try:
        net = load_instance(args.instance)
    except InstanceError as exc:
        print(f"error: {args.instance}: {exc}", file=stderr)
        return 1
    if args.grid < 2:
        print("error: --grid needs at least 2 points per axis", file=stderr)
        return 1
    opts = SolverOptions(
        min_width=args.min_width,
        trace_step=args.trace_step,
        newton_tol=args.newton_tol,
        max_newton_iter=args.max_newton_iter,
        max_boxes=args.max_boxes,
        parallel=args.parallel,
    )
    result = solve(net, opts)
    cond = estimate_cond(net, args.grid, result.visited_centers) if args.cond else None
    if args.emit is not None:
        try:
            text = emit(result, args.emit, cond, args.project)
        except ValueError as exc:
            print(f"error: {exc}", file=stderr)
            return 1
        summary = _summary(result, cond, args.stats) if args.stats or cond is not None else ""
        if args.emit == "csv" and summary:
            # stats ride along as comment lines after the points
            text += "".join(f"# {line}\n" for line in summary.splitlines())
            summary = ""
        if args.output:
            Path(args.output).write_text(text, encoding="utf-8")
        else:
            stdout.write(text)
        if args.emit == "svg" and summary:
            stderr.write(summary)
    else:
        stdout.write(_summary(result, cond, args.stats))
    return 2 if result.stats.unresolved_boxes > 0 else 0


def main() -> None:
    sys.exit(run())
