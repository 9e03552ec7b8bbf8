"""Kantorovich-test subdivision driver.

Boxes are processed first-in first-out starting from [0,1]^(n+1). A box
covered by an explored region is skipped; otherwise it is discarded by the
exclusion test, or certified by the Kantorovich test and its curve segment
traced, or split into 2^(n+1) children.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bernstein import Box, ControlNet
from .exclusion import exclusion_test
from .kantorovich import (
    D_HI,
    D_LO,
    AugmentedSystem,
    KantorovichCertificate,
    kantorovich_test,
    newton_solve,
)
from .tracer import CurveSegment, TracerFailure, trace_segment

__all__ = [
    "SolverOptions",
    "ExploredRegion",
    "RunStats",
    "Curve",
    "CurveSet",
    "solve",
    "box_covered",
    "trim_overlaps",
    "join_segments",
    "clip_to_unit_cube",
]

RHO_SHRINK = 1e-12
FACE_TOL = 1e-10


@dataclass
class SolverOptions:
    min_width: float = 2.0**-20
    trace_step: float | None = None  # absolute level step; None means r/8 per box
    newton_tol: float = 1e-12
    max_newton_iter: int = 50
    join_tol: float = 1e-7
    clip: bool = True
    parallel: bool = False
    workers: int | None = None
    max_boxes: int | None = None  # budget; boxes left queued when it runs out count as unresolved


@dataclass(frozen=True)
class ExploredRegion:
    """slab x_axis in [lo, hi], intersected with D and the open ball B(x0, rho_+)."""

    axis: int
    slab: tuple[float, float]
    anchor: np.ndarray
    rho_minus: float
    rho_plus: float
    segment_id: int

    @classmethod
    def from_certificate(cls, cert: KantorovichCertificate, box: Box, segment_id: int):
        i = cert.axis
        return cls(
            i,
            (box.center[i] - box.radius, box.center[i] + box.radius),
            box.center,
            cert.rho_minus,
            cert.rho_plus,
            segment_id,
        )

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Closed hyperrectangle used for containment (rho_+ shrunk slightly)."""
        rho = self.rho_plus * (1.0 - RHO_SHRINK)
        lo = np.maximum(self.anchor - rho, D_LO)
        hi = np.minimum(self.anchor + rho, D_HI)
        lo[self.axis] = max(lo[self.axis], self.slab[0])
        hi[self.axis] = min(hi[self.axis], self.slab[1])
        return lo, hi

    def contains_box(self, box: Box) -> bool:
        lo, hi = self.bounds()
        return bool(np.all(box.lo >= lo) and np.all(box.hi <= hi))

    def contains_point(self, x, tol: float = FACE_TOL) -> bool:
        """Closed membership, faces padded by ``tol``."""
        lo, hi = self.bounds()
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= lo - tol) and np.all(x <= hi + tol))

    def interior_mask(self, pts: np.ndarray, tol: float = FACE_TOL) -> np.ndarray:
        """Points strictly inside; the slab faces are shrunk by ``tol``."""
        lo, hi = self.bounds()
        lo = lo.copy()
        hi = hi.copy()
        lo[self.axis] += tol
        hi[self.axis] -= tol
        return np.all((pts > lo) & (pts < hi), axis=1)


class _RegionIndex:
    """Explored regions with a vectorized box-containment query."""

    def __init__(self, dim: int):
        self.regions: list[ExploredRegion] = []
        self._lo = np.empty((0, dim))
        self._hi = np.empty((0, dim))

    def add(self, region: ExploredRegion) -> None:
        lo, hi = region.bounds()
        self.regions.append(region)
        self._lo = np.vstack([self._lo, lo])
        self._hi = np.vstack([self._hi, hi])

    def covers(self, box: Box) -> bool:
        if not self.regions:
            return False
        ok = np.all(self._lo <= box.lo, axis=1) & np.all(self._hi >= box.hi, axis=1)
        return bool(np.any(ok))

    def holds_segment(self, seg: CurveSegment) -> bool:
        """Both endpoints and the middle point inside one region."""
        if not self.regions:
            return False
        pts = np.array([seg.points[0], seg.points[len(seg.points) // 2], seg.points[-1]])
        inside = np.all(
            (pts[None] >= self._lo[:, None] - FACE_TOL) & (pts[None] <= self._hi[:, None] + FACE_TOL),
            axis=2,
        )
        return bool(np.any(np.all(inside, axis=1)))


def box_covered(box: Box, regions) -> bool:
    """True iff the box lies inside some explored region."""
    return any(r.contains_box(box) for r in regions)


@dataclass
class RunStats:
    boxes_examined: int = 0
    smallest_width: float = math.inf
    max_newton_iters: int = 0
    segments_found: int = 0
    unresolved_boxes: int = 0

    def as_dict(self) -> dict:
        return {
            "boxes_examined": self.boxes_examined,
            "smallest_width": self.smallest_width,
            "max_newton_iters": self.max_newton_iters,
            "segments_found": self.segments_found,
            "unresolved_boxes": self.unresolved_boxes,
        }


@dataclass
class Curve:
    points: np.ndarray
    closed: bool = False

    def length(self) -> float:
        pts = self.points
        if self.closed:
            pts = np.vstack([pts, pts[:1]])
        return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))


@dataclass
class CurveSet:
    curves: list[Curve]
    stats: RunStats
    segments: list[CurveSegment] = field(default_factory=list)
    regions: list[ExploredRegion] = field(default_factory=list)
    visited_centers: np.ndarray | None = None

    @property
    def all_points(self) -> np.ndarray:
        if not self.curves:
            return np.empty((0, 0))
        return np.vstack([c.points for c in self.curves])


def _examine(net: ControlNet, box: Box, opts: SolverOptions):
    """Pure per-box work: (excluded, certificate or None, segment or None)."""
    if exclusion_test(net, box):
        return True, None, None
    outcome = kantorovich_test(net, box)
    if not isinstance(outcome, KantorovichCertificate):
        return False, None, None
    try:
        seg = trace_segment(
            net, outcome, box, step=opts.trace_step, tol=opts.newton_tol, max_iter=opts.max_newton_iter
        )
    except TracerFailure:
        # treated like a failed Kantorovich test: the box is subdivided
        return False, None, None
    return False, outcome, seg


def solve(net: ControlNet, options: SolverOptions | None = None) -> CurveSet:
    """Find the solution curves of f = 0 in [0,1]^(n+1)."""
    opts = options or SolverOptions()
    d = net.nvars
    if net.n + 1 != d:
        raise ValueError(f"expected n + 1 variables for n = {net.n} equations, got {d}")
    stats = RunStats()
    regions = _RegionIndex(d)
    segments: list[CurveSegment] = []
    centers: list[np.ndarray] = []
    queue: deque[Box] = deque([Box.unit(d)])

    def settle(box: Box, result) -> None:
        excluded, cert, seg = result
        if excluded:
            return
        subdivide = True
        if cert is not None:
            region = ExploredRegion.from_certificate(cert, box, len(segments))
            stats.max_newton_iters = max(stats.max_newton_iters, seg.newton_iters)
            if not regions.holds_segment(seg):
                segments.append(seg)
                regions.add(region)
            subdivide = not region.contains_box(box)
        if subdivide:
            kids = box.children()
            if kids[0].width < opts.min_width:
                stats.unresolved_boxes += len(kids)
            else:
                queue.extend(kids)

    def visit(box: Box) -> bool:
        stats.boxes_examined += 1
        stats.smallest_width = min(stats.smallest_width, box.width)
        centers.append(box.center)
        return not regions.covers(box)

    budget = math.inf if opts.max_boxes is None else opts.max_boxes

    if opts.parallel:
        with ThreadPoolExecutor(max_workers=opts.workers) as pool:
            while queue and stats.boxes_examined < budget:
                batch = list(queue)
                queue.clear()
                if len(batch) > budget - stats.boxes_examined:
                    cut = int(budget - stats.boxes_examined)
                    queue.extend(batch[cut:])
                    batch = batch[:cut]
                # results are pure per box, so settling them in queue order
                # reproduces the sequential run exactly
                pending = [b for b in batch if not regions.covers(b)]
                results = dict(zip(map(id, pending), pool.map(lambda b: _examine(net, b, opts), pending)))
                for box in batch:
                    if visit(box):
                        res = results.get(id(box))
                        settle(box, res if res is not None else _examine(net, box, opts))
    else:
        while queue and stats.boxes_examined < budget:
            box = queue.popleft()
            if visit(box):
                settle(box, _examine(net, box, opts))
    stats.unresolved_boxes += len(queue)

    stats.segments_found = len(segments)
    for sid, seg in enumerate(segments):
        seg.segment_id = sid
    pieces = trim_overlaps(segments, regions.regions)
    curves = join_segments(pieces, opts.join_tol)
    if opts.clip:
        clipped = []
        for c in curves:
            clipped.extend(clip_to_unit_cube(net, c, opts))
        curves = clipped
    if not math.isfinite(stats.smallest_width):
        stats.smallest_width = 1.0
    return CurveSet(curves, stats, segments, list(regions.regions), np.array(centers))


def _cut(points: np.ndarray, region: ExploredRegion, owner: CurveSegment, tol: float):
    """Remove the part of a polyline strictly inside ``region``.

    Each cut end is reattached to the nearest endpoint of the segment that
    owns the region, which lies on the curve at the slab face.
    """
    inside = region.interior_mask(points)
    if not np.any(inside):
        return None
    ends = (owner.points[0], owner.points[-1])
    out = []
    n = len(points)
    i = 0
    while i < n:
        if inside[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and not inside[j + 1]:
            j += 1
        run = [p for p in points[i : j + 1]]
        if i > 0:
            a = min(ends, key=lambda e: np.max(np.abs(e - run[0])))
            if np.max(np.abs(a - run[0])) > tol:
                run.insert(0, a)
        if j < n - 1:
            a = min(ends, key=lambda e: np.max(np.abs(e - run[-1])))
            if np.max(np.abs(a - run[-1])) > tol:
                run.append(a)
        if len(run) >= 2:
            out.append(np.array(run))
        i = j + 1
    return out


def trim_overlaps(segments: list[CurveSegment], regions: list[ExploredRegion], tol: float = 1e-9):
    """Remove from each later segment the parts lying inside earlier explored regions.

    Returns a list of polylines (arrays of points).
    """
    region_of = {r.segment_id: r for r in regions}
    order = sorted(region_of)
    owner = {sid: segments[sid] for sid in order}
    if order:
        bounds = [region_of[rid].bounds() for rid in order]
        r_lo = np.array([b[0] for b in bounds])
        r_hi = np.array([b[1] for b in bounds])
        r_id = np.array(order)
    pieces = [(sid, seg.points) for sid, seg in enumerate(segments)]
    for _ in range(8):
        changed = False
        updated = []
        for sid, pts in pieces:
            if not order:
                updated.append((sid, pts))
                continue
            # only earlier regions whose box meets the piece's bounding box can cut it
            near = (r_id < sid) & np.all(r_lo < pts.max(axis=0), axis=1) & np.all(r_hi > pts.min(axis=0), axis=1)
            current = [pts]
            for rid in r_id[near]:
                region = region_of[int(rid)]
                nxt = []
                for p in current:
                    cut = _cut(p, region, owner[int(rid)], tol)
                    if cut is None:
                        nxt.append(p)
                    else:
                        changed = True
                        nxt.extend(cut)
                current = nxt
                if not current:
                    break
            updated.extend((sid, p) for p in current)
        pieces = updated
        if not changed:
            break
    return [p for _, p in pieces]


class _EndpointIndex:
    """Hash grid of polyline endpoints with cell size ``tol``."""

    def __init__(self, tol: float):
        self.tol = tol
        self.cells: dict[tuple, set] = {}

    def _key(self, x):
        return tuple(np.floor(np.asarray(x) / self.tol).astype(np.int64))

    def add(self, x, item) -> None:
        self.cells.setdefault(self._key(x), set()).add(item)

    def remove(self, x, item) -> None:
        self.cells[self._key(x)].discard(item)

    def near(self, x):
        base = self._key(x)
        found = []
        for off in itertools.product((-1, 0, 1), repeat=len(base)):
            found.extend(self.cells.get(tuple(b + o for b, o in zip(base, off)), ()))
        return found


def join_segments(pieces, tol_join: float = 1e-7) -> list[Curve]:
    """Join polylines sharing an endpoint until no two curves share one."""
    polys = [np.asarray(p, dtype=float) for p in pieces if len(p) >= 2]
    if not polys:
        return []
    alive = [True] * len(polys)
    closed = [False] * len(polys)
    index = _EndpointIndex(tol_join)
    for k, p in enumerate(polys):
        index.add(p[0], (k, 0))
        index.add(p[-1], (k, 1))

    def close(a, b):
        return np.max(np.abs(a - b)) <= tol_join

    def partner(k, x):
        hits = sorted(
            (q, e) for q, e in index.near(x) if q != k and alive[q] and close(x, polys[q][0 if e == 0 else -1])
        )
        return hits[0] if hits else None

    for k in range(len(polys)):
        if not alive[k]:
            continue
        for _side in range(2):
            # grow at the tail, then reverse and grow at the other end
            while True:
                hit = partner(k, polys[k][-1])
                if hit is None:
                    break
                q, e = hit
                other = polys[q] if e == 0 else polys[q][::-1]
                index.remove(polys[k][-1], (k, 1))
                index.remove(polys[q][0], (q, 0))
                index.remove(polys[q][-1], (q, 1))
                polys[k] = np.vstack([polys[k], other[1:]])
                alive[q] = False
                index.add(polys[k][-1], (k, 1))
            index.remove(polys[k][0], (k, 0))
            index.remove(polys[k][-1], (k, 1))
            polys[k] = polys[k][::-1]
            index.add(polys[k][0], (k, 0))
            index.add(polys[k][-1], (k, 1))
        if len(polys[k]) > 2 and close(polys[k][0], polys[k][-1]):
            closed[k] = True
            index.remove(polys[k][0], (k, 0))
            index.remove(polys[k][-1], (k, 1))
            polys[k] = polys[k][:-1]
    return [Curve(polys[k], closed[k]) for k in range(len(polys)) if alive[k]]


def _boundary_point(net: ControlNet, p_in, p_out, opts: SolverOptions):
    """Root of f on the unit-cube face crossed by the edge p_in -> p_out."""
    d = p_in - p_out
    best_t, face = 1.0, None
    for j in range(len(p_in)):
        for bound in (0.0, 1.0):
            if (p_out[j] - bound) * (p_in[j] - bound) < 0 or (p_out[j] - bound == 0.0):
                t = (p_in[j] - bound) / d[j] if d[j] != 0 else 0.0
                if 0.0 <= t <= best_t:
                    best_t, face = t, (j, bound)
    if face is None:
        return None
    j, bound = face
    guess = p_in - best_t * d
    sys = AugmentedSystem(net, j, bound, guess, np.eye(len(p_in)))
    out = newton_solve(sys, guess, opts.newton_tol, opts.max_newton_iter)
    if not out.converged:
        return None
    x = out.x
    if np.max(np.abs(x - guess)) > np.max(np.abs(d)) + 1e-12:
        return None
    if np.any(x < -1e-12) or np.any(x > 1 + 1e-12):
        return None
    return np.clip(x, 0.0, 1.0)


def clip_to_unit_cube(net: ControlNet, curve: Curve, opts: SolverOptions | None = None) -> list[Curve]:
    """Split a curve into the pieces lying in [0,1]^(n+1).

    Cut ends are moved onto the cube face with a Newton solve.
    """
    opts = opts or SolverOptions()
    pts = curve.points
    inside = np.all((pts >= -1e-12) & (pts <= 1 + 1e-12), axis=1)
    if np.all(inside):
        return [curve]
    if not np.any(inside):
        return []
    if curve.closed:
        k = int(np.argmin(inside))
        pts = np.vstack([pts[k:], pts[:k], pts[k : k + 1]])
        inside = np.all((pts >= -1e-12) & (pts <= 1 + 1e-12), axis=1)
    out = []
    n = len(pts)
    i = 0
    while i < n:
        if not inside[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and inside[j + 1]:
            j += 1
        run = [p for p in pts[i : j + 1]]
        if i > 0:
            b = _boundary_point(net, pts[i], pts[i - 1], opts)
            if b is not None and np.max(np.abs(b - run[0])) > 1e-12:
                run.insert(0, b)
        if j < n - 1:
            b = _boundary_point(net, pts[j], pts[j + 1], opts)
            if b is not None and np.max(np.abs(b - run[-1])) > 1e-12:
                run.append(b)
        if len(run) >= 2:
            out.append(Curve(np.array(run), False))
        i = j + 1
    return out
