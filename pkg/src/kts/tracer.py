"""Trace the certified curve segment through a box that passed the Kantorovich test."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bernstein import Box, ControlNet, max_control_norm
from .kantorovich import AugmentedSystem, KantorovichCertificate, newton_solve

__all__ = ["CurveSegment", "TracerFailure", "trace_segment"]

SLOW_NEWTON = 5
MIN_STEP_FRACTION = 1.0 / 128.0


class TracerFailure(RuntimeError):
    """Newton failed from both warm starts at some level."""


@dataclass
class CurveSegment:
    points: np.ndarray
    axis: int
    k_range: tuple[float, float]
    residual_max: float
    newton_iters: int = 0
    segment_id: int = -1

    @property
    def start(self) -> np.ndarray:
        return self.points[0]

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]


def trace_segment(
    net: ControlNet,
    cert: KantorovichCertificate,
    box: Box,
    step: float | None = None,
    tol: float = 1e-12,
    max_iter: int = 50,
    warm_start: bool = True,
    adaptive: bool = True,
) -> CurveSegment:
    """Sweep the level x_axis = k across the slab and solve each level by Newton.

    Each level is warm-started from the previous point; if that fails or
    lands outside the certified ball B(x0, rho_-), Newton restarts from the
    box center, which converges for every level in the slab.
    """
    x0 = box.center
    i = cert.axis
    r = box.radius
    k_lo, k_hi = x0[i] - r, x0[i] + r
    eps = r / 8.0 if step is None else float(step)
    min_eps = min(eps, r * MIN_STEP_FRACTION) if adaptive else eps
    scale = max(1.0, max_control_norm(net))
    res_bound = 1e-10 * (1.0 + max_control_norm(net))
    sys = AugmentedSystem(net, i, k_lo, x0, np.eye(net.nvars))
    reach = cert.rho_minus + 1e-10 + 1e-12 * r

    def certified(level):
        out = newton_solve(sys.at_level(level), x0, tol, max_iter, scale)
        if not out.converged or out.residual > res_bound:
            raise TracerFailure(f"Newton from the box center failed at level {level}")
        return out

    first = certified(k_lo)
    points = [first.x]
    worst_res = first.residual
    iters = first.iterations
    k = k_lo
    while k < k_hi:
        k_next = k + eps
        if k_next >= k_hi - 1e-12 * r:
            k_next = k_hi
        out = None
        if warm_start:
            out = newton_solve(sys.at_level(k_next), points[-1], tol, max_iter, scale)
            iters = max(iters, out.iterations)
            if adaptive and out.converged and out.iterations > SLOW_NEWTON and eps / 2 >= min_eps:
                eps /= 2.0
                continue
            if (
                not out.converged
                or out.residual > res_bound
                or np.max(np.abs(out.x - x0)) > reach
            ):
                out = None
        if out is None:
            out = certified(k_next)
            iters = max(iters, out.iterations)
        points.append(out.x)
        worst_res = max(worst_res, out.residual)
        k = k_next
    return CurveSegment(np.array(points), i, (k_lo, k_hi), worst_res, iters)
