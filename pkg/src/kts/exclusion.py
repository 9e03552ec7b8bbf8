"""Hull-based exclusion test for hypercubes."""

from __future__ import annotations

from .bernstein import Box, ControlNet, reparametrize
from .linalg import origin_in_hull

__all__ = ["exclusion_test", "restrict"]


def restrict(net: ControlNet, box: Box) -> ControlNet:
    """Reparametrize ``net`` so that [0,1]^(n+1) maps onto ``box``."""
    return reparametrize(net, box.lo, box.hi)


def exclusion_test(net: ControlNet, box: Box) -> bool:
    """True when the box provably contains no zero of ``net``.

    The restricted control points bound f over the box by the convex hull
    property, so a hull that misses the origin rules out roots.
    """
    return not origin_in_hull(restrict(net, box).flat())
