"""Reference instances used by the tests, scripts and CLI examples."""

from __future__ import annotations

import numpy as np

from .bernstein import ControlNet, from_power_basis, from_ssi

# Bezier surface p, control point a[i1][i2]
SSI_P = np.array(
    [
        [(0.155, 0.055, 0.002524), (0.155, 0.555, 0.003592), (0.155, 1.055, -0.008142)],
        [(0.655, 0.055, 0.005414), (0.655, 0.555, -0.01454), (0.655, 1.055, 0.005146)],
        [(1.155, 0.055, -0.01745), (1.155, 0.555, -0.02108), (1.155, 1.055, 0.01718)],
    ]
)

# Bezier surface q, control point a'[i3][i4]
SSI_Q = np.array(
    [
        [(0.1768, 0.1295, 0.02303), (0.1767, 0.3465, 0.06306), (0.1767, 0.6467, -0.0801), (0.1768, 1.437, -0.01946)],
        [(0.4081, 0.1287, 0.04006), (0.4081, 0.3434, 0.0948), (0.4081, 0.6384, -0.08438), (0.4081, 1.444, 0.004442)],
        [(0.7515, 0.1249, -0.07777), (0.7515, 0.3294, -0.1071), (0.7515, 0.6008, 0.05544), (0.7515, 1.477, -0.01756)],
        [(1.6068, 0.1078, -0.004634), (1.6068, 0.2651, 0.01833), (1.6068, 0.4288, -0.01627), (1.6069, 1.628, 0.2468)],
    ]
)

CIRCLE_RADIUS = 0.3


def ssi_surfaces() -> tuple[ControlNet, ControlNet]:
    return ControlNet(SSI_P), ControlNet(SSI_Q)


def ssi_instance() -> ControlNet:
    """The surface/surface intersection fixture, degrees (2, 2, 3, 3), n = 3."""
    return from_ssi(*ssi_surfaces())


def circle(radius: float = CIRCLE_RADIUS) -> ControlNet:
    """(x1 - .5)^2 + (x2 - .5)^2 - radius^2 as a degree-(2, 2) net."""
    a = np.zeros((3, 3, 1))
    a[0, 0, 0] = 0.5 - radius**2
    a[1, 0, 0] = -1.0
    a[2, 0, 0] = 1.0
    a[0, 1, 0] = -1.0
    a[0, 2, 0] = 1.0
    return from_power_basis(1, (2, 2), a)


def two_lines(a: float = 0.3, b: float = 0.7) -> ControlNet:
    """(x1 - a)(x1 - b) as a degree-(2, 0) net in two variables."""
    p = np.zeros((3, 1, 1))
    p[0, 0, 0] = a * b
    p[1, 0, 0] = -(a + b)
    p[2, 0, 0] = 1.0
    return from_power_basis(1, (2, 0), p)


def constant(value, nvars: int = 2) -> ControlNet:
    value = np.atleast_1d(np.asarray(value, dtype=float))
    return ControlNet(np.broadcast_to(value, (1,) * nvars + value.shape).copy())


def random_instance(rng: np.random.Generator, degrees=(2, 2), n: int | None = None) -> ControlNet:
    """Control points drawn uniformly from [-1, 1]."""
    n = len(degrees) - 1 if n is None else n
    shape = tuple(m + 1 for m in degrees) + (n,)
    return ControlNet(rng.uniform(-1.0, 1.0, size=shape))
