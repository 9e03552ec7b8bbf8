"""Tensor-product Bernstein-Bezier polynomial systems.

A system f : R^(n+1) -> R^n is stored as a control net: a dense array of
shape ``(m_1+1, ..., m_{n+1}+1, n)`` whose leading indices are the
multi-index (i_1, ..., i_{n+1}) in row-major order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property, lru_cache
from math import comb, prod
from typing import Sequence

import numpy as np

__all__ = [
    "ControlNet",
    "Box",
    "eval_net",
    "eval_many",
    "derivative_net",
    "second_derivative_net",
    "jacobian",
    "jacobian_many",
    "reparametrize",
    "reparam_matrix",
    "max_control_norm",
    "xi_B",
    "theta",
    "from_power_basis",
    "from_ssi",
]

_CHUNK = 4096


@dataclass(frozen=True, eq=False)
class ControlNet:
    """Control points of a vector-valued tensor-product Bernstein polynomial.

    ``coeffs`` has shape ``degrees + 1`` followed by the output dimension n.
    """

    coeffs: np.ndarray

    # makes ndarray @ ControlNet defer to __rmatmul__
    __array_ufunc__ = None

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.ndim < 2:
            raise ValueError("coeffs needs at least one variable axis and one output axis")
        if c.shape[-1] < 1 or min(c.shape) < 1:
            raise ValueError(f"empty coefficient array of shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("control points must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_flat(cls, n: int, degrees: Sequence[int], points) -> "ControlNet":
        """Build a net from a row-major list of n-vectors."""
        degrees = tuple(int(m) for m in degrees)
        if any(m < 0 for m in degrees):
            raise ValueError(f"degrees must be non-negative, got {degrees}")
        pts = np.asarray(points, dtype=float)
        count = prod(m + 1 for m in degrees)
        if pts.shape != (count, n):
            raise ValueError(
                f"expected {count} control points of length {n}, got array of shape {pts.shape}"
            )
        return cls(pts.reshape(tuple(m + 1 for m in degrees) + (n,)))

    @property
    def n(self) -> int:
        return self.coeffs.shape[-1]

    @property
    def nvars(self) -> int:
        return self.coeffs.ndim - 1

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(s - 1 for s in self.coeffs.shape[:-1])

    def flat(self) -> np.ndarray:
        """Control points as a ``(count, n)`` array in row-major multi-index order."""
        return self.coeffs.reshape(-1, self.n)

    @cached_property
    def gradient_nets(self) -> tuple["ControlNet", ...]:
        return tuple(derivative_net(self, j) for j in range(self.nvars))

    @cached_property
    def hessian_nets(self) -> dict[tuple[int, int], "ControlNet"]:
        """Mixed second partial nets keyed by (j, k) with j <= k."""
        d = self.nvars
        return {
            (j, k): derivative_net(self.gradient_nets[j], k)
            for j in range(d)
            for k in range(j, d)
        }

    def __call__(self, x) -> np.ndarray:
        return eval_net(self, x)

    def __rmatmul__(self, A) -> "ControlNet":
        # A @ net: left-multiply every control point by the matrix A
        A = np.atleast_2d(np.asarray(A, dtype=float))
        return ControlNet(self.coeffs @ A.T)

    def scaled(self, c: float) -> "ControlNet":
        return ControlNet(self.coeffs * c)


@dataclass(frozen=True, eq=False)
class Box:
    """Closed infinity-norm ball B(center, radius)."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.array(self.center, dtype=float)
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        if not self.radius > 0:
            raise ValueError(f"box radius must be positive, got {self.radius}")
        object.__setattr__(self, "radius", float(self.radius))

    @classmethod
    def unit(cls, dim: int) -> "Box":
        return cls(np.full(dim, 0.5), 0.5)

    @property
    def lo(self) -> np.ndarray:
        return self.center - self.radius

    @property
    def hi(self) -> np.ndarray:
        return self.center + self.radius

    @property
    def width(self) -> float:
        return 2.0 * self.radius

    def contains(self, x) -> bool:
        return bool(np.max(np.abs(np.asarray(x, dtype=float) - self.center)) <= self.radius)

    def children(self) -> list["Box"]:
        """The 2^(n+1) half-size boxes, in lexicographic corner order."""
        r = self.radius / 2.0
        return [
            Box(self.center + r * np.array(signs), r)
            for signs in itertools.product((-1.0, 1.0), repeat=self.center.size)
        ]


def _check_point(net: ControlNet, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != net.nvars:
        raise ValueError(f"point has {x.shape[-1]} coordinates, net has {net.nvars} variables")
    return x


def _decasteljau_batch(c: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Contract axis 1 of ``c`` (shape (P or 1, m+1, ...)) at parameters t (P,)."""
    t = t.reshape((-1,) + (1,) * (c.ndim - 1))
    s = 1.0 - t
    m = c.shape[1] - 1
    for _ in range(m):
        c = s * c[:, :-1] + t * c[:, 1:]
    return c[:, 0]


def eval_many(net: ControlNet, X) -> np.ndarray:
    """Evaluate the net at each row of ``X``; returns shape (P, n)."""
    X = np.atleast_2d(_check_point(net, X))
    out = np.empty((X.shape[0], net.n))
    for s in range(0, X.shape[0], _CHUNK):
        pts = X[s : s + _CHUNK]
        c = net.coeffs[None]
        for j in range(net.nvars):
            c = _decasteljau_batch(c, pts[:, j])
        out[s : s + _CHUNK] = c
    return out


def eval_net(net: ControlNet, x) -> np.ndarray:
    """Evaluate f(x) by axis-by-axis de Casteljau reduction.

    Points outside the unit cube are handled by extrapolation.
    """
    x = _check_point(net, x)
    if x.ndim != 1:
        return eval_many(net, x)
    c = net.coeffs
    for j in range(net.nvars):
        t = x[j]
        for _ in range(c.shape[0] - 1):
            c = (1.0 - t) * c[:-1] + t * c[1:]
        c = c[0]
    return np.array(c)


def derivative_net(net: ControlNet, axis: int) -> ControlNet:
    """Control net of the partial derivative along ``axis``.

    Uses d/dt Z_{i,m} = m (Z_{i-1,m-1} - Z_{i,m-1}), i.e. scaled forward
    differences of the control points. A degree-0 axis gives the zero net.
    """
    if not 0 <= axis < net.nvars:
        raise ValueError(f"axis {axis} out of range for {net.nvars} variables")
    m = net.degrees[axis]
    if m == 0:
        return ControlNet(np.zeros_like(net.coeffs))
    return ControlNet(m * np.diff(net.coeffs, axis=axis))


def second_derivative_net(net: ControlNet, j: int, k: int) -> ControlNet:
    return net.hessian_nets[(min(j, k), max(j, k))]


def jacobian_many(net: ControlNet, X) -> np.ndarray:
    """Jacobians at each row of X, shape (P, n, n+1)."""
    X = np.atleast_2d(_check_point(net, X))
    return np.stack([eval_many(d, X) for d in net.gradient_nets], axis=-1)


def jacobian(net: ControlNet, x) -> np.ndarray:
    """The n x (n+1) Jacobian f'(x)."""
    x = _check_point(net, x)
    if x.ndim != 1:
        return jacobian_many(net, x)
    return np.column_stack([eval_net(d, x) for d in net.gradient_nets])


def _blossom_rows(m: int, lo: float, hi: float) -> np.ndarray:
    # Row i holds the blossom weights b(lo^(m-i), hi^i) of each original control point.
    R = np.empty((m + 1, m + 1))
    A = np.eye(m + 1)
    stages = [A]
    for _ in range(m):
        A = (1.0 - lo) * A[:-1] + lo * A[1:]
        stages.append(A)
    for i in range(m + 1):
        B = stages[m - i]
        for _ in range(i):
            B = (1.0 - hi) * B[:-1] + hi * B[1:]
        R[i] = B[0]
    return R


@lru_cache(maxsize=4096)
def _cached_blossom(m: int, lo: float, hi: float) -> np.ndarray:
    R = _blossom_rows(m, lo, hi)
    R.setflags(write=False)
    return R


def reparam_matrix(m: int, lo: float, hi: float) -> np.ndarray:
    """Linear map taking degree-m control points on [0,1] to those on [lo, hi]."""
    if not lo < hi:
        raise ValueError(f"reparametrization needs lo < hi, got [{lo}, {hi}]")
    return _cached_blossom(int(m), float(lo), float(hi))


def reparametrize(net: ControlNet, lo, hi) -> ControlNet:
    """Control net of q -> f(lo + q * (hi - lo)).

    Each axis is handled by de Casteljau steps at ``lo`` and ``hi`` (a blossom
    evaluation), so intervals reaching outside [0, 1] are allowed.
    """
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (net.nvars,))
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (net.nvars,))
    if np.all(lo == 0.0) and np.all(hi == 1.0):
        return net
    c = net.coeffs
    d = net.nvars
    # transform the leading axis, then rotate it to the back of the variable axes
    roll = tuple(range(1, d)) + (0, d)
    for j, m in enumerate(net.degrees):
        shape = c.shape
        if not (lo[j] == 0.0 and hi[j] == 1.0):
            c = (reparam_matrix(m, lo[j], hi[j]) @ c.reshape(m + 1, -1)).reshape(shape)
        c = c.transpose(roll)
    return ControlNet(np.ascontiguousarray(c))


def max_control_norm(net: ControlNet) -> float:
    """M = max infinity norm over the control points."""
    return float(np.max(np.abs(net.coeffs))) if net.coeffs.size else 0.0


def xi_B(m: int) -> float:
    """Bound on Bernstein coefficient size relative to the sup of a degree-m polynomial."""
    if m < 0:
        raise ValueError("degree must be non-negative")
    total = 0.0
    for i in range(m + 1):
        p = 1.0
        for j in range(m + 1):
            if j != i:
                p *= max(abs(m - j), abs(j)) / abs(i - j)
        total += p
    return total


def theta(degrees: Sequence[int]) -> float:
    return float(prod(xi_B(m) for m in degrees))


def _power_to_bernstein(m: int) -> np.ndarray:
    # t^j = sum_{i>=j} C(i,j)/C(m,j) Z_{i,m}(t)
    T = np.zeros((m + 1, m + 1))
    for j in range(m + 1):
        for i in range(j, m + 1):
            T[i, j] = comb(i, j) / comb(m, j)
    return T


def from_power_basis(n: int, degrees: Sequence[int], power_coeffs) -> ControlNet:
    """Convert monomial coefficients a[j_1..j_{n+1}] (n-vectors) to a Bernstein net.

    ``power_coeffs`` has the same shape as the resulting net; entry
    ``[j_1, ..., j_{n+1}]`` multiplies x_1^j_1 ... x_{n+1}^j_{n+1}.
    """
    degrees = tuple(int(m) for m in degrees)
    a = np.asarray(power_coeffs, dtype=float)
    shape = tuple(m + 1 for m in degrees) + (n,)
    if a.shape != shape:
        a = a.reshape(shape)
    for j, m in enumerate(degrees):
        a = np.moveaxis(np.tensordot(_power_to_bernstein(m), a, axes=(1, j)), 0, j)
    return ControlNet(a)


def from_ssi(p: ControlNet, q: ControlNet) -> ControlNet:
    """Surface/surface intersection as a system in (s, t, u, v).

    b[i1, i2, i3, i4] = a[i1, i2] - a'[i3, i4], so that
    f(s, t, u, v) = p(s, t) - q(u, v).
    """
    for name, s in (("p", p), ("q", q)):
        if s.n != 3 or s.nvars != 2:
            raise ValueError(
                f"surface {name} must map 2 variables to 3-vectors, got {s.nvars} -> {s.n}"
            )
    b = p.coeffs[:, :, None, None, :] - q.coeffs[None, None, :, :, :]
    return ControlNet(b)
