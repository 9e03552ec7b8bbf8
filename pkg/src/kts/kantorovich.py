"""Kantorovich test on a hypercube and Newton's method on augmented systems.

For a box with center x0 and an axis i, the square system
h(x) = (f(x), x_i - k) is checked for a fast starting point at x0: with
eta = ||h'(x0)^{-1} h(x0)|| and a Lipschitz bound omega_hat for
h'(x0)^{-1} h' over D = [-.5, 1.5]^(n+1), the box passes when
eta * omega_hat <= 1/4 for every level k in the slab and the ball
B(x0, rho_-) stays inside D.
"""

from __future__ import annotations

import enum
import math
import weakref
from dataclasses import dataclass, replace

import numpy as np

from .bernstein import Box, ControlNet, eval_net, jacobian, max_control_norm, reparametrize
from .linalg import inverse, solve

__all__ = [
    "D_LO",
    "D_HI",
    "AugmentedSystem",
    "KantorovichCertificate",
    "KantorovichFailure",
    "NewtonResult",
    "omega_hat",
    "eta",
    "kantorovich_test",
    "newton_solve",
    "rho_bounds",
]

D_LO, D_HI = -0.5, 1.5
FAST_START = 0.25


class KantorovichFailure(enum.Enum):
    FAIL = "fail"
    SINGULAR_ANCHOR = "singular-anchor"


@dataclass(frozen=True, eq=False)
class AugmentedSystem:
    """h(x) = (f(x), x_axis - level) anchored at x0 with h'(x0)^{-1} cached."""

    base: ControlNet
    axis: int
    level: float
    anchor: np.ndarray
    anchor_jacobian_inverse: np.ndarray

    @classmethod
    def build(cls, net: ControlNet, axis: int, level: float, anchor, jac=None):
        """Returns None when h'(anchor) is numerically singular."""
        anchor = np.asarray(anchor, dtype=float)
        if jac is None:
            jac = jacobian(net, anchor)
        H = _augment(jac, axis)
        Hinv = inverse(H)
        if Hinv is None:
            return None
        return cls(net, axis, float(level), anchor, Hinv)

    def at_level(self, level: float) -> "AugmentedSystem":
        return replace(self, level=float(level))

    def residual(self, x) -> np.ndarray:
        return _residual(self.base, self.axis, self.level, x)

    def jacobian(self, x) -> np.ndarray:
        return _augment(jacobian(self.base, x), self.axis)


@dataclass(frozen=True)
class KantorovichCertificate:
    axis: int
    eta_worst: float
    omega_hat: float
    rho_minus: float
    rho_plus: float
    k_star: float
    anchor: np.ndarray

    @property
    def h(self) -> float:
        return self.eta_worst * self.omega_hat


@dataclass(frozen=True)
class NewtonResult:
    x: np.ndarray
    iterations: int
    converged: bool
    residual: float


def _augment(jac: np.ndarray, axis: int) -> np.ndarray:
    e = np.zeros((1, jac.shape[1]))
    e[0, axis] = 1.0
    return np.vstack([jac, e])


def _residual(net: ControlNet, axis: int, level: float, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.append(eval_net(net, x), x[axis] - level)


_curvature_cache: "weakref.WeakKeyDictionary[ControlNet, np.ndarray]" = weakref.WeakKeyDictionary()


def curvature_table(net: ControlNet) -> np.ndarray:
    """All second-partial control points of f, reparametrized onto D.

    Shape (count, n); the (j, k) and (k, j) partials share one block since
    they are identical.
    """
    table = _curvature_cache.get(net)
    if table is None:
        d = net.nvars
        lo, hi = np.full(d, D_LO), np.full(d, D_HI)
        blocks = [reparametrize(h, lo, hi).flat() for h in net.hessian_nets.values()]
        table = np.vstack(blocks)
        table.setflags(write=False)
        _curvature_cache[net] = table
    return table


def _omega_from_inverse(net: ControlNet, Hinv: np.ndarray) -> float:
    d = net.nvars
    # the x_i - k row of h has no second derivatives, so only the first n columns act
    g = curvature_table(net) @ Hinv[:, : net.n].T
    # derivative of the reparametrized g picks up the factor |D| = 2 per axis
    return (d * d / 2.0) * 2.0 * float(np.max(np.abs(g)))


def omega_hat(sys: AugmentedSystem) -> float:
    """Lipschitz bound for h'(x0)^{-1} h' over D from Bernstein control points."""
    return _omega_from_inverse(sys.base, sys.anchor_jacobian_inverse)


def eta(sys: AugmentedSystem) -> float:
    """||h'(x0)^{-1} h(x0)||_inf."""
    return float(np.max(np.abs(sys.anchor_jacobian_inverse @ sys.residual(sys.anchor))))


def rho_bounds(eta_value: float, omega: float) -> tuple[float, float]:
    """Kantorovich radii (rho_-, rho_+); omega == 0 is the affine limit."""
    if omega == 0.0:
        return eta_value, math.inf
    h = eta_value * omega
    root = math.sqrt(max(0.0, 1.0 - 2.0 * h))
    return (1.0 - root) / omega, (1.0 + root) / omega


def _ball_in_domain(x0: np.ndarray, rho: float) -> bool:
    return bool(np.all(x0 - rho >= D_LO) and np.all(x0 + rho <= D_HI))


def kantorovich_test(net: ControlNet, box: Box):
    """Kantorovich test on ``box``.

    Returns a KantorovichCertificate for the lowest passing axis, otherwise
    KantorovichFailure.FAIL, or KantorovichFailure.SINGULAR_ANCHOR when
    h'(x0) is singular for every axis.
    """
    x0 = box.center
    r = box.radius
    fx = eval_net(net, x0)
    jac = jacobian(net, x0)
    any_regular = False
    for i in range(net.nvars):
        Hinv = inverse(_augment(jac, i))
        if Hinv is None:
            continue
        any_regular = True
        omega = _omega_from_inverse(net, Hinv)
        # eta(k) = ||Hinv (f(x0), x0_i - k)||, maximized at a slab endpoint
        worst_eta, worst_k = -1.0, None
        for k in (x0[i] - r, x0[i] + r):
            e = float(np.max(np.abs(Hinv @ np.append(fx, x0[i] - k))))
            if e > worst_eta:
                worst_eta, worst_k = e, k
        if worst_eta * omega > FAST_START:
            continue
        rho_minus, rho_plus = rho_bounds(worst_eta, omega)
        if not _ball_in_domain(x0, rho_minus):
            continue
        return KantorovichCertificate(
            axis=i,
            eta_worst=worst_eta,
            omega_hat=omega,
            rho_minus=rho_minus,
            rho_plus=rho_plus,
            k_star=float(worst_k),
            anchor=x0,
        )
    return KantorovichFailure.FAIL if any_regular else KantorovichFailure.SINGULAR_ANCHOR


def newton_solve(
    sys: AugmentedSystem,
    start,
    tol: float = 1e-12,
    max_iter: int = 50,
    scale: float | None = None,
) -> NewtonResult:
    """Newton's method x <- x - h'(x)^{-1} h(x) on the augmented system.

    Stops when ||h(x)|| <= tol * scale, or when the step falls below
    tol * max(1, ||x||) and the residual is below 1e-10 * (1 + scale).
    ``scale`` defaults to max(1, M).
    """
    if scale is None:
        scale = max(1.0, max_control_norm(sys.base))
    net, axis, level = sys.base, sys.axis, sys.level
    x = np.array(start, dtype=float)
    res = _residual(net, axis, level, x)
    rnorm = float(np.max(np.abs(res)))
    for it in range(max_iter + 1):
        if rnorm <= tol * scale:
            return NewtonResult(x, it, True, rnorm)
        if it == max_iter or not np.all(np.isfinite(x)):
            break
        step = solve(_augment(jacobian(net, x), axis), res)
        if step is None:
            break
        x = x - step
        x[axis] = level
        res = _residual(net, axis, level, x)
        rnorm = float(np.max(np.abs(res)))
        if np.max(np.abs(step)) <= tol * max(1.0, float(np.max(np.abs(x)))):
            ok = rnorm <= 1e-10 * (1.0 + scale)
            return NewtonResult(x, it + 1, ok, rnorm)
    return NewtonResult(x, max_iter, False, rnorm)
