"""Sampled estimate of the condition number

    cond(f) = M * max_x min(1 / ||f(x)||, ||f'(x)^dagger||)

over [0,1]^(n+1), infinity norms throughout. The estimate is a maximum over
finitely many sample points and therefore never exceeds the true value.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .bernstein import ControlNet, eval_many, jacobian_many, max_control_norm
from .linalg import pinv_inf_norm

__all__ = ["CondEstimate", "local_term", "local_terms", "estimate_cond", "uniform_grid"]

_BATCH = 8192


@dataclass(frozen=True)
class CondEstimate:
    value: float
    argmax_point: np.ndarray
    samples_used: int


def local_terms(net: ControlNet, X) -> np.ndarray:
    """min(1/||f(x)||, ||f'(x)^dagger||) for each row of X; inf where both blow up."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    out = np.empty(X.shape[0])
    for s in range(0, X.shape[0], _BATCH):
        pts = X[s : s + _BATCH]
        fnorm = np.max(np.abs(eval_many(net, pts)), axis=1)
        with np.errstate(divide="ignore"):
            inv_f = np.where(fnorm > 0, 1.0 / fnorm, np.inf)
        pin = np.atleast_1d(pinv_inf_norm(jacobian_many(net, pts)))
        out[s : s + _BATCH] = np.minimum(inv_f, pin)
    return out


def local_term(net: ControlNet, x) -> float:
    return float(local_terms(net, np.asarray(x, dtype=float)[None])[0])


def uniform_grid(dim: int, points_per_axis: int) -> np.ndarray:
    g = np.linspace(0.0, 1.0, points_per_axis)
    return np.array(list(itertools.product(g, repeat=dim)))


def estimate_cond(net: ControlNet, grid_points_per_axis: int = 20, extra_points=None) -> CondEstimate:
    """M times the largest local term over a uniform grid plus ``extra_points``."""
    if grid_points_per_axis < 2:
        raise ValueError("need at least 2 grid points per axis")
    X = uniform_grid(net.nvars, grid_points_per_axis)
    if extra_points is not None and len(extra_points):
        X = np.vstack([X, np.asarray(extra_points, dtype=float).reshape(-1, net.nvars)])
    terms = local_terms(net, X)
    k = int(np.argmax(terms))
    M = max_control_norm(net)
    value = math.inf if math.isinf(terms[k]) else M * float(terms[k])
    return CondEstimate(value, X[k].copy(), X.shape[0])
