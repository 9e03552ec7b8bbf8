"""Small dense linear algebra: LU solves, Jacobi SVD, pseudo-inverses, hull LP."""

from __future__ import annotations

import numpy as np

__all__ = [
    "lu_factor",
    "lu_solve",
    "solve",
    "inverse",
    "singular_values",
    "pinv",
    "pinv_inf_norm",
    "origin_in_hull",
]

PIVOT_TOL = 1e-13
RANK_TOL = 1e-12
HULL_TOL = 1e-9
SIGN_DELTA = 1e-12


def lu_factor(A):
    """LU factorization with partial pivoting, PA = LU.

    Returns ``(lu, perm)`` with L (unit lower) and U packed into ``lu`` and
    ``perm`` the row order, or None when a pivot magnitude falls below
    ``PIVOT_TOL * ||A||_inf``.
    """
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    n = A.shape[0]
    scale = np.max(np.sum(np.abs(A), axis=1)) if n else 0.0
    perm = np.arange(n)
    for k in range(n):
        p = k + int(np.argmax(np.abs(A[k:, k])))
        if abs(A[p, k]) <= PIVOT_TOL * scale or A[p, k] == 0.0:
            return None
        if p != k:
            A[[k, p]] = A[[p, k]]
            perm[[k, p]] = perm[[p, k]]
        A[k + 1 :, k] /= A[k, k]
        A[k + 1 :, k + 1 :] -= np.outer(A[k + 1 :, k], A[k, k + 1 :])
    return A, perm


def lu_solve(factors, b) -> np.ndarray:
    lu, perm = factors
    b = np.asarray(b, dtype=float)
    y = b[perm].copy()
    n = lu.shape[0]
    for i in range(n):
        y[i] -= lu[i, :i] @ y[:i]
    for i in range(n - 1, -1, -1):
        y[i] = (y[i] - lu[i, i + 1 :] @ y[i + 1 :]) / lu[i, i]
    return y


def solve(A, b):
    """Solve Ax = b; returns None when A is numerically singular."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if b.shape[0] != A.shape[0]:
        raise ValueError(f"rhs has length {b.shape[0]}, matrix has {A.shape[0]} rows")
    factors = lu_factor(A)
    if factors is None:
        return None
    return lu_solve(factors, b)


def inverse(A):
    """Explicit inverse via LU, or None when singular."""
    A = np.asarray(A, dtype=float)
    return solve(A, np.eye(A.shape[0]))


def _jacobi_columns(G: np.ndarray, max_sweeps: int = 60):
    """One-sided Jacobi on the columns of G (batched over leading axes).

    Returns (W, V) with W = G V, columns of W mutually orthogonal, V orthogonal.
    """
    W = np.array(G, dtype=float)
    k = W.shape[-1]
    V = np.broadcast_to(np.eye(k), W.shape[:-2] + (k, k)).copy()
    eps = np.finfo(float).eps
    for _ in range(max_sweeps):
        rotated = False
        for p in range(k - 1):
            for q in range(p + 1, k):
                wp, wq = W[..., :, p], W[..., :, q]
                alpha = np.sum(wp * wp, axis=-1)
                beta = np.sum(wq * wq, axis=-1)
                gamma = np.sum(wp * wq, axis=-1)
                active = np.abs(gamma) > eps * np.sqrt(alpha * beta)
                if not np.any(active):
                    continue
                rotated = True
                g = np.where(active, gamma, 1.0)
                zeta = (beta - alpha) / (2.0 * g)
                t = np.sign(zeta) / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                t = np.where(zeta == 0.0, 1.0, t)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                c = np.where(active, c, 1.0)[..., None]
                s = np.where(active, s, 0.0)[..., None]
                for M in (W, V):
                    mp = M[..., :, p].copy()
                    mq = M[..., :, q]
                    M[..., :, p] = c * mp - s * mq
                    M[..., :, q] = s * mp + c * mq
        if not rotated:
            break
    return W, V


def singular_values(A) -> np.ndarray:
    """Singular values in descending order (batched over leading axes)."""
    A = np.asarray(A, dtype=float)
    G = A if A.shape[-1] <= A.shape[-2] else np.swapaxes(A, -1, -2)
    W, _ = _jacobi_columns(G)
    return -np.sort(-np.linalg.norm(W, axis=-2), axis=-1)


def pinv(A):
    """A^T (A A^T)^{-1} for a full-row-rank n x (n+1) matrix (batched).

    Rows are marked with ``inf`` entries where A is rank deficient.
    """
    A = np.asarray(A, dtype=float)
    W, V = _jacobi_columns(np.swapaxes(A, -1, -2))
    sig = np.linalg.norm(W, axis=-2)
    smax = np.max(sig, axis=-1, keepdims=True)
    deficient = np.any(sig <= RANK_TOL * np.maximum(1.0, smax), axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        # A = V W^T with W^T W = diag(sig^2), hence A^T (A A^T)^{-1} = W diag(sig^-2) V^T
        P = (W / np.where(sig > 0, sig * sig, 1.0)[..., None, :]) @ np.swapaxes(V, -1, -2)
    P = np.where(deficient[..., None, None], np.inf, P)
    return P


def pinv_inf_norm(A):
    """||A^T (A A^T)^{-1}||_inf, or ``inf`` when A has rank below its row count."""
    P = pinv(A)
    norms = np.max(np.sum(np.abs(P), axis=-1), axis=-1)
    return float(norms) if np.ndim(norms) == 0 else norms


def _phase_one(P: np.ndarray, stop: float = HULL_TOL) -> float:
    """Minimum total infeasibility of {lam >= 0, sum lam = 1, P^T lam = 0}.

    Bland's rule throughout. Stops early once the infeasibility is at most
    ``stop``, since only the comparison against it matters to callers.
    """
    N, n = P.shape
    rows = n + 1
    # columns: N lambdas, rows artificials, rhs; the rhs (0, ..., 0, 1) is already >= 0
    T = np.zeros((rows + 1, N + rows + 1))
    T[:n, :N] = P.T
    T[n, :N] = 1.0
    T[n, -1] = 1.0
    T[:rows, N : N + rows] = np.eye(rows)
    T[rows] = -np.sum(T[:rows], axis=0)
    T[rows, N : N + rows] = 0.0
    basis = list(range(N, N + rows))
    eps = 1e-12
    cost = T[rows, :-1]
    rhs = T[:rows, -1]
    for _ in range(50 * (N + rows)):
        if -T[rows, -1] <= stop:
            break
        col = int(np.argmax(cost < -eps))
        if cost[col] >= -eps:
            break
        column = T[:rows, col]
        best, row = np.inf, -1
        for r in range(rows):
            if column[r] > eps:
                ratio = rhs[r] / column[r]
                if ratio < best - 1e-15 or (ratio <= best + 1e-15 and basis[r] < basis[row]):
                    best, row = ratio, r
        if row < 0:
            break
        pivot_row = T[row] / column[row]
        T -= np.outer(T[:, col], pivot_row)
        T[row] = pivot_row
        basis[row] = col
    return -T[rows, -1]


def origin_in_hull(points) -> bool:
    """True iff the origin lies in the convex hull of the given n-vectors."""
    P = np.asarray(points, dtype=float)
    if P.ndim != 2 or P.shape[0] == 0:
        raise ValueError("origin_in_hull needs a non-empty list of equal-length points")
    scale = np.max(np.abs(P))
    if scale == 0.0:
        return True
    P = P / scale
    if np.any(np.all(P >= SIGN_DELTA, axis=0)) or np.any(np.all(P <= -SIGN_DELTA, axis=0)):
        return False
    if np.any(np.max(np.abs(P), axis=1) <= HULL_TOL):
        return True
    return _phase_one(P) <= HULL_TOL

