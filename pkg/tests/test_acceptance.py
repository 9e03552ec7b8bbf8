"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``python3 -m pytest tests/test_acceptance.py -v``; the collected
lines are repeated in the terminal summary.
"""

import functools
import time
from math import comb

import numpy as np
import pytest

import kts.solver as solver_module
from kts import fixtures
from kts.bernstein import (
    Box,
    eval_many,
    eval_net,
    from_ssi,
    jacobian,
    jacobian_many,
    max_control_norm,
    reparametrize,
    xi_B,
)
from kts.conditioning import estimate_cond
from kts.kantorovich import (
    D_HI,
    D_LO,
    AugmentedSystem,
    KantorovichCertificate,
    newton_solve,
    omega_hat,
)
from kts.solver import SolverOptions, solve

RESULTS: dict[int, str] = {}

ENSEMBLE_SIZE = 100
COMPLETENESS_SIZE = 50


def criterion(number: int, title: str):
    """Record and print a PASS/FAIL line for the wrapped check."""

    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            try:
                detail = fn(*args, **kwargs)
            except BaseException as exc:
                if isinstance(exc, pytest.skip.Exception):
                    raise
                line = f"[FAIL] criterion {number}: {title} ({type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''})"
                RESULTS[number] = line
                print(line)
                raise
            line = f"[PASS] criterion {number}: {title}" + (f" ({detail})" if detail else "")
            RESULTS[number] = line
            print(line)

        return run

    return wrap


def bernstein_matrix(t: np.ndarray, m: int) -> np.ndarray:
    """B[a, i] = C(m, i) t_a^i (1 - t_a)^(m - i)."""
    i = np.arange(m + 1)
    coef = np.array([comb(m, k) for k in i], dtype=float)
    return coef * t[:, None] ** i * (1 - t[:, None]) ** (m - i)


def grid_values(net, box: Box, k: int = 50) -> np.ndarray:
    """f on a k x k grid over a 2-variable box, by explicit basis sums."""
    (m1, m2) = net.degrees
    tx = np.linspace(box.lo[0], box.hi[0], k)
    ty = np.linspace(box.lo[1], box.hi[1], k)
    return np.einsum("ai,ijn,bj->abn", bernstein_matrix(tx, m1), net.coeffs, bernstein_matrix(ty, m2))


def polyline_distances(points: np.ndarray, curves) -> np.ndarray:
    """Euclidean distance from each point to the nearest edge of the output polylines."""
    A, B = [], []
    for c in curves:
        pts = np.vstack([c.points, c.points[:1]]) if c.closed else c.points
        A.append(pts[:-1])
        B.append(pts[1:])
    A = np.vstack(A)
    D = np.vstack(B) - A
    dd = np.maximum(np.sum(D * D, axis=1), 1e-300)
    out = np.empty(len(points))
    for s in range(0, len(points), 64):
        P = points[s : s + 64, None, :]
        t = np.clip(np.sum((P - A) * D, axis=2) / dd, 0.0, 1.0)
        proj = A + t[..., None] * D
        out[s : s + 64] = np.min(np.linalg.norm(proj - P, axis=2), axis=1)
    return out


def sign_change_roots(net, k: int = 200) -> np.ndarray:
    """Edge midpoints of a k x k grid where f changes sign or vanishes."""
    g = np.linspace(0.0, 1.0, k)
    X, Y = np.meshgrid(g, g, indexing="ij")
    F = eval_many(net, np.c_[X.ravel(), Y.ravel()]).reshape(k, k)
    S = np.sign(F)
    roots = []
    for i, j in np.argwhere(S[:-1, :] * S[1:, :] <= 0):
        roots.append(((g[i] + g[i + 1]) / 2, g[j]))
    for i, j in np.argwhere(S[:, :-1] * S[:, 1:] <= 0):
        roots.append((g[i], (g[j] + g[j + 1]) / 2))
    return np.array(roots).reshape(-1, 2)


def well_conditioned(rng, n: int) -> np.ndarray:
    while True:
        A = rng.normal(size=(n, n))
        if np.linalg.cond(A) < 10:
            return A


class Recording:
    """Boxes that passed the exclusion or Kantorovich test during a solve."""

    def __init__(self):
        self.excluded: list[Box] = []
        self.certified: list[tuple[Box, KantorovichCertificate]] = []


def recorded_solve(net, options=None):
    rec = Recording()
    orig_excl = solver_module.exclusion_test
    orig_kant = solver_module.kantorovich_test

    def excl(net_, box):
        out = orig_excl(net_, box)
        if out:
            rec.excluded.append(box)
        return out

    def kant(net_, box):
        out = orig_kant(net_, box)
        if isinstance(out, KantorovichCertificate):
            rec.certified.append((box, out))
        return out

    solver_module.exclusion_test = excl
    solver_module.kantorovich_test = kant
    try:
        result = solve(net, options)
    finally:
        solver_module.exclusion_test = orig_excl
        solver_module.kantorovich_test = orig_kant
    return result, rec


@pytest.fixture(scope="module")
def ensemble():
    """100 random degree-(2,2) instances with their solves and recorded boxes."""
    rng = np.random.default_rng(20240501)
    runs = []
    for _ in range(ENSEMBLE_SIZE):
        net = fixtures.random_instance(rng, (2, 2))
        result, rec = recorded_solve(net)
        runs.append((net, result, rec))
    return runs


# -- 1 ---------------------------------------------------------------------

SSI_BOX_BUDGET = 40_000


@criterion(1, "SSI condition estimate in [381, 466] within 60 s")
def test_c1_ssi_condition_number():
    t0 = time.perf_counter()
    net = from_ssi(*fixtures.ssi_surfaces())
    assert net.degrees == (2, 2, 3, 3)
    # the fixture is far too ill-conditioned for a complete subdivision in the
    # time limit, so the solver runs under a box budget and its box centers
    # join the 20^4 grid
    result = solve(net, SolverOptions(max_boxes=SSI_BOX_BUDGET))
    est = estimate_cond(net, 20, result.visited_centers)
    elapsed = time.perf_counter() - t0
    assert 381.0 <= est.value <= 466.0, f"estimate {est.value:.4g}"
    assert elapsed <= 60.0, f"took {elapsed:.1f} s"
    return f"estimate {est.value:.2f}, {est.samples_used} samples, {elapsed:.1f} s"


# -- 2, 3, 4 ---------------------------------------------------------------


@criterion(2, "circle: 1 closed curve, residual <= 1e-8, length within 1%, <= 5 s")
def test_c2_circle():
    t0 = time.perf_counter()
    net = fixtures.circle(0.3)
    result = solve(net)
    elapsed = time.perf_counter() - t0
    assert len(result.curves) == 1 and result.curves[0].closed
    residual = float(np.max(np.abs(eval_many(net, result.curves[0].points))))
    assert residual <= 1e-8
    length = result.curves[0].length()
    assert abs(length - 2 * np.pi * 0.3) <= 0.01 * 2 * np.pi * 0.3
    assert elapsed <= 5.0
    return f"residual {residual:.1e}, length {length:.6f}, {elapsed:.2f} s"


@criterion(3, "two lines: 2 open curves at x1 = 0.3 and 0.7 within 1e-8, <= 5 s")
def test_c3_two_lines():
    t0 = time.perf_counter()
    result = solve(fixtures.two_lines(0.3, 0.7))
    elapsed = time.perf_counter() - t0
    assert len(result.curves) == 2
    assert not any(c.closed for c in result.curves)
    targets = sorted(float(c.points[0, 0]) for c in result.curves)
    worst = 0.0
    for c, target in zip(sorted(result.curves, key=lambda c: c.points[0, 0]), (0.3, 0.7)):
        worst = max(worst, float(np.max(np.abs(c.points[:, 0] - target))))
    assert worst <= 1e-8, f"x1 deviation {worst:.2e} (lines at {targets})"
    assert elapsed <= 5.0
    return f"max x1 deviation {worst:.1e}, {elapsed:.2f} s"


@criterion(4, "constant instance: 0 curves, 1 box")
def test_c4_constant():
    result = solve(fixtures.constant(1.0))
    assert result.curves == []
    assert result.stats.boxes_examined == 1


# -- 5, 6 ------------------------------------------------------------------


@criterion(5, "Kantorovich soundness on 100 random (2,2) instances")
def test_c5_kantorovich_soundness(ensemble):
    violations, checked = [], 0
    for idx, (net, _, rec) in enumerate(ensemble):
        scale = max(1.0, max_control_norm(net))
        for box, cert in rec.certified:
            x0 = box.center
            i = cert.axis
            for k in (x0[i] - box.radius, x0[i], x0[i] + box.radius):
                sys = AugmentedSystem.build(net, i, k, x0)
                out = newton_solve(sys, x0, tol=1e-12, max_iter=50, scale=scale)
                resid = float(np.max(np.abs(sys.residual(out.x))))
                dist = float(np.max(np.abs(out.x - x0)))
                checked += 1
                if not (
                    out.converged
                    and out.iterations <= 10
                    and resid <= 1e-10
                    and dist <= cert.rho_minus + 1e-10
                ):
                    violations.append((idx, tuple(x0), k, out.iterations, resid, dist, cert.rho_minus))
    assert checked > 0
    assert not violations, f"{len(violations)} violations, first {violations[0]}"
    return f"{checked} Newton runs over {sum(len(r.certified) for _, _, r in ensemble)} certified boxes"


@criterion(6, "exclusion soundness on the same ensemble, 50^2 grid per box")
def test_c6_exclusion_soundness(ensemble):
    violations, checked = [], 0
    for idx, (net, _, rec) in enumerate(ensemble):
        for box in rec.excluded:
            vals = grid_values(net, box)[..., 0]
            checked += 1
            # a sign change would force a root inside the box
            if np.min(np.abs(vals)) <= 0 or not (np.all(vals > 0) or np.all(vals < 0)):
                violations.append((idx, tuple(box.center), box.radius))
    assert checked > 0
    assert not violations, f"{len(violations)} violations, first {violations[0]}"
    return f"{checked} excluded boxes"


# -- 7 ---------------------------------------------------------------------


@criterion(7, "omega_hat bounds the sampled Lipschitz ratio, 20 instances x 1000 pairs")
def test_c7_lipschitz_bound():
    rng = np.random.default_rng(7)
    violations, worst = 0, 0.0
    done = 0
    while done < 20:
        net = fixtures.random_instance(rng, (2, 2))
        x0 = rng.uniform(0, 1, 2)
        axis = int(rng.integers(0, 2))
        sys = AugmentedSystem.build(net, axis, x0[axis], x0)
        if sys is None:
            continue
        done += 1
        w = omega_hat(sys)
        Y = rng.uniform(D_LO, D_HI, size=(1000, 2))
        Z = rng.uniform(D_LO, D_HI, size=(1000, 2))
        # the level row of h' is constant, so it cancels in h'(y) - h'(z)
        diff = jacobian_many(net, Y) - jacobian_many(net, Z)
        M = sys.anchor_jacobian_inverse[:, : net.n] @ diff
        num = np.max(np.sum(np.abs(M), axis=2), axis=1)
        ratio = num / np.max(np.abs(Y - Z), axis=1)
        violations += int(np.sum(ratio > w))
        worst = max(worst, float(np.max(ratio) / w) if w > 0 else 0.0)
    assert violations == 0
    return f"largest sampled ratio / omega_hat = {worst:.3f}"


# -- 8 ---------------------------------------------------------------------

AFFINE_BOX_BUDGET = 25_000


@criterion(8, "affine invariance on 10 instances (1x1 and 3x3 multipliers)")
def test_c8_affine_invariance():
    rng = np.random.default_rng(88)
    cases = [(1, (2, 2))] * 5 + [(3, (1, 1, 1, 1))] * 5
    opts = SolverOptions(max_boxes=AFFINE_BOX_BUDGET)
    worst = 0.0
    for n, degrees in cases:
        while True:
            net = fixtures.random_instance(rng, degrees)
            base = solve(net, opts)
            # only instances finished within the budget make the box counts informative
            if base.stats.unresolved_boxes == 0 and base.curves:
                break
        A = well_conditioned(rng, n)
        other = solve(A @ net, opts)
        assert other.stats.boxes_examined == base.stats.boxes_examined
        assert len(other.curves) == len(base.curves)
        for ca, cb in zip(base.curves, other.curves):
            assert ca.points.shape == cb.points.shape
            worst = max(worst, float(np.max(np.abs(ca.points - cb.points))))
    assert worst <= 1e-6
    return f"max point deviation {worst:.1e}"


# -- 9 ---------------------------------------------------------------------


@criterion(9, "numerics: reparametrization round trip, Jacobian vs differences, xi_B")
def test_c9_numerics():
    rng = np.random.default_rng(9)
    worst_trip, worst_jac = 0.0, 0.0
    for _ in range(50):
        nvars = int(rng.integers(2, 4))
        degrees = tuple(int(m) for m in rng.integers(0, 4, size=nvars))
        net = fixtures.random_instance(rng, degrees)
        M = max_control_norm(net)
        lo = rng.uniform(-0.5, 0.6, nvars)
        hi = lo + rng.uniform(0.2, 0.9, nvars)
        sub = reparametrize(net, lo, hi)
        w = hi - lo
        back = reparametrize(sub, -lo / w, (1 - lo) / w)
        worst_trip = max(worst_trip, float(np.max(np.abs(back.coeffs - net.coeffs))) / (1 + M))
        h = 1e-6
        for x in rng.uniform(0.05, 0.95, size=(5, nvars)):
            J = jacobian(net, x)
            fd = np.column_stack(
                [(eval_net(net, x + h * e) - eval_net(net, x - h * e)) / (2 * h) for e in np.eye(nvars)]
            )
            worst_jac = max(worst_jac, float(np.max(np.abs(J - fd)) / max(1.0, np.max(np.abs(J)))))
    assert worst_trip <= 1e-10
    assert worst_jac <= 1e-6
    assert xi_B(1) == 2 and xi_B(2) == 6
    return f"round trip {worst_trip:.1e}, Jacobian {worst_jac:.1e}"


# -- 10 --------------------------------------------------------------------


@criterion(10, "completeness vs a 200^2 sign-change oracle on 50 resolved instances")
def test_c10_completeness(ensemble):
    rng = np.random.default_rng(1010)
    runs = [(net, res) for net, res, _ in ensemble if res.stats.unresolved_boxes == 0]
    while len(runs) < COMPLETENESS_SIZE:
        net = fixtures.random_instance(rng, (2, 2))
        res = solve(net)
        if res.stats.unresolved_boxes == 0:
            runs.append((net, res))
    misses, roots_checked, worst = [], 0, 0.0
    for idx, (net, res) in enumerate(runs[:COMPLETENESS_SIZE]):
        roots = sign_change_roots(net)
        if len(roots) == 0:
            continue
        if not res.curves:
            misses.append((idx, len(roots)))
            continue
        d = polyline_distances(roots, res.curves)
        roots_checked += len(roots)
        worst = max(worst, float(d.max()))
        if np.any(d > 0.01):
            misses.append((idx, int(np.sum(d > 0.01))))
    assert not misses, f"instances with misses: {misses}"
    return f"{roots_checked} oracle roots, farthest {worst:.1e}"
