import numpy as np
import pytest

from kts import fixtures
from kts.bernstein import Box, ControlNet, eval_many
from kts.kantorovich import KantorovichCertificate, kantorovich_test
from kts.solver import SolverOptions, solve
from kts.tracer import trace_segment


def linear_x1(offset: float) -> ControlNet:
    return ControlNet(np.array([[[-offset], [-offset]], [[1 - offset], [1 - offset]]]))


def certified(net, center, radius):
    box = Box(np.asarray(center, dtype=float), radius)
    cert = kantorovich_test(net, box)
    assert isinstance(cert, KantorovichCertificate)
    return cert, box


def test_affine_segment_is_straight():
    net = linear_x1(0.5)
    cert, box = certified(net, [0.5, 0.5], 0.25)
    seg = trace_segment(net, cert, box, step=0.125)
    assert len(seg.points) == 5
    assert np.allclose(seg.points[:, 0], 0.5, atol=1e-15)
    assert np.allclose(seg.points[:, 1], [0.25, 0.375, 0.5, 0.625, 0.75])


def test_full_width_step_gives_both_faces():
    net = linear_x1(0.5)
    cert, box = certified(net, [0.5, 0.5], 0.25)
    seg = trace_segment(net, cert, box, step=0.5)
    assert len(seg.points) == 2
    assert np.allclose(seg.points[:, 1], [0.25, 0.75])


def test_circle_segment_on_curve():
    net = fixtures.circle()
    r = 1 / 256
    cert, box = certified(net, [0.8 - r, 0.5 + r], r)
    seg = trace_segment(net, cert, box)
    x, y = seg.points.T
    assert np.max(np.abs((x - 0.5) ** 2 + (y - 0.5) ** 2 - 0.09)) <= 1e-9
    lo, hi = seg.k_range
    assert seg.points[0, seg.axis] == lo and seg.points[-1, seg.axis] == hi
    assert seg.residual_max <= 1e-10


def test_warm_start_equivalence():
    rng = np.random.default_rng(11)
    compared = 0
    for _ in range(6):
        net = fixtures.random_instance(rng, (2, 2))
        res = solve(net, SolverOptions(min_width=2.0**-10))
        for region in res.regions[:10]:
            box = Box(region.anchor, (region.slab[1] - region.slab[0]) / 2)
            cert = kantorovich_test(net, box)
            warm = trace_segment(net, cert, box, warm_start=True, adaptive=False)
            cold = trace_segment(net, cert, box, warm_start=False, adaptive=False)
            assert warm.points.shape == cold.points.shape
            assert np.max(np.abs(warm.points - cold.points)) <= 1e-9
            compared += 1
    assert compared > 0


def test_traced_points_stay_in_certified_ball():
    net = fixtures.circle()
    r = 1 / 256
    cert, box = certified(net, [0.5 + r, 0.2 + r], r)
    seg = trace_segment(net, cert, box)
    assert np.max(np.abs(seg.points - box.center), axis=1).max() <= cert.rho_minus + 1e-10 + r
    assert np.max(np.abs(eval_many(net, seg.points))) <= 1e-10


@pytest.mark.parametrize("step", [None, 1 / 1024])
def test_step_controls_density(step):
    net = fixtures.circle()
    r = 1 / 256
    cert, box = certified(net, [0.8 - r, 0.5 + r], r)
    seg = trace_segment(net, cert, box, step=step)
    # the slab is 2r wide: r/8 steps give 16 intervals, 1/1024 gives 8
    expect = 17 if step is None else 9
    assert len(seg.points) == expect
