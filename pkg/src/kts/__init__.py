"""Kantorovich-test subdivision for the real solution curves of n polynomial
equations in n + 1 unknowns, given in tensor-product Bernstein form."""

from .bernstein import (
    Box,
    ControlNet,
    derivative_net,
    eval_many,
    eval_net,
    from_power_basis,
    from_ssi,
    jacobian,
    max_control_norm,
    reparametrize,
    theta,
    xi_B,
)
from .conditioning import CondEstimate, estimate_cond, local_term
from .exclusion import exclusion_test
from .kantorovich import KantorovichCertificate, KantorovichFailure, kantorovich_test, newton_solve
from .solver import Curve, CurveSet, RunStats, SolverOptions, solve
from .tracer import CurveSegment, trace_segment

__all__ = [
    "Box",
    "ControlNet",
    "derivative_net",
    "eval_many",
    "eval_net",
    "from_power_basis",
    "from_ssi",
    "jacobian",
    "max_control_norm",
    "reparametrize",
    "theta",
    "xi_B",
    "CondEstimate",
    "estimate_cond",
    "local_term",
    "exclusion_test",
    "KantorovichCertificate",
    "KantorovichFailure",
    "kantorovich_test",
    "newton_solve",
    "Curve",
    "CurveSet",
    "RunStats",
    "SolverOptions",
    "solve",
    "CurveSegment",
    "trace_segment",
]
