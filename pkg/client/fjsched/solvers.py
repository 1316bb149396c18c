"""Solver lookup by algorithm name."""
import logging
from fractions import Fraction

from .epas import epas_solve
from .errors import PreconditionError
from .matching import solve_matching_approx
from .oracle import exact_solve
from .settings import SolverLimits
from .special import (
    solve_grouped,
    solve_partial_equal,
    solve_q2,
    solve_q_inf,
)

log = logging.getLogger(__name__)

DEFAULT_EPSILON = Fraction(1, 3)


def _oracle(instance, epsilon, limits):
    return exact_solve(instance, limits)


def _epas(instance, epsilon, limits):
    return epas_solve(
        instance, DEFAULT_EPSILON if epsilon is None else epsilon, limits)


def _plain(solver):
    def run(instance, epsilon, limits):
        return solver(instance)
    return run


ALGORITHMS = {
    "oracle": _oracle,
    "bipartite": _plain(solve_matching_approx),
    "q2": _plain(solve_q2),
    "qinf": _plain(solve_q_inf),
    "partial-equal": _plain(solve_partial_equal),
    "grouped": _plain(solve_grouped),
    "epas": _epas,
}


def solve(instance, algorithm, epsilon=None, limits=None):
    """Run the solver registered as `algorithm`.

    Args:
        instance (ForkJoinInstance): Instance to solve.
        algorithm (str): One of `ALGORITHMS`.
        epsilon (Fraction, optional): Accuracy of the approximation scheme.
        limits (SolverLimits, optional): Search caps.

    Returns:
        SolveReport: Solver result.

    Raises:
        PreconditionError: Unknown algorithm or unmet solver precondition.
        LimitExceededError: A search cap was exceeded.

    """
    solver = ALGORITHMS.get(algorithm)
    if solver is None:
        raise PreconditionError(f"Unknown algorithm '{algorithm}'")
    report = solver(instance, epsilon, limits or SolverLimits())
    log.info(
        f"{algorithm}: makespan {report.makespan}"
        f" on {len(instance.tasks)} tasks")
    return report
