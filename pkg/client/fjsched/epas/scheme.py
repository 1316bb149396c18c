"""Approximation scheme driver: guess `T`, round, solve the ILP, rebuild."""
import logging

from ..errors import PreconditionError
from ..model import (
    Guarantee,
    GuaranteeKind,
    format_fraction,
    make_report,
    makespan,
    serial_schedule,
)
from ..search import min_feasible, role_pairs
from ..settings import SolverLimits
from .configurations import enumerate_configurations
from .ilp import build_ilp, solve_ilp
from .reconstruct import reconstruct_schedule
from .simplify import simplify, snap_epsilon

log = logging.getLogger(__name__)


def ratio_bound(epsilon):
    """Proven ratio for accuracy `epsilon`, None when it is vacuous."""
    epsilon = snap_epsilon(epsilon)
    denominator = 1 - 2 * epsilon - epsilon ** 2
    if denominator <= 0:
        return None
    return (1 + 6 * epsilon) / denominator


def epas_probe(instance, T, epsilon, m_src, m_sink, limits=None):
    """Try to build a schedule for bound `T` and fixed roles.

    The rebuilt schedule may exceed `T` by the rounding slack
    `(1 + 6 eps) / (1 + eps)`; a longer one is rejected.

    Returns:
        tuple[Optional[Schedule], dict]: Schedule or None when the rounded
            instance does not fit, and statistics of the rounding.

    """
    limits = limits or SolverLimits()
    simplified = simplify(instance, T, epsilon, m_src, m_sink)
    configurations = {
        mtype: enumerate_configurations(
            simplified, mtype, limits.epas_max_configs)
        for mtype in simplified.types
    }
    ilp = build_ilp(simplified, configurations)
    stats = simplified.stats()
    stats["configurations"] = [
        {
            "speed": format_fraction(mtype.speed),
            "role": mtype.role,
            "count": len(configs),
        }
        for mtype, configs in configurations.items()
    ]
    stats["ilp_rows"] = ilp.family_counts()
    stats["ilp_variables"] = len(ilp.variables)
    solution = solve_ilp(ilp, limits.epas_max_ilp_nodes)
    if solution is None:
        return None, stats
    schedule = reconstruct_schedule(instance, simplified, ilp, solution)
    length = makespan(instance, schedule)
    stats["makespan"] = format_fraction(length)
    if length > simplified.slack * T:
        log.debug(f"Rebuilt makespan {length} is beyond the slack of {T}")
        return None, stats
    return schedule, stats


def _lower_bound(instance):
    speeds = instance.speeds
    longest = max(task.p for task in instance.tasks)
    total = sum(task.p for task in instance.tasks)
    path = (instance.p_src + longest + instance.p_sink) / max(speeds)
    volume = (instance.p_src + total + instance.p_sink) / sum(speeds)
    return max(path, volume)


def epas_solve(instance, epsilon, limits=None):
    """Approximation scheme for ungrouped instances.

    Bounds `T` are taken from a geometric grid between a lower bound and
    the serial makespan and searched for the smallest one some source and
    sink choice passes. The shortest schedule rebuilt on the way is kept;
    the serial schedule is returned when it is shorter or no probe passes.

    Args:
        instance (ForkJoinInstance): Instance without processor groups.
        epsilon (Fraction): Accuracy in (0, 1/2], snapped down to `1/k`.
        limits (Optional[SolverLimits]): Search caps.

    Returns:
        SolveReport: Report with a ratio guarantee.

    Raises:
        PreconditionError: Processor groups given or accuracy out of range.
        LimitExceededError: A configuration or ILP cap was exceeded.

    """
    if instance.groups is not None:
        raise PreconditionError(
            "Approximation scheme does not support processor groups")
    limits = limits or SolverLimits()
    epsilon = snap_epsilon(epsilon)
    guarantee = Guarantee(GuaranteeKind.RATIO, ratio_bound(epsilon))
    serial = serial_schedule(instance)
    upper = makespan(instance, serial)
    details = {"epsilon": epsilon, "fallback": False}
    if not instance.tasks:
        details["T"] = upper
        details["probes"] = 0
        return make_report(instance, serial, "epas", guarantee, details)

    grid = []
    T = _lower_bound(instance)
    while T < upper:
        grid.append(T)
        T *= 1 + epsilon
    grid.append(T)

    best = []

    def probe(T):
        passed = None
        for m_src, m_sink in role_pairs(instance):
            schedule, stats = epas_probe(
                instance, T, epsilon, m_src, m_sink, limits)
            if schedule is None:
                continue
            length = makespan(instance, schedule)
            if passed is None or length < passed[0]:
                passed = (length, schedule, stats)
        if passed is not None and (not best or passed[0] < best[0][0]):
            best[:] = [passed]
        return passed

    value, witness, trace = min_feasible(grid, probe)
    details["T"] = value
    details["probes"] = len(trace)
    if witness is None:
        log.warning("No bound accepted, falling back to the serial schedule")
        details["fallback"] = True
        return make_report(instance, serial, "epas", guarantee, details)

    length, schedule, stats = best[0]
    details["stats"] = stats
    if length > upper:
        log.info("Serial schedule is shorter than the scheme's result")
        details["fallback"] = True
        schedule = serial
    return make_report(instance, schedule, "epas", guarantee, details)
