"""Helpers shared by the solvers: role enumeration and bound search."""
import logging

from .errors import PreconditionError

log = logging.getLogger(__name__)


def processor_kinds(instance):
    """Processors grouped by (speed, group), in index order.

    Returns:
        dict[tuple, list[int]]: Processor indexes per kind.

    """
    kinds = {}
    for m, speed in enumerate(instance.speeds):
        group = None if instance.groups is None else instance.groups[m]
        kinds.setdefault((speed, group), []).append(m)
    return kinds


def role_pairs(instance):
    """One representative (m_src, m_sink) per combination of kinds.

    Processors of the same speed and group are interchangeable, so only
    the kinds of the source and sink processors matter, plus whether they
    are the same processor.

    Returns:
        list[tuple[int, int]]: Role pairs.

    """
    members = list(processor_kinds(instance).values())
    pairs = []
    for src_members in members:
        for sink_members in members:
            if src_members is sink_members:
                pairs.append((src_members[0], src_members[0]))
                if len(src_members) > 1:
                    pairs.append((src_members[0], src_members[1]))
            else:
                pairs.append((src_members[0], sink_members[0]))
    return pairs


def require_equal_costs(instance):
    """Common branch cost, None for an instance without branch tasks."""
    if not instance.tasks:
        return None
    cost = instance.common_cost()
    if cost is None:
        raise PreconditionError("All branch tasks must have the same cost")
    return cost


def min_feasible(candidates, probe):
    """Binary search for the smallest candidate accepted by `probe`.

    Feasibility must be monotone over the candidates.

    Args:
        candidates (Iterable[Fraction]): Bound values.
        probe (Callable[[Fraction], Any]): Returns None when the bound is
            infeasible, otherwise a witness.

    Returns:
        tuple[Optional[Fraction], Any, list[tuple[Fraction, bool]]]: Smallest
            feasible value, its witness and the probe trace.

    """
    values = sorted(set(candidates))
    trace = []
    low, high = 0, len(values) - 1
    found = (None, None)
    while low <= high:
        mid = (low + high) // 2
        witness = probe(values[mid])
        trace.append((values[mid], witness is not None))
        if witness is None:
            low = mid + 1
        else:
            found = (values[mid], witness)
            high = mid - 1
    log.debug(f"{len(trace)} probes over {len(values)} candidates")
    return found[0], found[1], trace
