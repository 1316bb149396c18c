"""Equal-cost scheduling through slot grids and bipartite matching.

Start times on processor `m` are restricted to a grid of width `p / s_m`
that begins at the source finish on the source processor and at 0
elsewhere. For a bound `T` every task is connected to the grid slots it can
use, and a matching that covers all tasks is a schedule of length at most
`T`. The smallest such `T` is at most the optimum plus one slot of the
slowest processor.
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import networkx as nx

from .model import (
    Guarantee,
    GuaranteeKind,
    canonicalize,
    make_report,
    makespan,
    serial_schedule,
)
from .search import min_feasible, require_equal_costs, role_pairs

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Slot:
    proc: int
    index: int
    start: Fraction


@dataclass(frozen=True)
class SlotGraph:
    """Tasks, grid slots and the viable task to slot edges for bound `T`.

    Attributes:
        T (Fraction): Makespan bound.
        m_src (int): Source processor.
        m_sink (int): Sink processor.
        tasks (tuple[str, ...]): Task ids, one node each.
        slots (tuple[Slot, ...]): Slots kept after elision.
        edges (dict[str, tuple[int, ...]]): Slot positions per task.

    """

    T: Fraction
    m_src: int
    m_sink: int
    tasks: tuple
    slots: tuple
    edges: dict = field(default_factory=dict)


def _grid(instance, m, m_src, p):
    offset = instance.source_time(m_src) if m == m_src else Fraction(0)
    return offset, p / instance.speeds[m]


def first_slot(instance, task, m, m_src, p):
    """Index of the first grid slot on `m` that `task` may start in."""
    offset, step = _grid(instance, m, m_src, p)
    release = instance.release(task, m, m_src)
    return max(0, math.ceil((release - offset) / step))


def build_slot_graph(instance, T, m_src, m_sink):
    """Connect each task to its viable slots under bound `T`.

    A slot is viable for a task when the task is released by the slot start
    and its result reaches the sink processor in time for the sink to finish
    by `T`. Per processor only the first `n` viable slots of every task are
    kept; a task matched further right can always move into one of them.

    Args:
        instance (ForkJoinInstance): Instance with equal branch costs.
        T (Fraction): Makespan bound.
        m_src (int): Source processor.
        m_sink (int): Sink processor.

    Returns:
        SlotGraph: Graph for the bound.

    Raises:
        PreconditionError: Branch costs differ.

    """
    p = require_equal_costs(instance)
    n = len(instance.tasks)
    slot_pos = {}
    slots = []
    edges = {}
    deadline = T - instance.sink_time(m_sink)
    for task in instance.tasks:
        viable = []
        for m in range(instance.n_procs):
            offset, step = _grid(instance, m, m_src, p)
            out = instance.out_delay(task, m, m_sink)
            first = first_slot(instance, task, m, m_src, p)
            last = math.floor((deadline - out - offset) / step) - 1
            for index in range(first, min(last, first + n - 1) + 1):
                key = (m, index)
                if key not in slot_pos:
                    slot_pos[key] = len(slots)
                    slots.append(Slot(m, index, offset + index * step))
                viable.append(slot_pos[key])
        edges[task.id] = tuple(viable)
    return SlotGraph(
        T=T,
        m_src=m_src,
        m_sink=m_sink,
        tasks=instance.task_ids,
        slots=tuple(slots),
        edges=edges,
    )


def bipartite_matching(left, edges):
    """Maximum cardinality matching of a bipartite graph.

    Args:
        left (Iterable[Hashable]): Left nodes.
        edges (Mapping[Hashable, Iterable[Hashable]]): Right neighbours of
            every left node.

    Returns:
        dict: Matched right node per matched left node.

    """
    graph = nx.Graph()
    top = [("u", node) for node in left]
    graph.add_nodes_from(top)
    for node in left:
        for other in edges.get(node, ()):
            graph.add_edge(("u", node), ("v", other))
    matched = nx.bipartite.hopcroft_karp_matching(graph, top_nodes=top)
    return {
        node: matched[("u", node)][1]
        for node in left
        if ("u", node) in matched
    }


def max_matching(graph):
    """Matched slot position per task of a slot graph."""
    return bipartite_matching(graph.tasks, graph.edges)


def schedule_from_matching(instance, graph, matching):
    """Left-shifted schedule that keeps the slot order per processor."""
    per_proc = [[] for _ in range(instance.n_procs)]
    for task_id, pos in matching.items():
        slot = graph.slots[pos]
        per_proc[slot.proc].append((slot.index, task_id))
    order = [
        tuple(task_id for _, task_id in sorted(items))
        for items in per_proc
    ]
    return canonicalize(instance, graph.m_src, graph.m_sink, order)


def candidate_bounds(instance, m_src, m_sink):
    """Every makespan a grid schedule can have for the given roles."""
    p = require_equal_costs(instance)
    n = len(instance.tasks)
    sink_time = instance.sink_time(m_sink)
    values = {instance.source_time(m_src) + sink_time}
    for m in range(instance.n_procs):
        offset, step = _grid(instance, m, m_src, p)
        for task in instance.tasks:
            first = first_slot(instance, task, m, m_src, p)
            out = instance.out_delay(task, m, m_sink)
            for index in range(first, first + n):
                values.add(offset + (index + 1) * step + out + sink_time)
    return sorted(values)


def matching_schedule(instance, T, m_src, m_sink):
    """Schedule of length at most `T` from a covering matching, or None."""
    graph = build_slot_graph(instance, T, m_src, m_sink)
    matching = max_matching(graph)
    if len(matching) < len(graph.tasks):
        return None
    return schedule_from_matching(instance, graph, matching)


def solve_matching_approx(instance, roles=None):
    """Grid schedule with the smallest bound over all source/sink roles.

    Args:
        instance (ForkJoinInstance): Instance with equal branch costs.
        roles (Iterable[tuple[int, int]], optional): Role pairs to try,
            all kinds by default.

    Returns:
        SolveReport: Schedule within `p / s_min` of the optimum.

    """
    p = require_equal_costs(instance)
    if p is None:
        return make_report(
            instance, serial_schedule(instance), "bipartite",
            Guarantee(GuaranteeKind.EXACT), {"t_star": None, "probes": 0},
        )

    best = None
    t_star = None
    trace = []
    for m_src, m_sink in roles or role_pairs(instance):
        value, schedule, probes = min_feasible(
            candidate_bounds(instance, m_src, m_sink),
            lambda T: matching_schedule(instance, T, m_src, m_sink),
        )
        trace.extend(
            {"m_src": m_src, "m_sink": m_sink, "T": T, "feasible": ok}
            for T, ok in probes
        )
        if schedule is None:
            continue
        if t_star is None or value < t_star:
            t_star = value
        length = makespan(instance, schedule)
        if best is None or length < best[0]:
            best = (length, schedule)

    log.info(f"Bipartite grid bound {t_star}, makespan {best[0]}")
    bound = p / min(instance.speeds)
    return make_report(
        instance,
        best[1],
        "bipartite",
        Guarantee(GuaranteeKind.ADDITIVE, bound),
        {"t_star": t_star, "probes": len(trace), "trace": trace},
    )
