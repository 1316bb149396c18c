"""Exhaustive exact solver for small instances.

`exact_solve` is the reference every other solver is measured against.
`naive_solve` enumerates the same space without any pruning and exists only
to cross-check it.
"""
import itertools
import logging

from .errors import LimitExceededError
from .model import (
    Guarantee,
    GuaranteeKind,
    best_order_key,
    canonicalize,
    make_report,
    makespan,
    processor_timeline,
    serial_schedule,
)
from .search import role_pairs
from .settings import SolverLimits

log = logging.getLogger(__name__)

EXACT = Guarantee(GuaranteeKind.EXACT)


class _RoleSearch:
    """Branch and bound over task assignments for fixed source and sink."""

    def __init__(self, instance, m_src, m_sink, incumbent, counter, limits):
        self.instance = instance
        self.m_src = m_src
        self.m_sink = m_sink
        self.incumbent = incumbent
        self.counter = counter
        self.limits = limits
        self.src_finish = instance.source_time(m_src)
        self.sink_time = instance.sink_time(m_sink)
        # widest tasks first, they cut the tree early
        self.tasks = sorted(
            instance.tasks,
            key=lambda task: (
                -task.p, -task.gamma_in - task.gamma_out, task.id),
        )
        self.classes = [self._class_key(m) for m in range(instance.n_procs)]
        self.cache = {}

    def _class_key(self, m):
        group = None if self.instance.groups is None else (
            self.instance.groups[m])
        return (
            self.instance.speeds[m], group, m == self.m_src, m == self.m_sink)

    def _tick(self):
        self.counter["states"] += 1
        if self.counter["states"] > self.limits.oracle_max_states:
            raise LimitExceededError(
                "oracle_max_states", self.limits.oracle_max_states)

    def best_on(self, m, task_ids):
        """Earliest latest-arrival and its order for a task set on `m`."""
        key = (self.classes[m], task_ids)
        cached = self.cache.get(key)
        if cached is not None:
            return cached
        instance = self.instance
        order = best_order_key(instance, m, self.m_src, self.m_sink, task_ids)
        if order is not None:
            candidates = [order]
        else:
            candidates = itertools.permutations(sorted(task_ids))
        best = None
        for candidate in candidates:
            self._tick()
            _, arrival = processor_timeline(
                instance, m, self.m_src, self.m_sink, candidate)
            if best is None or arrival < best[0]:
                best = (arrival, tuple(candidate))
        self.cache[key] = best
        return best

    def bound(self, assignment):
        latest = self.src_finish
        for m, task_ids in enumerate(assignment):
            if task_ids:
                latest = max(latest, self.best_on(m, task_ids)[0])
        return latest + self.sink_time

    def run(self, assignment, idx):
        self._tick()
        value = self.bound(assignment)
        if value >= self.incumbent["value"]:
            return
        if idx == len(self.tasks):
            order = [
                self.best_on(m, task_ids)[1] if task_ids else ()
                for m, task_ids in enumerate(assignment)
            ]
            self.incumbent["value"] = value
            self.incumbent["schedule"] = canonicalize(
                self.instance, self.m_src, self.m_sink, order)
            return

        task_id = self.tasks[idx].id
        opened = set()
        for m in range(self.instance.n_procs):
            if not assignment[m]:
                if self.classes[m] in opened:
                    continue
                opened.add(self.classes[m])
            previous = assignment[m]
            assignment[m] = previous | {task_id}
            self.run(assignment, idx + 1)
            assignment[m] = previous


def exact_solve(instance, limits=None):
    """Minimum makespan schedule by exhaustive search.

    The search covers every source and sink choice, assignment and
    per-processor order. It prunes on the incumbent, skips processors that
    are interchangeable with an already tried empty one and, where an
    exchange argument fixes the best order of a task set on a processor,
    evaluates only that order.

    Args:
        instance (ForkJoinInstance): Instance to solve.
        limits (SolverLimits, optional): Task and node caps.

    Returns:
        SolveReport: Optimal schedule with an exact guarantee.

    Raises:
        LimitExceededError: Instance too large or node cap reached.

    """
    limits = limits or SolverLimits()
    if len(instance.tasks) > limits.oracle_max_tasks:
        raise LimitExceededError("oracle_max_tasks", limits.oracle_max_tasks)

    fallback = serial_schedule(instance)
    incumbent = {
        "value": makespan(instance, fallback),
        "schedule": fallback,
    }
    counter = {"states": 0}
    for m_src, m_sink in role_pairs(instance):
        search = _RoleSearch(
            instance, m_src, m_sink, incumbent, counter, limits)
        search.run([frozenset() for _ in range(instance.n_procs)], 0)

    log.debug(
        f"Oracle makespan {incumbent['value']}"
        f" after {counter['states']} states")
    return make_report(
        instance,
        incumbent["schedule"],
        "oracle",
        EXACT,
        {"states": counter["states"]},
    )


def naive_solve(instance):
    """Plain enumeration of all schedules, no pruning and no symmetry."""
    n_procs = instance.n_procs
    task_ids = instance.task_ids
    best = None
    for m_src, m_sink in itertools.product(range(n_procs), repeat=2):
        for assignment in itertools.product(
                range(n_procs), repeat=len(task_ids)):
            per_proc = [
                [task_id for task_id, m in zip(task_ids, assignment) if m == p]
                for p in range(n_procs)
            ]
            for order in itertools.product(
                    *(itertools.permutations(ids) for ids in per_proc)):
                schedule = canonicalize(instance, m_src, m_sink, order)
                value = makespan(instance, schedule)
                if best is None or value < best[0]:
                    best = (value, schedule)
    return make_report(instance, best[1], "naive", EXACT)
