"""Release time / deadline view of fork-join scheduling.

For a fixed makespan bound `T` and fixed source and sink processors, every
remotely placed branch task gets a release time (source finish plus its
incoming communication) and a deadline (sink start bound minus its outgoing
communication). The single machine primitives here are used by the two
processor solvers and by the configuration feasibility check.
"""
import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

from .errors import InstanceError, LimitExceededError
from .model import to_fraction

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RtdTask:
    id: str
    p: Fraction
    r: Fraction
    d: Fraction

    def __post_init__(self):
        object.__setattr__(self, "p", to_fraction(self.p, f"{self.id}.p"))
        object.__setattr__(self, "r", to_fraction(self.r, f"{self.id}.r"))
        object.__setattr__(self, "d", to_fraction(self.d, f"{self.id}.d"))
        if self.p <= 0:
            raise InstanceError(f"Task '{self.id}' has non-positive cost")


@dataclass(frozen=True)
class RtdInstance:
    """Independent tasks with release times and deadlines.

    Tasks whose window cannot hold them are representable, the feasibility
    checks reject them.
    """

    tasks: tuple
    speeds: tuple

    def __post_init__(self):
        object.__setattr__(self, "tasks", tuple(self.tasks))
        speeds = tuple(to_fraction(speed, "speed") for speed in self.speeds)
        if not speeds or any(speed <= 0 for speed in speeds):
            raise InstanceError("RTD instance needs positive speeds")
        object.__setattr__(self, "speeds", speeds)


@dataclass(frozen=True)
class RtdReport:
    order: tuple
    start_times: Mapping[str, Fraction] = field(default_factory=dict)
    lmax: Optional[Fraction] = None


def forkjoin_to_rtd(instance, T, m_src, m_sink):
    """Release times and deadlines of all branch tasks under bound `T`.

    Every task is treated as remote: incoming and outgoing communications
    are always charged. Tasks placed on the source or sink processor have
    zeroed communications and are not modelled by the result.

    Args:
        instance (ForkJoinInstance): Fork-join instance.
        T (Fraction): Makespan bound.
        m_src (int): Source processor.
        m_sink (int): Sink processor.

    Returns:
        RtdInstance: Tasks with windows, on all processors of the instance.

    """
    T = to_fraction(T, "T")
    if T <= 0:
        raise InstanceError("Makespan bound must be positive")
    for m in (m_src, m_sink):
        if not 0 <= m < instance.n_procs:
            raise InstanceError(f"Unknown processor index {m!r}")
    src_finish = instance.source_time(m_src)
    sink_bound = T - instance.sink_time(m_sink)
    tasks = tuple(
        RtdTask(
            task.id,
            task.p,
            src_finish + task.gamma_in,
            sink_bound - task.gamma_out,
        )
        for task in instance.tasks
    )
    return RtdInstance(tasks=tasks, speeds=instance.speeds)


class _OrderSearch:
    """Depth-first search for a feasible sequence of job kinds."""

    def __init__(self, kinds, max_states):
        # kinds: (length, release, deadline) sorted by deadline
        self.kinds = kinds
        self.max_states = max_states
        self.states = 0
        self.failed = {}

    def _fits(self, counts, time):
        load = time
        for (length, _, deadline), count in zip(self.kinds, counts):
            if not count:
                continue
            load += length * count
            if load > deadline:
                return False
        return True

    def run(self, counts, time, sequence):
        if not any(counts):
            return True
        seen = self.failed.get(counts)
        if seen is not None and time >= seen:
            return False
        self.states += 1
        if self.max_states is not None and self.states > self.max_states:
            raise LimitExceededError("single machine states", self.max_states)

        starts = [
            max(time, release) if count else None
            for (_, release, _), count in zip(self.kinds, counts)
        ]
        for idx, (length, _, deadline) in enumerate(self.kinds):
            start = starts[idx]
            if start is None or start + length > deadline:
                continue
            # another job fitting completely before this start dominates
            if any(
                other_start is not None
                and other != idx
                and other_start + self.kinds[other][0] <= start
                for other, other_start in enumerate(starts)
            ):
                continue
            finish = start + length
            child = counts[:idx] + (counts[idx] - 1,) + counts[idx + 1:]
            if not self._fits(child, finish):
                continue
            sequence.append((idx, start))
            if self.run(child, finish, sequence):
                return True
            sequence.pop()

        if seen is None or time < seen:
            self.failed[counts] = time
        return False


def find_single_machine_order(jobs, max_states=None):
    """Nonpreemptive order meeting all release times and deadlines.

    Identical jobs are interchangeable and grouped into kinds, so the search
    state is the vector of remaining counts per kind plus the current time.

    Args:
        jobs (Iterable[tuple[Hashable, Fraction, Fraction, Fraction]]): Jobs
            as `(key, length, release, deadline)` in time units.
        max_states (int, optional): Search node cap.

    Returns:
        Optional[list[tuple[Hashable, Fraction]]]: `(key, start)` in
            execution order, or None when no feasible order exists.

    """
    by_kind = {}
    for key, length, release, deadline in jobs:
        by_kind.setdefault((length, release, deadline), []).append(key)
    kinds = sorted(by_kind, key=lambda kind: (kind[2], kind[1], kind[0]))
    search = _OrderSearch(kinds, max_states)
    sequence = []
    counts = tuple(len(by_kind[kind]) for kind in kinds)
    if not search.run(counts, Fraction(0), sequence):
        return None

    pending = {kind: iter(by_kind[kind]) for kind in kinds}
    return [(next(pending[kinds[idx]]), start) for idx, start in sequence]


def feasible_equal_length(tasks, p, s):
    """Single machine feasibility for tasks sharing one processing cost.

    Args:
        tasks (Iterable[tuple[str, Fraction, Fraction]]): `(id, r, d)`.
        p (Fraction): Common processing cost.
        s (Fraction): Machine speed.

    Returns:
        Optional[list[tuple[str, Fraction]]]: `(id, start)` in execution
            order, or None when infeasible.

    """
    length = Fraction(p) / Fraction(s)
    jobs = sorted(
        (task_id, length, Fraction(r), Fraction(d))
        for task_id, r, d in tasks
    )
    return find_single_machine_order(jobs)


def max_throughput_equal_length(tasks, p, s):
    """Largest subset of equal-cost tasks that fits on one machine.

    Among subsets of maximum size the one with the lexicographically
    smallest sorted id tuple is returned.

    Returns:
        tuple[tuple[str, ...], list[tuple[str, Fraction]]]: Selected ids
            (sorted) and their `(id, start)` order.

    """
    tasks = sorted(
        ((task_id, Fraction(r), Fraction(d)) for task_id, r, d in tasks),
        key=lambda item: (item[2], item[1], item[0]),
    )
    best = {"key": None, "order": []}

    def visit(idx, selected, order):
        remaining = len(tasks) - idx
        best_key = best["key"]
        if best_key is not None and len(selected) + remaining < -best_key[0]:
            return
        if idx == len(tasks):
            key = (-len(selected), tuple(sorted(selected)))
            if best_key is None or key < best_key:
                best["key"] = key
                best["order"] = order
            return
        task = tasks[idx]
        chosen = [item for item in tasks[:idx] if item[0] in selected]
        extended = feasible_equal_length(chosen + [task], p, s)
        if extended is not None:
            visit(idx + 1, selected | {task[0]}, extended)
        visit(idx + 1, selected, order)

    visit(0, frozenset(), [])
    return best["key"][1], best["order"]


def _lateness_on_machine(tasks, speed, order):
    time = Fraction(0)
    starts = []
    lmax = None
    for task in order:
        start = max(time, task.r)
        time = start + task.p / speed
        starts.append(start)
        lateness = time - task.d
        if lmax is None or lateness > lmax:
            lmax = lateness
    return starts, lmax


def rtd_lmax_solve(rtd, max_states=10 ** 6):
    """Minimum maximum lateness schedule by exhaustive search.

    Machines of equal speed are interchangeable, so assignments only ever
    open the first unused machine of each speed.

    Args:
        rtd (RtdInstance): Instance to solve.
        max_states (int): Cap on evaluated machine orders.

    Returns:
        RtdReport: Optimal schedule; `lmax` is None without tasks.

    Raises:
        LimitExceededError: Cap reached before the search finished.

    """
    tasks = rtd.tasks
    n_machines = len(rtd.speeds)
    if not tasks:
        return RtdReport(order=tuple(() for _ in range(n_machines)))

    counter = {"states": 0}
    memo = {}

    def machine_best(m, ids):
        key = (rtd.speeds[m], ids)
        if key in memo:
            return memo[key]
        best = None
        members = [task for task in tasks if task.id in ids]
        for perm in itertools.permutations(members):
            counter["states"] += 1
            if counter["states"] > max_states:
                raise LimitExceededError("rtd_max_states", max_states)
            starts, lmax = _lateness_on_machine(members, rtd.speeds[m], perm)
            if best is None or lmax < best[0]:
                best = (lmax, tuple(task.id for task in perm), starts)
        memo[key] = best
        return best

    incumbent = {"value": None, "assignment": None}
    assignment = [frozenset() for _ in range(n_machines)]

    def visit(idx):
        current = None
        for m, ids in enumerate(assignment):
            if ids:
                lmax = machine_best(m, ids)[0]
                if current is None or lmax > current:
                    current = lmax
        best = incumbent["value"]
        if best is not None and current is not None and current >= best:
            return
        if idx == len(tasks):
            incumbent["value"] = current
            incumbent["assignment"] = list(assignment)
            return
        opened = set()
        for m in range(n_machines):
            if not assignment[m]:
                if rtd.speeds[m] in opened:
                    continue
                opened.add(rtd.speeds[m])
            previous = assignment[m]
            assignment[m] = previous | {tasks[idx].id}
            visit(idx + 1)
            assignment[m] = previous

    visit(0)
    order = []
    start_times = {}
    for m, ids in enumerate(incumbent["assignment"]):
        if not ids:
            order.append(())
            continue
        _, ids_order, starts = machine_best(m, ids)
        order.append(ids_order)
        start_times.update(zip(ids_order, starts))
    log.debug(
        f"L_max {incumbent['value']} after {counter['states']} orders")
    return RtdReport(
        order=tuple(order),
        start_times=start_times,
        lmax=incumbent["value"],
    )
