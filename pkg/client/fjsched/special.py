"""Algorithms for special cases with equal branch costs.

Two processors and an unlimited number of fast processors are solved
exactly, equal incoming communications and two processor groups are
handled by greedy rules.
"""
import logging
from fractions import Fraction

from .errors import PreconditionError
from .matching import solve_matching_approx
from .model import (
    Guarantee,
    GuaranteeKind,
    canonicalize,
    make_report,
    makespan,
    serial_schedule,
)
from .rtd import forkjoin_to_rtd, max_throughput_equal_length
from .search import min_feasible, require_equal_costs, role_pairs

log = logging.getLogger(__name__)

EXACT = Guarantee(GuaranteeKind.EXACT)


def _require_two_processors(instance):
    if instance.n_procs != 2:
        raise PreconditionError(
            f"Exactly 2 processors required, got {instance.n_procs}")
    groups = instance.groups
    if groups is not None and groups[0] == groups[1]:
        raise PreconditionError(
            "Both processors share a group, communications never apply")
    return require_equal_costs(instance)


def _ungrouped(instance, name):
    if instance.groups is not None:
        raise PreconditionError(f"{name} does not support processor groups")


# --- source and sink on the same processor ---------------------------------

def _sched1_order(instance, T, local, remote, p):
    """Processor orders for bound `T`, or None.

    The remote processor takes a largest set of tasks that meets its
    release times and deadlines; the rest run on the local processor
    between source and sink, where no communications apply.
    """
    rtd = forkjoin_to_rtd(instance, T, local, local)
    selected, remote_order = max_throughput_equal_length(
        [(task.id, task.r, task.d) for task in rtd.tasks],
        p,
        instance.speeds[remote],
    )
    rejected = sorted(set(instance.task_ids) - set(selected))
    deadline = T - instance.sink_time(local)
    local_finish = (
        instance.source_time(local)
        + len(rejected) * p / instance.speeds[local]
    )
    if local_finish > deadline:
        return None
    order = [(), ()]
    order[local] = tuple(rejected)
    order[remote] = tuple(task_id for task_id, _ in remote_order)
    return order


def _sched1_candidates(instance, local, remote, p):
    src_finish = instance.source_time(local)
    sink_time = instance.sink_time(local)
    n = len(instance.tasks)
    values = {
        src_finish + k * p / instance.speeds[local] + sink_time
        for k in range(n + 1)
    }
    step = p / instance.speeds[remote]
    for start_task in instance.tasks:
        release = src_finish + start_task.gamma_in
        for count in range(1, n + 1):
            for last in instance.tasks:
                values.add(
                    release + count * step + last.gamma_out + sink_time)
    return values


def p2_sched1(instance, local=0):
    """Two processors, source and sink both on `local`.

    Args:
        instance (ForkJoinInstance): Two processors, equal branch costs.
        local (int): Processor of source and sink.

    Returns:
        SolveReport: Optimal schedule for these roles.

    """
    p = _require_two_processors(instance)
    remote = 1 - local
    if p is None:
        schedule = canonicalize(instance, local, local, [(), ()])
        return make_report(instance, schedule, "q2-sched1", EXACT)
    value, order, _ = min_feasible(
        _sched1_candidates(instance, local, remote, p),
        lambda T: _sched1_order(instance, T, local, remote, p),
    )
    schedule = canonicalize(instance, local, local, order)
    return make_report(instance, schedule, "q2-sched1", EXACT, {"T": value})


# --- source and sink on different processors -------------------------------

def _sched2_split(instance, T, p1, p2, tasks):
    """Split `tasks` between source processor `p1` and sink processor `p2`.

    Tasks are taken by non-increasing outgoing communication; each goes to
    the sink processor when its tasks still finish by the sink start bound,
    otherwise it is appended to the source processor.

    Returns:
        Optional[tuple[list[str], list[str]]]: Task ids on `p1` in order and
            on `p2` in order, None when `T` is infeasible.

    """
    deadline = T - instance.sink_time(p2)
    src_finish = instance.source_time(p1)
    step1 = instance.exec_time(tasks[0], p1) if tasks else Fraction(0)
    on_sink = []
    on_source = []
    for task in sorted(tasks, key=lambda item: (-item.gamma_out, item.id)):
        candidate = sorted(
            on_sink + [task],
            key=lambda item: (instance.release(item, p2, p1), item.id),
        )
        time = Fraction(0)
        for item in candidate:
            time = max(time, instance.release(item, p2, p1))
            time += instance.exec_time(item, p2)
        if time <= deadline:
            on_sink = candidate
        else:
            on_source.append(task)

    for position, task in enumerate(on_source, start=1):
        arrival = (
            src_finish + position * step1
            + instance.out_delay(task, p1, p2)
        )
        if arrival > deadline:
            return None
    return (
        [task.id for task in on_source],
        [task.id for task in on_sink],
    )


def _sched2_candidates(instance, p1, p2, tasks, p):
    src_finish = instance.source_time(p1)
    sink_time = instance.sink_time(p2)
    n = len(tasks)
    step1 = p / instance.speeds[p1]
    step2 = p / instance.speeds[p2]
    values = {src_finish + sink_time}
    for task in tasks:
        for count in range(1, n + 1):
            values.add(
                src_finish + count * step1
                + instance.out_delay(task, p1, p2) + sink_time)
            values.add(
                instance.release(task, p2, p1) + count * step2 + sink_time)
    return values


def p2_sched2(instance, src=0, sink=1):
    """Two processors, source on `src` and sink on `sink`.

    Returns:
        SolveReport: Optimal schedule for these roles.

    """
    p = _require_two_processors(instance)
    if src == sink:
        raise PreconditionError(
            "Source and sink must use different processors")
    tasks = list(instance.tasks)

    def probe(T):
        split = _sched2_split(instance, T, src, sink, tasks)
        if split is None:
            return None
        order = [(), ()]
        order[src], order[sink] = tuple(split[0]), tuple(split[1])
        return order

    if p is None:
        order = [(), ()]
        value = instance.source_time(src) + instance.sink_time(sink)
    else:
        value, order, _ = min_feasible(
            _sched2_candidates(instance, src, sink, tasks, p), probe)
    schedule = canonicalize(instance, src, sink, order)
    return make_report(instance, schedule, "q2-sched2", EXACT, {"T": value})


def solve_q2(instance):
    """Optimal schedule on two uniformly related processors.

    Every role combination is solved exactly and the best one is kept.
    """
    _require_two_processors(instance)
    reports = [
        p2_sched1(instance, 0),
        p2_sched1(instance, 1),
        p2_sched2(instance, 0, 1),
        p2_sched2(instance, 1, 0),
    ]
    best = min(reports, key=lambda report: report.makespan)
    log.info(f"Q2 optimum {best.makespan} via {best.algorithm}")
    return make_report(
        instance, best.schedule, "q2", EXACT, {"case": best.algorithm})


# --- unlimited fast processors ---------------------------------------------

def _qinf_remote_processors(instance, m_src, m_sink):
    """Processors not hosting the source or sink, fastest first."""
    return sorted(
        (m for m in range(instance.n_procs) if m not in (m_src, m_sink)),
        key=lambda m: (-instance.speeds[m], m),
    )


def _qinf_order(instance, T, m_src, m_sink, p, remote):
    """Processor sequences meeting `T`, or None.

    Tasks are taken by increasing remote slack: each takes the fastest
    remote processor left if its path through it meets `T`, and stays on
    the source or sink processor otherwise.
    """
    src_finish = instance.source_time(m_src)
    sink_time = instance.sink_time(m_sink)
    order = [() for _ in range(instance.n_procs)]
    local = []
    free = iter(remote)
    m = next(free, None)
    for task in sorted(
            instance.tasks,
            key=lambda item: (-(item.gamma_in + item.gamma_out), item.id)):
        slack = T - src_finish - task.gamma_in - task.gamma_out - sink_time
        if m is not None and p / instance.speeds[m] <= slack:
            order[m] = (task.id,)
            m = next(free, None)
        else:
            local.append(task)

    if m_src == m_sink:
        finish = src_finish + len(local) * p / instance.speeds[m_src]
        if finish + sink_time > T:
            return None
        order[m_src] = tuple(sorted(task.id for task in local))
    else:
        split = _sched2_split(instance, T, m_src, m_sink, local)
        if split is None:
            return None
        order[m_src], order[m_sink] = tuple(split[0]), tuple(split[1])
    return order


def _qinf_candidates(instance, m_src, m_sink, p, remote):
    src_finish = instance.source_time(m_src)
    sink_time = instance.sink_time(m_sink)
    values = {
        src_finish + task.gamma_in + p / speed + task.gamma_out + sink_time
        for task in instance.tasks
        for speed in {instance.speeds[m] for m in remote}
    }
    if m_src == m_sink:
        step = p / instance.speeds[m_src]
        values.update(
            src_finish + k * step + sink_time
            for k in range(len(instance.tasks) + 1)
        )
    else:
        values.update(_sched2_candidates(
            instance, m_src, m_sink, list(instance.tasks), p))
    return values


def solve_q_inf(instance):
    """Schedule when there are more processors than branch tasks.

    Every task either runs alone on a processor that hosts neither the
    source nor the sink, or stays on one of those two. Remote processors
    are handed out fastest first to the tasks with the least slack. The
    result is optimal when at least `|J|` of the remote processors share
    the fastest speed, which holds for every role choice when `|J| + 2`
    processors do; only then does the report carry an exactness guarantee.

    Raises:
        PreconditionError: Fewer than `|J| + 2` processors, unequal costs
            or processor groups.

    """
    _ungrouped(instance, "Q-infinity solver")
    p = require_equal_costs(instance)
    n_tasks = len(instance.tasks)
    if instance.n_procs < n_tasks + 2:
        raise PreconditionError(
            f"{instance.n_procs} processors, at least {n_tasks + 2} required")
    if p is None:
        return make_report(instance, serial_schedule(instance), "qinf", EXACT)
    fastest = max(instance.speeds)
    n_fast = sum(1 for speed in instance.speeds if speed == fastest)
    guarantee = EXACT if n_fast >= n_tasks + 2 else None
    if guarantee is None:
        log.info(
            f"{n_fast} fastest processors for {n_tasks} tasks,"
            " result is not certified optimal")

    best = None
    for m_src, m_sink in role_pairs(instance):
        remote = _qinf_remote_processors(instance, m_src, m_sink)
        value, order, _ = min_feasible(
            _qinf_candidates(instance, m_src, m_sink, p, remote),
            lambda T: _qinf_order(instance, T, m_src, m_sink, p, remote),
        )
        if order is None:
            continue
        schedule = canonicalize(instance, m_src, m_sink, order)
        length = makespan(instance, schedule)
        if best is None or length < best[0]:
            best = (length, schedule)
    return make_report(
        instance, best[1], "qinf", guarantee, {"fastest_processors": n_fast})


# --- equal incoming communications -----------------------------------------

def _list_schedule(instance, m_src, m_sink, first, rest):
    """Sink processor gets `first`, then earliest-arrival list scheduling."""
    src_finish = instance.source_time(m_src)
    free = [
        src_finish if m == m_src else Fraction(0)
        for m in range(instance.n_procs)
    ]
    order = [[] for _ in range(instance.n_procs)]

    def place(task, m):
        start = max(free[m], instance.release(task, m, m_src))
        free[m] = start + instance.exec_time(task, m)
        order[m].append(task.id)

    for task in first:
        place(task, m_sink)
    for task in rest:
        def arrival(m):
            start = max(free[m], instance.release(task, m, m_src))
            return (
                start + instance.exec_time(task, m)
                + instance.out_delay(task, m, m_sink)
            )

        m = min(
            range(instance.n_procs),
            key=lambda idx: (arrival(idx), idx, -instance.speeds[idx]),
        )
        place(task, m)
    return canonicalize(instance, m_src, m_sink, order)


def solve_partial_equal(instance):
    """Greedy for equal incoming communications.

    For every role pair and every `k`, the `k` tasks with the largest
    outgoing communication fill the sink processor first and the rest are
    list scheduled by earliest arrival at the sink.
    """
    _ungrouped(instance, "Equal incoming communication solver")
    require_equal_costs(instance)
    if len({task.gamma_in for task in instance.tasks}) > 1:
        raise PreconditionError(
            "All incoming communications must be equal")

    tasks = sorted(instance.tasks, key=lambda task: (-task.gamma_out, task.id))
    best = None
    for m_src, m_sink in role_pairs(instance):
        for k in range(len(tasks) + 1):
            schedule = _list_schedule(
                instance, m_src, m_sink, tasks[:k], tasks[k:])
            length = makespan(instance, schedule)
            if best is None or length < best[0]:
                best = (length, schedule, k)
    return make_report(
        instance, best[1], "partial-equal", None, {"local_fill": best[2]})


# --- two processor groups --------------------------------------------------

def _pool_order(instance, T, m_src, m_sink):
    """Greedy over group pools, tasks by non-increasing outgoing cost."""
    groups = instance.groups
    sink_pool = [
        m for m in range(instance.n_procs) if groups[m] == groups[m_sink]]
    source_pool = [
        m for m in range(instance.n_procs) if groups[m] == groups[m_src]]
    deadline = T - instance.sink_time(m_sink)
    src_finish = instance.source_time(m_src)
    free = {
        m: src_finish if m == m_src else Fraction(0)
        for m in range(instance.n_procs)
    }
    order = [[] for _ in range(instance.n_procs)]

    def finish_on(task, m):
        start = max(free[m], instance.release(task, m, m_src))
        return start + instance.exec_time(task, m)

    for task in sorted(
            instance.tasks, key=lambda item: (-item.gamma_out, item.id)):
        fitting = [
            (finish_on(task, m), m) for m in sink_pool
            if finish_on(task, m) <= deadline
        ]
        if fitting:
            finish, m = min(fitting)
        else:
            _, m = min(
                (finish_on(task, m) + instance.out_delay(task, m, m_sink), m)
                for m in source_pool
            )
            finish = finish_on(task, m)
        free[m] = finish
        order[m].append(task.id)
    schedule = canonicalize(instance, m_src, m_sink, order)
    if makespan(instance, schedule) > T:
        return None
    return schedule


def _pool_candidates(instance, m_src, m_sink, p):
    src_finish = instance.source_time(m_src)
    sink_time = instance.sink_time(m_sink)
    n = len(instance.tasks)
    values = {src_finish + sink_time}
    for m in range(instance.n_procs):
        step = p / instance.speeds[m]
        for task in instance.tasks:
            release = instance.release(task, m, m_src)
            out = instance.out_delay(task, m, m_sink)
            for count in range(1, n + 1):
                values.add(max(release, src_finish) + count * step + out
                           + sink_time)
    return sorted(values)


def solve_grouped(instance):
    """Two processor groups without communications inside a group.

    Two singleton groups are the two processor case and solved exactly.
    Otherwise the group-aware slot matching is combined with a pool greedy
    for source and sink in different groups, so the result keeps the
    matching's additive bound.
    """
    if instance.groups is None or len(set(instance.groups)) != 2:
        raise PreconditionError("Exactly two processor groups are required")
    p = require_equal_costs(instance)
    if instance.n_procs == 2:
        report = solve_q2(instance)
        return make_report(
            instance, report.schedule, "grouped", EXACT, {"case": "q2"})

    best = solve_matching_approx(instance)
    case = "bipartite"
    best_value = best.makespan
    best_schedule = best.schedule
    if p is not None:
        for m_src, m_sink in role_pairs(instance):
            if instance.same_group(m_src, m_sink):
                continue
            for T in _pool_candidates(instance, m_src, m_sink, p):
                if T >= best_value:
                    break
                schedule = _pool_order(instance, T, m_src, m_sink)
                if schedule is None:
                    continue
                best_value = makespan(instance, schedule)
                best_schedule = schedule
                case = "pool"
                break
    guarantee = EXACT
    if p is not None:
        guarantee = Guarantee(
            GuaranteeKind.ADDITIVE, p / min(instance.speeds))
    return make_report(
        instance, best_schedule, "grouped", guarantee, {"case": case})
