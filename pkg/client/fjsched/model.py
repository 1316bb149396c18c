"""Fork-join instances, schedules and their evaluation.

All times are exact `Fraction` values. A schedule is defined by the source
and sink processors and a total order of branch tasks per processor; start
times are always derived from that order by `canonicalize` (tasks start as
early as possible given their order).
"""
import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Optional, Sequence

from .errors import InstanceError

ZERO = Fraction(0)


def to_fraction(value, name="value"):
    """Convert an exact number to `Fraction`.

    Floats are refused, they would silently lose exactness.

    Args:
        value (Union[int, str, Fraction]): Value to convert.
        name (str): Name used in the error message.

    Returns:
        Fraction: Exact value.

    """
    if isinstance(value, bool) or isinstance(value, float):
        raise InstanceError(
            f"{name} must be an integer or a rational 'a/b', got {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InstanceError(
                f"{name} is not a rational number: {value!r}") from exc
    raise InstanceError(f"{name} has unsupported type {type(value).__name__}")


def format_fraction(value):
    """Render a fraction as `int` or `"a/b"` string for JSON documents."""
    if value.denominator == 1:
        return value.numerator
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class BranchTask:
    """Branch task with processing cost and communication costs."""

    id: str
    p: Fraction
    gamma_in: Fraction = ZERO
    gamma_out: Fraction = ZERO

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise InstanceError(
                f"Task id must be a non-empty string: {self.id!r}")
        object.__setattr__(self, "p", to_fraction(self.p, f"{self.id}.p"))
        object.__setattr__(
            self, "gamma_in", to_fraction(self.gamma_in, f"{self.id}.gin"))
        object.__setattr__(
            self, "gamma_out", to_fraction(self.gamma_out, f"{self.id}.gout"))
        if self.p <= 0:
            raise InstanceError(f"Task '{self.id}' has non-positive cost")
        if self.gamma_in < 0 or self.gamma_out < 0:
            raise InstanceError(
                f"Task '{self.id}' has a negative communication cost")


@dataclass(frozen=True)
class ForkJoinInstance:
    """Fork-join workload together with the processor system.

    Attributes:
        tasks (tuple[BranchTask, ...]): Branch tasks.
        p_src (Fraction): Processing cost of the source task.
        p_sink (Fraction): Processing cost of the sink task.
        speeds (tuple[Fraction, ...]): One speed per processor.
        groups (tuple[int, ...], optional): Communication group per
            processor. Communications are not incurred between processors
            of the same group.

    """

    tasks: tuple
    p_src: Fraction
    p_sink: Fraction
    speeds: tuple
    groups: Optional[tuple] = None
    _by_id: dict = field(
        init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        tasks = tuple(self.tasks)
        speeds = tuple(to_fraction(s, "speed") for s in self.speeds)
        object.__setattr__(self, "tasks", tasks)
        object.__setattr__(self, "speeds", speeds)
        object.__setattr__(self, "p_src", to_fraction(self.p_src, "p_src"))
        object.__setattr__(
            self, "p_sink", to_fraction(self.p_sink, "p_sink"))
        if not speeds:
            raise InstanceError("At least one processor is required")
        if any(speed <= 0 for speed in speeds):
            raise InstanceError("Processor speeds must be positive")
        if self.p_src <= 0 or self.p_sink <= 0:
            raise InstanceError("Source and sink costs must be positive")

        by_id = {}
        for task in tasks:
            if task.id in by_id:
                raise InstanceError(f"Duplicate task id '{task.id}'")
            by_id[task.id] = task
        object.__setattr__(self, "_by_id", by_id)

        if self.groups is not None:
            groups = tuple(int(group) for group in self.groups)
            if len(groups) != len(speeds):
                raise InstanceError(
                    "Group list must have one entry per processor")
            object.__setattr__(self, "groups", groups)

    @property
    def n_procs(self):
        return len(self.speeds)

    @property
    def task_ids(self):
        return tuple(task.id for task in self.tasks)

    def task(self, task_id):
        try:
            return self._by_id[task_id]
        except KeyError:
            raise InstanceError(f"Unknown task id '{task_id}'") from None

    def has_task(self, task_id):
        return task_id in self._by_id

    def common_cost(self):
        """Shared branch cost, or None when costs differ or no tasks."""
        costs = {task.p for task in self.tasks}
        if len(costs) == 1:
            return next(iter(costs))
        return None

    def source_time(self, m_src):
        return self.p_src / self.speeds[m_src]

    def sink_time(self, m_sink):
        return self.p_sink / self.speeds[m_sink]

    def exec_time(self, task, m):
        return task.p / self.speeds[m]

    def same_group(self, m, other):
        if m == other:
            return True
        return self.groups is not None and self.groups[m] == self.groups[other]

    def in_delay(self, task, m, m_src):
        """Incoming communication of `task` when run on processor `m`."""
        if self.same_group(m, m_src):
            return ZERO
        return task.gamma_in

    def out_delay(self, task, m, m_sink):
        """Outgoing communication of `task` when run on processor `m`."""
        if self.same_group(m, m_sink):
            return ZERO
        return task.gamma_out

    def release(self, task, m, m_src):
        return self.source_time(m_src) + self.in_delay(task, m, m_src)


@dataclass(frozen=True)
class Schedule:
    """Processor allocation and start times of a fork-join schedule.

    Source starts at 0 on `m_src`; `sink_start` is the start of the sink
    on `m_sink`.
    """

    m_src: int
    m_sink: int
    order: tuple
    start_times: Mapping[str, Fraction]
    sink_start: Fraction

    @property
    def assignment(self):
        return {
            task_id: m
            for m, task_ids in enumerate(self.order)
            for task_id in task_ids
        }


def _check_structure(instance, m_src, m_sink, order):
    n_procs = instance.n_procs
    for m in (m_src, m_sink):
        if not isinstance(m, int) or not 0 <= m < n_procs:
            raise InstanceError(f"Unknown processor index {m!r}")
    if len(order) > n_procs:
        raise InstanceError(
            f"Order lists {len(order)} processors, instance has {n_procs}")
    seen = set()
    for task_ids in order:
        for task_id in task_ids:
            instance.task(task_id)
            if task_id in seen:
                raise InstanceError(f"Task '{task_id}' is ordered twice")
            seen.add(task_id)
    missing = set(instance.task_ids) - seen
    if missing:
        raise InstanceError(
            f"Tasks without processor: {', '.join(sorted(missing))}")


def processor_timeline(instance, m, m_src, m_sink, task_ids):
    """Left-shifted start times of an ordered task list on one processor.

    Returns:
        tuple[list[Fraction], Optional[Fraction]]: Start times and the
            latest arrival at the sink (None for an empty list).

    """
    src_finish = instance.source_time(m_src)
    speed = instance.speeds[m]
    free = src_finish if m == m_src else ZERO
    starts = []
    arrival = None
    for task_id in task_ids:
        task = instance.task(task_id)
        start = max(free, src_finish + instance.in_delay(task, m, m_src))
        free = start + task.p / speed
        starts.append(start)
        candidate = free + instance.out_delay(task, m, m_sink)
        if arrival is None or candidate > arrival:
            arrival = candidate
    return starts, arrival


def canonicalize(instance, m_src, m_sink, order):
    """Build the left-shifted schedule for the given processor orders.

    Args:
        instance (ForkJoinInstance): Instance to schedule.
        m_src (int): Processor of the source task.
        m_sink (int): Processor of the sink task.
        order (Sequence[Sequence[str]]): Branch task ids per processor in
            execution order. Missing trailing processors are empty.

    Returns:
        Schedule: Schedule with start times from the recurrences.

    """
    order = [tuple(task_ids) for task_ids in order]
    _check_structure(instance, m_src, m_sink, order)
    order.extend(() for _ in range(instance.n_procs - len(order)))

    start_times = {}
    sink_start = instance.source_time(m_src)
    for m, task_ids in enumerate(order):
        starts, arrival = processor_timeline(
            instance, m, m_src, m_sink, task_ids)
        start_times.update(zip(task_ids, starts))
        if arrival is not None and arrival > sink_start:
            sink_start = arrival
    return Schedule(
        m_src=m_src,
        m_sink=m_sink,
        order=tuple(order),
        start_times=start_times,
        sink_start=sink_start,
    )


def makespan(instance, schedule):
    """Schedule length: latest sink arrival plus the sink execution."""
    latest = instance.source_time(schedule.m_src)
    for m, task_ids in enumerate(schedule.order):
        for task_id in task_ids:
            task = instance.task(task_id)
            arrival = (
                schedule.start_times[task_id]
                + instance.exec_time(task, m)
                + instance.out_delay(task, m, schedule.m_sink)
            )
            if arrival > latest:
                latest = arrival
    return latest + instance.sink_time(schedule.m_sink)


class ViolationKind(str, enum.Enum):
    STRUCTURE = "structure"
    OVERLAP = "overlap"
    RELEASE = "release"
    SINK = "sink"
    NOT_CANONICAL = "not_canonical"


@dataclass(frozen=True)
class Violation:
    kind: ViolationKind
    message: str
    task: Optional[str] = None


def validate(instance, schedule):
    """Check a schedule against the model semantics.

    Returns:
        list[Violation]: Found violations, empty when the schedule is valid.

    """
    try:
        _check_structure(
            instance, schedule.m_src, schedule.m_sink, schedule.order)
    except InstanceError as exc:
        return [Violation(ViolationKind.STRUCTURE, str(exc))]
    missing = [
        task_id for task_id in instance.task_ids
        if task_id not in schedule.start_times
    ]
    if missing:
        return [Violation(
            ViolationKind.STRUCTURE,
            f"Tasks without start time: {', '.join(sorted(missing))}",
        )]

    violations = []
    m_src, m_sink = schedule.m_src, schedule.m_sink
    src_finish = instance.source_time(m_src)
    latest_arrival = src_finish
    for m, task_ids in enumerate(schedule.order):
        intervals = []
        if m == m_src:
            intervals.append((ZERO, src_finish, None))
        for task_id in task_ids:
            task = instance.task(task_id)
            start = schedule.start_times[task_id]
            finish = start + instance.exec_time(task, m)
            intervals.append((start, finish, task_id))
            release = instance.release(task, m, m_src)
            if start < release:
                violations.append(Violation(
                    ViolationKind.RELEASE,
                    f"Task '{task_id}' starts at {start} on processor {m}"
                    f" before its release {release}",
                    task_id,
                ))
            latest_arrival = max(
                latest_arrival, finish + instance.out_delay(task, m, m_sink))

        intervals.sort(key=lambda item: (item[0], item[1]))
        for (_, prev_finish, prev_id), (start, _, task_id) in zip(
                intervals, intervals[1:]):
            if start < prev_finish:
                violations.append(Violation(
                    ViolationKind.OVERLAP,
                    f"Task '{task_id}' overlaps "
                    f"'{prev_id or 'source'}' on processor {m}",
                    task_id,
                ))

    if schedule.sink_start < latest_arrival:
        violations.append(Violation(
            ViolationKind.SINK,
            f"Sink starts at {schedule.sink_start} before the last"
            f" arrival {latest_arrival}",
        ))

    expected = canonicalize(instance, m_src, m_sink, schedule.order)
    for task_id, start in expected.start_times.items():
        if schedule.start_times[task_id] != start:
            violations.append(Violation(
                ViolationKind.NOT_CANONICAL,
                f"Task '{task_id}' starts at"
                f" {schedule.start_times[task_id]}, recurrences give {start}",
                task_id,
            ))
    if schedule.sink_start != expected.sink_start:
        violations.append(Violation(
            ViolationKind.NOT_CANONICAL,
            f"Sink starts at {schedule.sink_start},"
            f" recurrences give {expected.sink_start}",
        ))
    return violations


class GuaranteeKind(str, enum.Enum):
    EXACT = "exact"
    ADDITIVE = "additive"
    RATIO = "ratio"


@dataclass(frozen=True)
class Guarantee:
    """Certificate of a solver result relative to the optimum.

    A `RATIO` guarantee without bound is vacuous.
    """

    kind: GuaranteeKind
    bound: Optional[Fraction] = None

    def honored(self, value, optimum):
        if value < optimum:
            return False
        if self.kind is GuaranteeKind.EXACT:
            return value == optimum
        if self.kind is GuaranteeKind.ADDITIVE:
            return value <= optimum + self.bound
        if self.bound is None:
            return True
        return value <= self.bound * optimum


@dataclass(frozen=True)
class SolveReport:
    schedule: Schedule
    makespan: Fraction
    algorithm: str
    guarantee: Optional[Guarantee] = None
    details: Mapping[str, Any] = field(default_factory=dict)


def make_report(instance, schedule, algorithm, guarantee=None, details=None):
    """Wrap a schedule into a report with the recomputed makespan."""
    return SolveReport(
        schedule=schedule,
        makespan=makespan(instance, schedule),
        algorithm=algorithm,
        guarantee=guarantee,
        details=dict(details or {}),
    )


def serial_schedule(instance, m=None):
    """Everything on one processor (the fastest by default)."""
    if m is None:
        m = max(
            range(instance.n_procs),
            key=lambda i: (instance.speeds[i], -i),
        )
    order = [() for _ in range(instance.n_procs)]
    order[m] = instance.task_ids
    return canonicalize(instance, m, m, order)


def best_order_key(instance, m, m_src, m_sink, task_ids: Sequence[str]):
    """Order of a fixed task set that is optimal by an exchange argument.

    Returns None when neither releases nor sink delays are uniform on the
    processor, in which case no single sort order is known to be optimal.
    """
    tasks = [instance.task(task_id) for task_id in task_ids]
    releases = {instance.release(task, m, m_src) for task in tasks}
    delays = {instance.out_delay(task, m, m_sink) for task in tasks}
    if len(releases) <= 1:
        return sorted(
            task_ids,
            key=lambda i: (
                -instance.out_delay(instance.task(i), m, m_sink), i),
        )
    if len(delays) <= 1:
        return sorted(
            task_ids,
            key=lambda i: (instance.release(instance.task(i), m, m_src), i),
        )
    return None
