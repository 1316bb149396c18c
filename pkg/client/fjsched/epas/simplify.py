"""Rounding of an instance for one makespan guess `T`.

Communications are rounded up to multiples of `eps * T`, big task costs
down to a geometric grid, speeds down to a geometric grid and small tasks
are only counted by volume. Time inside configurations is measured in
cells of `eps**2 * T`.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import PreconditionError
from ..model import to_fraction

ROLE_NONE = "none"
ROLE_SRC = "src"
ROLE_SINK = "sink"
ROLE_BOTH = "both"


def snap_epsilon(epsilon):
    """Accuracy `1/k` with the smallest `k` such that `1/k <= epsilon`."""
    epsilon = to_fraction(epsilon, "epsilon")
    if not 0 < epsilon <= Fraction(1, 2):
        raise PreconditionError(
            f"Accuracy must be in (0, 1/2], got {epsilon}")
    return Fraction(1, math.ceil(1 / epsilon))


def geometric_floor(value, base, ratio):
    """Largest `n >= 0` with `base * ratio**n <= value`.

    Returns -1 when `value` is below `base`.
    """
    if value < base:
        return -1
    exponent = 0
    current = base * ratio
    while current <= value:
        current *= ratio
        exponent += 1
    return exponent


@dataclass(frozen=True, order=True)
class MachineType:
    speed: Fraction
    role: str


@dataclass(frozen=True, order=True)
class BigClass:
    """Rounded big task: cost exponent and communication levels."""

    exponent: int
    kin: int
    kout: int

    @property
    def comm(self):
        return (self.kin, self.kout)


@dataclass(frozen=True)
class SimplifiedInstance:
    """Rounded instance for bound `T` and fixed source and sink processors.

    Communication levels are integers `k`, meaning `k * eps * T`; level
    `levels` (= 1/eps) marks a communication that only fits on the source
    or sink processor.
    """

    epsilon: Fraction
    T: Fraction
    m_src: int
    m_sink: int
    src_finish: Fraction
    sink_time: Fraction
    big: dict
    small: dict
    small_volume: dict
    types: dict
    rounded_speeds: tuple
    back_map: dict = field(default_factory=dict)

    @property
    def levels(self):
        return int(1 / self.epsilon)

    @property
    def cell(self):
        return self.epsilon ** 2 * self.T

    @property
    def cells(self):
        return self.levels ** 2

    @property
    def gamma_unit(self):
        return self.epsilon * self.T

    @property
    def s_min(self):
        return min(self.rounded_speeds)

    @property
    def base(self):
        """Cost cutoff between small and big tasks."""
        return self.s_min * self.epsilon ** 2 * self.T

    @property
    def p_small(self):
        return self.s_min * self.epsilon ** 3 * self.T

    @property
    def small_counts(self):
        """Placeholders per communication class."""
        return {
            comm: math.ceil(volume / self.p_small)
            for comm, volume in self.small_volume.items()
        }

    def class_cost(self, cls):
        return self.base * (1 + self.epsilon) ** cls.exponent

    def class_upper(self, cls):
        return self.base * (1 + self.epsilon) ** (cls.exponent + 1)

    def runs_as_small(self, cls, mtype):
        """Whether the class executes within one cell on `mtype`."""
        return self.class_upper(cls) / mtype.speed <= self.cell

    def slot_cells(self, cls, mtype):
        """Whole cells covering the rounded-down cost on `mtype`."""
        return math.ceil(self.class_cost(cls) / mtype.speed / self.cell)

    @property
    def slack(self):
        """Factor by which a rebuilt schedule may exceed `T`."""
        return (1 + 6 * self.epsilon) / (1 + self.epsilon)

    def window(self, mtype, kin, kout):
        """Release and deadline cell of a communication class on a type.

        Returns:
            Optional[tuple[int, int]]: None when nothing of the class can
                run on machines of this type.

        """
        local_in = mtype.role in (ROLE_SRC, ROLE_BOTH)
        local_out = mtype.role in (ROLE_SINK, ROLE_BOTH)
        if (kin >= self.levels and not local_in) or (
                kout >= self.levels and not local_out):
            return None
        release = self.src_finish
        if not local_in:
            release += kin * self.gamma_unit
        deadline = self.T - self.sink_time
        if not local_out:
            deadline -= kout * self.gamma_unit
        first = max(0, math.ceil(release / self.cell))
        last = min(self.cells, math.floor(deadline / self.cell))
        if last <= first:
            return None
        return first, last

    def comm_classes(self):
        classes = {cls.comm for cls in self.big}
        classes.update(self.small)
        return sorted(classes)

    def gamma_values(self):
        """Communication levels usable away from the source and sink."""
        values = set()
        for kin, kout in self.comm_classes():
            values.update(k for k in (kin, kout) if k < self.levels)
        return values

    def stats(self):
        time_categories = {
            self.slot_cells(cls, mtype)
            for cls in self.big
            for mtype in self.types
            if not self.runs_as_small(cls, mtype)
        }
        return {
            "gamma_levels": len(self.gamma_values()),
            "cost_classes": len({cls.exponent for cls in self.big}),
            "time_categories": len(time_categories),
            "big_classes": len(self.big),
            "small_classes": len(self.small),
            "machine_types": len(self.types),
        }


def _level(value, unit, levels):
    return min(levels, math.ceil(value / unit))


def _role(m, m_src, m_sink):
    if m == m_src and m == m_sink:
        return ROLE_BOTH
    if m == m_src:
        return ROLE_SRC
    if m == m_sink:
        return ROLE_SINK
    return ROLE_NONE


def simplify(instance, T, epsilon, m_src, m_sink):
    """Round `instance` for bound `T`.

    Args:
        instance (ForkJoinInstance): Ungrouped instance.
        T (Fraction): Makespan guess.
        epsilon (Fraction): Accuracy, snapped down to `1/k`.
        m_src (int): Source processor.
        m_sink (int): Sink processor.

    Returns:
        SimplifiedInstance: Rounded instance.

    """
    epsilon = snap_epsilon(epsilon)
    T = to_fraction(T, "T")
    if T <= 0:
        raise PreconditionError("Makespan guess must be positive")
    ratio = 1 + epsilon
    levels = int(1 / epsilon)
    unit = epsilon * T

    s_min = min(instance.speeds)
    rounded_speeds = tuple(
        s_min * ratio ** geometric_floor(speed, s_min, ratio)
        for speed in instance.speeds
    )
    base = s_min * epsilon ** 2 * T

    big = {}
    small = {}
    small_volume = {}
    back_map = {}
    for task in sorted(instance.tasks, key=lambda item: (-item.p, item.id)):
        kin = _level(task.gamma_in, unit, levels)
        kout = _level(task.gamma_out, unit, levels)
        if task.p <= base:
            small.setdefault((kin, kout), []).append(task.id)
            small_volume[(kin, kout)] = (
                small_volume.get((kin, kout), Fraction(0)) + task.p)
            back_map[task.id] = (kin, kout)
        else:
            cls = BigClass(geometric_floor(task.p, base, ratio), kin, kout)
            big.setdefault(cls, []).append(task.id)
            back_map[task.id] = cls

    types = {}
    for m, speed in enumerate(rounded_speeds):
        mtype = MachineType(speed, _role(m, m_src, m_sink))
        types.setdefault(mtype, []).append(m)

    return SimplifiedInstance(
        epsilon=epsilon,
        T=T,
        m_src=m_src,
        m_sink=m_sink,
        src_finish=instance.source_time(m_src),
        sink_time=instance.sink_time(m_sink),
        big={cls: tuple(ids) for cls, ids in sorted(big.items())},
        small={comm: tuple(ids) for comm, ids in sorted(small.items())},
        small_volume=dict(sorted(small_volume.items())),
        types={
            mtype: tuple(procs) for mtype, procs in sorted(types.items())},
        rounded_speeds=rounded_speeds,
        back_map=back_map,
    )
