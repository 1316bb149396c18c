"""Turn an ILP solution back into a schedule of the original tasks."""
import logging
from dataclasses import dataclass
from fractions import Fraction

from ..errors import ReconstructionError
from ..model import canonicalize, makespan
from .configurations import SlotKind

log = logging.getLogger(__name__)


@dataclass
class _Block:
    proc: int
    start: Fraction
    capacity: Fraction
    used: Fraction = Fraction(0)


def _pack(instance, blocks, task_id, placed):
    """Put a task into the first block that is not yet full.

    When every block is full the task overhangs the least overfull one.
    """
    if not blocks:
        raise ReconstructionError(f"No block left for small task '{task_id}'")
    task = instance.task(task_id)
    block = next(
        (block for block in blocks if block.used < block.capacity), None)
    if block is None:
        block = min(blocks, key=lambda item: item.used - item.capacity)
    placed[task_id] = (block.proc, block.start + block.used)
    block.used += instance.exec_time(task, block.proc)


def reconstruct_schedule(instance, simplified, ilp, solution):
    """Schedule of the original tasks following an ILP solution.

    Big tasks take the slots of their class, largest cost first. Tasks that
    run within one cell fill the blocks of their communication class: first
    big ones on the machine type the solution picked for them, then small
    ones on any machine. A block accepts tasks while less than its capacity
    is used; tasks left over overhang the least overfull block. Slots are
    sized for the rounded-down cost, so a real task may run over its slot
    and the result may exceed `T` by the factor `simplified.slack`.

    Args:
        instance (ForkJoinInstance): Original instance.
        simplified (SimplifiedInstance): Rounded instance the ILP is for.
        ilp (ConfigIlp): Program that was solved.
        solution (list[int]): Feasible values of `ilp.variables`.

    Returns:
        Schedule: Left-shifted schedule of the original tasks.

    Raises:
        ReconstructionError: The solution does not account for every task.

    """
    values = {
        variable.name: value
        for variable, value in zip(ilp.variables, solution)
    }
    cell = simplified.cell

    type_of = {}
    config_of = {}
    for mtype, procs in simplified.types.items():
        chosen = []
        for idx, config in enumerate(ilp.configurations[mtype]):
            chosen.extend([config] * values.get(("x", mtype, idx), 0))
        if len(chosen) > len(procs):
            raise ReconstructionError(
                f"{len(chosen)} configurations for {len(procs)} machines")
        for m in procs:
            type_of[m] = mtype
        config_of.update(zip(procs, chosen))

    slots = {}
    blocks = {}
    for m in sorted(config_of):
        config = config_of[m]
        for item, start in config.placement:
            if isinstance(item, SlotKind):
                slots.setdefault((type_of[m], item), []).append((start, m))
            else:
                cells = config.block_cells(item)
                blocks.setdefault(item, []).append(_Block(
                    proc=m,
                    start=start * cell,
                    capacity=cells * cell,
                ))

    placed = {}
    for cls, ids in simplified.big.items():
        remaining = list(ids)
        for mtype in simplified.types:
            count = values.get(("n", mtype, cls), 0)
            taken, remaining = remaining[:count], remaining[count:]
            if simplified.runs_as_small(cls, mtype):
                type_blocks = [
                    block for block in blocks.get(cls.comm, ())
                    if type_of[block.proc] == mtype
                ]
                for task_id in taken:
                    _pack(instance, type_blocks, task_id, placed)
                continue
            kind = SlotKind(
                simplified.slot_cells(cls, mtype), cls.kin, cls.kout)
            free = slots.setdefault((mtype, kind), [])
            for task_id in taken:
                if not free:
                    raise ReconstructionError(
                        f"No slot left for task '{task_id}'")
                start, m = free.pop(0)
                placed[task_id] = (m, start * cell)
        if remaining:
            raise ReconstructionError(
                f"Tasks without allocation: {', '.join(remaining)}")

    for comm, ids in simplified.small.items():
        for task_id in ids:
            _pack(instance, blocks.get(comm, []), task_id, placed)

    per_proc = [[] for _ in range(instance.n_procs)]
    for task_id, (m, start) in placed.items():
        per_proc[m].append((start, task_id))
    order = [tuple(task_id for _, task_id in sorted(items))
             for items in per_proc]
    schedule = canonicalize(
        instance, simplified.m_src, simplified.m_sink, order)
    length = makespan(instance, schedule)
    log.debug(f"Reconstructed makespan {length} for bound {simplified.T}")
    return schedule
