"""Configurations: what a single machine of one type can hold.

A configuration is a multiset of big task slots, each `(cells, kin, kout)`,
plus at most one small task block per communication class. A block of `c`
cells offers `c` cells of small task time; packing whole tasks may run over
the block end, which the rebuilt schedule absorbs in its slack. Every
configuration comes with a witness placement on the cell grid that respects
each item's class window.
"""
import logging
from dataclasses import dataclass

from ..errors import LimitExceededError
from ..rtd import find_single_machine_order

log = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class SlotKind:
    cells: int
    kin: int
    kout: int

    @property
    def comm(self):
        return (self.kin, self.kout)


@dataclass(frozen=True)
class Configuration:
    """Slots and small blocks of one machine.

    Attributes:
        slots (tuple[tuple[SlotKind, int], ...]): Slot counts, zero counts
            left out.
        blocks (tuple[tuple[tuple[int, int], int], ...]): Block cells per
            communication class, empty blocks left out.
        placement (tuple[tuple[object, int], ...]): `(item, start cell)`;
            items are `SlotKind` or a communication class for a block.

    """

    slots: tuple
    blocks: tuple
    placement: tuple

    def slot_count(self, kind):
        return dict(self.slots).get(kind, 0)

    def block_cells(self, comm):
        return dict(self.blocks).get(comm, 0)

    def small_cells(self, comm):
        """Cells of small task time offered to a communication class."""
        return self.block_cells(comm)


@dataclass(frozen=True)
class _Item:
    key: object
    is_block: bool
    cells: int
    window: tuple

    def values(self):
        first, last = self.window
        length = last - first
        if self.is_block:
            return list(range(0, length + 1))
        return list(range(0, length // self.cells + 1))


def machine_items(simplified, mtype):
    """Slot kinds and block classes a machine type can host."""
    slot_kinds = set()
    block_classes = set(simplified.small)
    for cls in simplified.big:
        if simplified.runs_as_small(cls, mtype):
            block_classes.add(cls.comm)
        else:
            slot_kinds.add(SlotKind(
                simplified.slot_cells(cls, mtype), cls.kin, cls.kout))

    items = []
    for kind in sorted(slot_kinds):
        window = simplified.window(mtype, kind.kin, kind.kout)
        if window is not None and kind.cells <= window[1] - window[0]:
            items.append(_Item(kind, False, kind.cells, window))
    for comm in sorted(block_classes):
        window = simplified.window(mtype, *comm)
        if window is not None and window[1] > window[0]:
            items.append(_Item(comm, True, 0, window))
    return items


def _jobs(items, vector):
    jobs = []
    for idx, (item, value) in enumerate(zip(items, vector)):
        if not value:
            continue
        first, last = item.window
        if item.is_block:
            jobs.append(((idx, 0), value, first, last))
        else:
            jobs.extend(
                ((idx, copy), item.cells, first, last)
                for copy in range(value)
            )
    return jobs


def enumerate_configurations(simplified, mtype, max_configs=10 ** 5):
    """All maximal feasible configurations of a machine type.

    Feasibility is decided exactly by sequencing the items on the cell grid
    within their windows. Adding a slot or lengthening a block never makes
    an infeasible configuration feasible, which bounds the search.

    Args:
        simplified (SimplifiedInstance): Rounded instance.
        mtype (MachineType): Machine type.
        max_configs (int): Cap on feasible configurations.

    Returns:
        list[Configuration]: Maximal configurations, at least the empty one.

    Raises:
        LimitExceededError: More feasible configurations than the cap.

    """
    items = machine_items(simplified, mtype)
    feasible = {}

    def is_feasible(vector):
        if vector not in feasible:
            feasible[vector] = find_single_machine_order(_jobs(items, vector))
        return feasible[vector] is not None

    found = []

    def visit(idx, vector):
        if idx == len(items):
            found.append(vector)
            if len(found) > max_configs:
                raise LimitExceededError("epas_max_configs", max_configs)
            return
        for value in items[idx].values():
            candidate = vector + (value,)
            padded = candidate + (0,) * (len(items) - idx - 1)
            if value and not is_feasible(padded):
                break
            visit(idx + 1, candidate)

    visit(0, ())
    found_set = set(found)
    configurations = []
    for vector in found:
        grown = (
            vector[:idx] + (value + 1,) + vector[idx + 1:]
            for idx, value in enumerate(vector)
        )
        if any(other in found_set for other in grown):
            continue
        configurations.append(_configuration(items, vector, feasible))
    log.debug(
        f"{len(found)} feasible, {len(configurations)} maximal"
        f" configurations for {mtype}")
    return configurations


def _configuration(items, vector, feasible):
    order = feasible.get(vector)
    if order is None:
        order = find_single_machine_order(_jobs(items, vector)) or []
    placement = tuple(
        (items[idx].key, int(start)) for (idx, _), start in order)
    slots = tuple(
        (item.key, value)
        for item, value in zip(items, vector)
        if value and not item.is_block
    )
    blocks = tuple(
        (item.key, value)
        for item, value in zip(items, vector)
        if value and item.is_block
    )
    return Configuration(slots=slots, blocks=blocks, placement=placement)
