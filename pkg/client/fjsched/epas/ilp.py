"""Configuration ILP and a small exact branch-and-bound solver for it.

Rows are kept in integer form: every row is scaled by the common
denominator of its coefficients.
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import LimitExceededError
from .configurations import SlotKind

log = logging.getLogger(__name__)

GE = ">="
LE = "<="

# constraint families
TASK_COVER = "task_cover"
SMALL_COVER = "small_cover"
SLOT_COVER = "slot_cover"
SMALL_TIME = "small_time"
MACHINES = "machines"


@dataclass(frozen=True)
class IlpVariable:
    name: tuple
    upper: int


@dataclass(frozen=True)
class IlpRow:
    family: str
    label: tuple
    coefficients: tuple
    sense: str
    rhs: int


@dataclass(frozen=True)
class ConfigIlp:
    """Integer program over configuration and allocation counts.

    Variable names are `("x", type, config index)`, `("n", type, class)`
    and `("n_small", type, comm)`.
    """

    variables: tuple
    rows: tuple
    configurations: dict = field(default_factory=dict)

    def index(self, name):
        for idx, variable in enumerate(self.variables):
            if variable.name == name:
                return idx
        raise KeyError(name)

    def family_counts(self):
        counts = {}
        for row in self.rows:
            counts[row.family] = counts.get(row.family, 0) + 1
        return counts


def _integer_row(family, label, terms, sense, rhs):
    """Row with integer coefficients from rational terms."""
    terms = [(var, Fraction(coef)) for var, coef in terms if coef]
    rhs = Fraction(rhs)
    scale = 1
    for _, coef in terms:
        scale = scale * coef.denominator // math.gcd(scale, coef.denominator)
    scale = scale * rhs.denominator // math.gcd(scale, rhs.denominator)
    return IlpRow(
        family=family,
        label=label,
        coefficients=tuple(
            (var, int(coef * scale)) for var, coef in sorted(terms)),
        sense=sense,
        rhs=int(rhs * scale),
    )


def build_ilp(simplified, configurations):
    """Configuration ILP of a rounded instance.

    Args:
        simplified (SimplifiedInstance): Rounded instance.
        configurations (dict[MachineType, list[Configuration]]): Maximal
            configurations per machine type.

    Returns:
        ConfigIlp: Integer program, feasible iff the rounded instance fits.

    """
    variables = []
    positions = {}

    def add(name, upper):
        positions[name] = len(variables)
        variables.append(IlpVariable(name, upper))
        return positions[name]

    types = list(simplified.types)
    for mtype in types:
        for idx in range(len(configurations[mtype])):
            add(("x", mtype, idx), len(simplified.types[mtype]))

    def hosts_block(mtype, comm):
        return any(
            config.small_cells(comm) for config in configurations[mtype])

    slot_kinds = {}
    for cls, ids in simplified.big.items():
        for mtype in types:
            if simplified.runs_as_small(cls, mtype):
                if hosts_block(mtype, cls.comm):
                    add(("n", mtype, cls), len(ids))
                continue
            kind = SlotKind(
                simplified.slot_cells(cls, mtype), cls.kin, cls.kout)
            slot_kinds.setdefault(mtype, set()).add(kind)
            if any(
                    config.slot_count(kind)
                    for config in configurations[mtype]):
                add(("n", mtype, cls), len(ids))
    small_counts = simplified.small_counts
    for comm, count in small_counts.items():
        for mtype in types:
            if hosts_block(mtype, comm):
                add(("n_small", mtype, comm), count)

    rows = []
    for cls, ids in simplified.big.items():
        terms = [
            (positions[("n", mtype, cls)], 1)
            for mtype in types if ("n", mtype, cls) in positions
        ]
        rows.append(_integer_row(TASK_COVER, (cls,), terms, GE, len(ids)))
    for comm, count in small_counts.items():
        terms = [
            (positions[("n_small", mtype, comm)], 1)
            for mtype in types if ("n_small", mtype, comm) in positions
        ]
        rows.append(_integer_row(SMALL_COVER, (comm,), terms, GE, count))

    for mtype in types:
        configs = configurations[mtype]
        for kind in sorted(slot_kinds.get(mtype, ())):
            terms = []
            for idx, config in enumerate(configs):
                terms.append(
                    (positions[("x", mtype, idx)], config.slot_count(kind)))
            for cls in simplified.big:
                name = ("n", mtype, cls)
                if name in positions and not simplified.runs_as_small(
                        cls, mtype) and SlotKind(
                        simplified.slot_cells(cls, mtype),
                        cls.kin, cls.kout) == kind:
                    terms.append((positions[name], -1))
            rows.append(_integer_row(
                SLOT_COVER, (mtype, kind), terms, GE, 0))

        for comm in simplified.comm_classes():
            terms = [
                (
                    positions[("x", mtype, idx)],
                    config.small_cells(comm) * simplified.cell,
                )
                for idx, config in enumerate(configs)
            ]
            for cls in simplified.big:
                name = ("n", mtype, cls)
                if (name in positions and cls.comm == comm
                        and simplified.runs_as_small(cls, mtype)):
                    terms.append((
                        positions[name],
                        -simplified.class_cost(cls) / mtype.speed,
                    ))
            name = ("n_small", mtype, comm)
            if name in positions:
                terms.append(
                    (positions[name], -simplified.p_small / mtype.speed))
            rows.append(_integer_row(
                SMALL_TIME, (mtype, comm), terms, GE, 0))

        terms = [
            (positions[("x", mtype, idx)], 1) for idx in range(len(configs))
        ]
        rows.append(_integer_row(
            MACHINES, (mtype,), terms, LE, len(simplified.types[mtype])))

    return ConfigIlp(
        variables=tuple(variables),
        rows=tuple(rows),
        configurations={
            mtype: list(configs) for mtype, configs in configurations.items()
        },
    )


class _BranchAndBound:
    """Depth-first search with activity bounds.

    The program has no objective, so the search stops at the first
    feasible point. Children are visited best first: every variable tries
    its values from the upper bound down, since larger counts are the
    ones that satisfy the covering rows. Independent components of the
    free variables are solved one after the other.

    Variables sharing a `<=` row with unit coefficients are bounded
    together, so a row over configuration counts knows that at most
    `|M^s|` configurations can contribute.
    """

    def __init__(self, ilp, max_nodes):
        self.ilp = ilp
        self.rows = ilp.rows
        self.upper = [variable.upper for variable in ilp.variables]
        self.values = [None] * len(self.upper)
        self.max_nodes = max_nodes
        self.nodes = 0

        self.cardinality = {}
        for row_idx, row in enumerate(self.rows):
            if row.sense == LE and row.rhs >= 0 and all(
                    coef == 1 for _, coef in row.coefficients):
                for var, _ in row.coefficients:
                    self.cardinality.setdefault(var, row_idx)

        self.var_rows = [set() for _ in self.upper]
        for row_idx, row in enumerate(self.rows):
            for var, _ in row.coefficients:
                self.var_rows[var].add(row_idx)
        self.affected = []
        for var in range(len(self.upper)):
            rows = set(self.var_rows[var])
            card = self.cardinality.get(var)
            if card is not None:
                for other, _ in self.rows[card].coefficients:
                    rows |= self.var_rows[other]
            self.affected.append(sorted(rows))

    def _remaining(self, card):
        row = self.rows[card]
        used = sum(
            self.values[var] for var, _ in row.coefficients
            if self.values[var] is not None
        )
        return row.rhs - used

    def _max_activity(self, row):
        total = 0
        groups = {}
        for var, coef in row.coefficients:
            value = self.values[var]
            if value is not None:
                total += coef * value
            elif coef > 0:
                card = self.cardinality.get(var)
                if card is None:
                    total += coef * self.upper[var]
                else:
                    groups.setdefault(card, []).append((coef, var))
        for card, members in groups.items():
            remaining = self._remaining(card)
            for coef, var in sorted(members, reverse=True):
                if remaining <= 0:
                    break
                take = min(self.upper[var], remaining)
                total += coef * take
                remaining -= take
        return total

    def _min_activity(self, row):
        total = 0
        for var, coef in row.coefficients:
            value = self.values[var]
            if value is not None:
                total += coef * value
            elif coef < 0:
                total += coef * self.upper[var]
        return total

    def _row_ok(self, row):
        if row.sense == GE:
            return self._max_activity(row) >= row.rhs
        return self._min_activity(row) <= row.rhs

    def _components(self, free):
        parent = {var: var for var in free}

        def find(var):
            while parent[var] != var:
                parent[var] = parent[parent[var]]
                var = parent[var]
            return var

        for row in self.rows:
            members = [var for var, _ in row.coefficients if var in parent]
            for other in members[1:]:
                parent[find(other)] = find(members[0])
        components = {}
        for var in free:
            components.setdefault(find(var), []).append(var)
        return list(components.values())

    def run(self, free):
        self.nodes += 1
        if self.nodes > self.max_nodes:
            raise LimitExceededError("epas_max_ilp_nodes", self.max_nodes)
        if not free:
            return True
        components = self._components(free)
        if len(components) > 1:
            solved = []
            for component in components:
                if not self.run(component):
                    for var in solved:
                        self.values[var] = None
                    return False
                solved.extend(component)
            return True

        var, rest = free[0], free[1:]
        for value in range(self.upper[var], -1, -1):
            self.values[var] = value
            if all(self._row_ok(self.rows[idx]) for idx in self.affected[var]):
                if self.run(rest):
                    return True
        self.values[var] = None
        return False


def solve_ilp(ilp, max_nodes=10 ** 7):
    """Feasible integer assignment of a configuration ILP.

    Allocation variables are branched on before configuration counts.

    Args:
        ilp (ConfigIlp): Program to solve.
        max_nodes (int): Node budget.

    Returns:
        Optional[list[int]]: Variable values in `ilp.variables` order, None
            when the program is infeasible.

    Raises:
        LimitExceededError: Budget exhausted before a decision.

    """
    search = _BranchAndBound(ilp, max_nodes)
    if not all(search._row_ok(row) for row in ilp.rows):
        return None
    order = sorted(
        range(len(ilp.variables)),
        key=lambda idx: (ilp.variables[idx].name[0] == "x", idx),
    )
    feasible = search.run(order)
    log.debug(f"ILP {'feasible' if feasible else 'infeasible'}"
              f" after {search.nodes} nodes")
    if not feasible:
        return None
    return list(search.values)
