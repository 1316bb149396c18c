import itertools
import json
import random
from fractions import Fraction

import pytest

from client.fjsched import epas
from client.fjsched.epas import configurations as configurations_module
from client.fjsched.epas import ilp as ilp_module
from client.fjsched.epas import reconstruct as reconstruct_module
from client.fjsched.epas.simplify import ROLE_BOTH
from client.fjsched.errors import (
    LimitExceededError,
    PreconditionError,
    ReconstructionError,
)
from client.fjsched.model import GuaranteeKind, makespan, validate
from client.fjsched.oracle import exact_solve
from client.fjsched.search import role_pairs

from .factories import build_instance, random_instances

THIRD = Fraction(1, 3)


def test_snap_epsilon():
    assert epas.snap_epsilon(Fraction(2, 5)) == THIRD
    assert epas.snap_epsilon("1/4") == Fraction(1, 4)
    for value in (0, 1, Fraction(3, 5)):
        with pytest.raises(PreconditionError):
            epas.snap_epsilon(value)


def test_geometric_floor():
    assert epas.geometric_floor(Fraction(29, 10), 1, Fraction(3, 2)) == 2
    assert epas.geometric_floor(1, 1, Fraction(3, 2)) == 0
    assert epas.geometric_floor(Fraction(1, 2), 1, Fraction(3, 2)) == -1


def test_simplify_rounding():
    instance = build_instance(
        [(2, 3, 0), (5, 0, 1)], [1, Fraction(29, 10)])
    simplified = epas.simplify(instance, 8, Fraction(1, 2), 0, 1)

    assert simplified.cell == 2
    assert simplified.base == 2
    # cost 2 is small, communication 3 rounds up to one unit of 4
    assert simplified.small == {(1, 0): ("t1",)}
    assert simplified.rounded_speeds == (1, Fraction(9, 4))
    (cls,) = simplified.big
    assert (cls.kin, cls.kout) == (0, 1)
    assert simplified.class_cost(cls) <= 5 < simplified.class_upper(cls)
    assert simplified.stats()["gamma_levels"] <= 2


def test_simplify_rejects_bad_bound():
    instance = build_instance([(1, 0, 0)], [1])

    with pytest.raises(PreconditionError):
        epas.simplify(instance, 0, THIRD, 0, 0)


def test_communications_beyond_bound_are_local_only():
    instance = build_instance([(2, 20, 0)], [1, 1])
    simplified = epas.simplify(instance, 9, THIRD, 0, 1)
    (cls,) = simplified.big

    assert cls.kin == simplified.levels
    assert simplified.gamma_values() == {0}
    remote = epas.MachineType(1, "sink")
    local = epas.MachineType(1, "src")
    assert simplified.window(remote, cls.kin, cls.kout) is None
    assert simplified.window(local, cls.kin, cls.kout) is not None


def _serial_setup(tasks):
    instance = build_instance(tasks, [1])
    simplified = epas.simplify(instance, 9, THIRD, 0, 0)
    mtype = epas.MachineType(1, ROLE_BOTH)
    return instance, simplified, mtype


def test_one_class_fits_three_times():
    _, simplified, mtype = _serial_setup([(2, 0, 0)])
    configurations = epas.enumerate_configurations(simplified, mtype)
    # cost 2 rounds down to 16/9, two cells of 1
    kind = epas.SlotKind(2, 0, 0)

    assert len(configurations) == 1
    assert configurations[0].slot_count(kind) == 3
    assert [start for _, start in configurations[0].placement] == [1, 3, 5]


def test_no_window_leaves_the_empty_configuration():
    instance = build_instance([(2, 0, 0)], [1], p_src=9)
    simplified = epas.simplify(instance, 9, THIRD, 0, 0)
    configurations = epas.enumerate_configurations(
        simplified, epas.MachineType(1, ROLE_BOTH))

    assert len(configurations) == 1
    assert configurations[0].slots == () and configurations[0].blocks == ()


def _placeable(jobs, taken=frozenset()):
    if not jobs:
        return True
    (length, first, last), rest = jobs[0], jobs[1:]
    for start in range(first, last - length + 1):
        cells = frozenset(range(start, start + length))
        if not cells & taken and _placeable(rest, taken | cells):
            return True
    return False


def _brute_force_configurations(items):
    def jobs(vector):
        result = []
        for item, value in zip(items, vector):
            first, last = item.window
            if item.is_block and value:
                result.append((value, first, last))
            elif not item.is_block:
                result.extend([(item.cells, first, last)] * value)
        return result

    ranges = [
        range(item.window[1] - item.window[0] + 1) if item.is_block
        else range((item.window[1] - item.window[0]) // item.cells + 1)
        for item in items
    ]
    feasible = {
        vector for vector in itertools.product(*ranges)
        if _placeable(jobs(vector))
    }
    maximal = set()
    for vector in feasible:
        grown = (
            vector[:idx] + (value + 1,) + vector[idx + 1:]
            for idx, value in enumerate(vector)
        )
        if any(other in feasible for other in grown):
            continue
        maximal.add((
            tuple(
                (item.key, value) for item, value in zip(items, vector)
                if value and not item.is_block),
            tuple(
                (item.key, value) for item, value in zip(items, vector)
                if value and item.is_block),
        ))
    return maximal


def test_configurations_match_brute_force_placements():
    # big classes with windows [1, 8] and [4, 8], a small block in [1, 5]
    instance = build_instance([(2, 0, 0), (3, 3, 0), (1, 0, 3)], [1, 1])
    simplified = epas.simplify(instance, 9, THIRD, 0, 0)
    for mtype in simplified.types:
        items = configurations_module.machine_items(simplified, mtype)
        found = {
            (config.slots, config.blocks)
            for config in epas.enumerate_configurations(simplified, mtype)
        }

        assert len(items) == 3
        assert found == _brute_force_configurations(items)


def test_configuration_cap():
    _, simplified, mtype = _serial_setup([(2, 0, 0)])

    with pytest.raises(LimitExceededError):
        epas.enumerate_configurations(simplified, mtype, max_configs=0)


def test_ilp_dimensions():
    _, simplified, mtype = _serial_setup([(2, 0, 0)])
    configurations = {
        mtype: epas.enumerate_configurations(simplified, mtype)}
    ilp = epas.build_ilp(simplified, configurations)

    assert ilp.family_counts() == {
        ilp_module.TASK_COVER: 1,
        ilp_module.SLOT_COVER: 1,
        ilp_module.SMALL_TIME: 1,
        ilp_module.MACHINES: 1,
    }
    assert epas.solve_ilp(ilp) is not None
    with pytest.raises(LimitExceededError):
        epas.solve_ilp(ilp, max_nodes=0)


def _describe_variable(variable):
    kind, mtype, key = variable.name
    if kind != "x":
        key = key.exponent if kind == "n" else list(key)
    return [kind, str(mtype.speed), mtype.role, key, variable.upper]


def test_ilp_matches_golden_matrix(project_root_path):
    path = (
        project_root_path
        / "tests" / "client" / "fjsched" / "resources"
        / "ilp_two_speeds.json"
    )
    golden = json.loads(path.read_text(encoding="utf-8"))
    setup = golden["instance"]
    instance = build_instance(
        [tuple(task) for task in setup["tasks"]], setup["speeds"])
    simplified = epas.simplify(
        instance, setup["T"], Fraction(setup["epsilon"]),
        setup["m_src"], setup["m_sink"])
    configurations = {
        mtype: epas.enumerate_configurations(simplified, mtype)
        for mtype in simplified.types
    }
    ilp = epas.build_ilp(simplified, configurations)

    assert [
        _describe_variable(variable) for variable in ilp.variables
    ] == golden["variables"]
    assert [
        [
            row.family,
            [list(term) for term in row.coefficients],
            row.sense,
            row.rhs,
        ]
        for row in ilp.rows
    ] == golden["rows"]


def _row(label, terms, sense, rhs):
    return ilp_module.IlpRow("test", label, tuple(terms), sense, rhs)


def test_ilp_machine_limit_makes_infeasible():
    ilp = ilp_module.ConfigIlp(
        variables=(
            ilp_module.IlpVariable("a", 1),
            ilp_module.IlpVariable("b", 1),
        ),
        rows=(
            _row("a", [(0, 1)], ilp_module.GE, 1),
            _row("b", [(1, 1)], ilp_module.GE, 1),
            _row("m", [(0, 1), (1, 1)], ilp_module.LE, 1),
        ),
    )

    assert epas.solve_ilp(ilp) is None


def _satisfied(rows, values):
    for row in rows:
        total = sum(coef * values[var] for var, coef in row.coefficients)
        if row.sense == ilp_module.GE and total < row.rhs:
            return False
        if row.sense == ilp_module.LE and total > row.rhs:
            return False
    return True


def test_ilp_matches_box_enumeration():
    rng = random.Random(13)
    for _ in range(80):
        n_vars = rng.randint(1, 4)
        variables = tuple(
            ilp_module.IlpVariable(f"v{idx}", rng.randint(0, 2))
            for idx in range(n_vars)
        )
        rows = tuple(
            _row(
                idx,
                [
                    (var, rng.randint(-2, 3))
                    for var in range(n_vars) if rng.random() < 0.7
                ],
                rng.choice([ilp_module.GE, ilp_module.LE]),
                rng.randint(-1, 4),
            )
            for idx in range(rng.randint(1, 4))
        )
        ilp = ilp_module.ConfigIlp(variables=variables, rows=rows)
        expected = any(
            _satisfied(rows, values)
            for values in itertools.product(
                *(range(v.upper + 1) for v in variables))
        )
        solution = epas.solve_ilp(ilp)
        assert (solution is not None) == expected
        if solution is not None:
            assert _satisfied(rows, solution)


def test_reconstruct_big_tasks_into_slots():
    instance, _, _ = _serial_setup([(2, 0, 0), (2, 0, 0)])
    schedule, stats = epas.epas_probe(instance, 9, THIRD, 0, 0)

    assert schedule is not None
    assert makespan(instance, schedule) == 6
    assert validate(instance, schedule) == []
    assert stats["big_classes"] == 1


def test_reconstruct_small_tasks_into_a_block():
    instance, _, _ = _serial_setup([(1, 0, 0)] * 3)
    schedule, stats = epas.epas_probe(instance, 9, THIRD, 0, 0)

    assert schedule.order == (("t1", "t2", "t3"),)
    assert makespan(instance, schedule) == 5
    assert stats["small_classes"] == 1


def test_costs_on_the_grid_fit_the_bound():
    instance, simplified, _ = _serial_setup(
        [(Fraction(4, 3), 0, 0), (Fraction(16, 9), 0, 0)])
    schedule, _ = epas.epas_probe(instance, 9, THIRD, 0, 0)

    assert simplified.slack == Fraction(9, 4)
    assert schedule is not None
    assert makespan(instance, schedule) <= 9
    assert validate(instance, schedule) == []


def test_pack_fills_blocks_then_overhangs():
    instance, _, _ = _serial_setup([(1, 0, 0)] * 4)
    blocks = [
        reconstruct_module._Block(0, Fraction(1), Fraction(1)),
        reconstruct_module._Block(0, Fraction(5), Fraction(3, 2)),
    ]
    placed = {}
    for task_id in ("t1", "t2", "t3", "t4"):
        reconstruct_module._pack(instance, blocks, task_id, placed)

    assert placed == {
        "t1": (0, 1), "t2": (0, 5), "t3": (0, 6), "t4": (0, 2)}
    with pytest.raises(ReconstructionError):
        reconstruct_module._pack(instance, [], "t1", {})


def test_bound_below_task_windows_is_rejected():
    instance, _, _ = _serial_setup([(2, 0, 0)] * 3)
    schedule, _ = epas.epas_probe(instance, 3, THIRD, 0, 0)

    assert schedule is None


def test_ratio_bound():
    assert epas.ratio_bound(THIRD) == Fraction(27, 2)
    assert epas.ratio_bound(Fraction(1, 4)) == Fraction(40, 7)
    assert epas.ratio_bound(Fraction(1, 2)) is None


def test_epas_rejects_groups():
    instance = build_instance([(1, 0, 0)], [1, 1], groups=[0, 1])

    with pytest.raises(PreconditionError):
        epas.epas_solve(instance, THIRD)


def test_epas_without_tasks():
    report = epas.epas_solve(build_instance([], [1, 2]), THIRD)

    assert report.makespan == 1
    assert report.details["probes"] == 0


def test_epas_single_task_vacuous_ratio():
    instance = build_instance([(3, 1, 1)], [1, 2])
    report = epas.epas_solve(instance, Fraction(1, 2))

    assert report.guarantee.kind is GuaranteeKind.RATIO
    assert report.guarantee.bound is None
    assert report.makespan >= exact_solve(instance).makespan
    assert validate(instance, report.schedule) == []


def test_epas_within_ratio():
    for instance in random_instances(
            4, n_tasks=3, n_procs=2, speed_set=[1, 2], max_cost=4):
        report = epas.epas_solve(instance, THIRD)
        optimum = exact_solve(instance).makespan
        assert report.guarantee.honored(report.makespan, optimum)
        assert validate(instance, report.schedule) == []
        assert makespan(instance, report.schedule) == report.makespan


def _ilp_feasible(instance, T, epsilon, m_src, m_sink):
    simplified = epas.simplify(instance, T, epsilon, m_src, m_sink)
    configurations = {
        mtype: epas.enumerate_configurations(simplified, mtype)
        for mtype in simplified.types
    }
    ilp = epas.build_ilp(simplified, configurations)
    return epas.solve_ilp(ilp) is not None


@pytest.mark.parametrize("epsilon", [THIRD, Fraction(1, 4)])
def test_bound_above_scaled_optimum_passes(epsilon):
    for instance in random_instances(
            8, seed=70, n_tasks=3, n_procs=2, speed_set=[1, 2],
            max_cost=4):
        optimum = exact_solve(instance)
        T = optimum.makespan / (1 - 2 * epsilon - epsilon ** 2)
        schedule, _ = epas.epas_probe(
            instance, T, epsilon,
            optimum.schedule.m_src, optimum.schedule.m_sink)

        assert schedule is not None
        assert validate(instance, schedule) == []


def test_rounded_feasibility_is_monotone_in_the_bound():
    for instance in random_instances(
            10, seed=90, n_tasks=3, n_procs=2, speed_set=[1, 2],
            max_cost=4):
        T0 = exact_solve(instance).makespan / 2
        for m_src, m_sink in role_pairs(instance):
            feasible = [
                _ilp_feasible(
                    instance, T0 * (1 + THIRD) ** k, THIRD, m_src, m_sink)
                for k in range(6)
            ]
            assert feasible == sorted(feasible)


@pytest.mark.parametrize("epsilon", [THIRD, Fraction(1, 4)])
def test_cost_classes_are_bounded(epsilon):
    for instance in random_instances(
            20, seed=110, n_tasks=6, n_procs=3, max_cost=9):
        T = sum(task.p for task in instance.tasks)
        simplified = epas.simplify(instance, T, epsilon, 0, 0)
        spread = Fraction(
            max(instance.speeds), min(instance.speeds)) / epsilon ** 2
        bound = 0
        while (1 + epsilon) ** bound < spread:
            bound += 1

        assert simplified.stats()["cost_classes"] <= bound + 1
