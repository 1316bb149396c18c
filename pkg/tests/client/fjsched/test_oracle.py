from fractions import Fraction

import pytest

from client.fjsched.errors import LimitExceededError
from client.fjsched.model import GuaranteeKind, makespan, validate
from client.fjsched.oracle import exact_solve, naive_solve
from client.fjsched.settings import SolverLimits

from .factories import build_instance, random_instances


def test_no_branch_tasks():
    report = exact_solve(build_instance([], [1]))

    assert report.makespan == 2
    assert report.guarantee.kind is GuaranteeKind.EXACT


def test_local_placement_dominates():
    instance = build_instance([(2, 10, 10)], [1, 1])

    assert exact_solve(instance).makespan == 4


def test_remote_placement_pays_off():
    instance = build_instance([(4, 1, 1), (4, 1, 1)], [1, 1])
    report = exact_solve(instance)

    # source task first, the other one on the sink processor
    assert report.makespan == 7
    assert validate(instance, report.schedule) == []


def test_equal_tasks_on_related_speeds():
    instance = build_instance([(1, 1, 1)] * 4, [1, 2])

    assert exact_solve(instance).makespan == naive_solve(instance).makespan


def test_matches_naive_enumeration():
    for instance in random_instances(25, n_tasks=4, n_procs=3, max_cost=4):
        report = exact_solve(instance)
        assert report.makespan == naive_solve(instance).makespan
        assert makespan(instance, report.schedule) == report.makespan
        assert validate(instance, report.schedule) == []


def test_matches_naive_enumeration_with_groups():
    for instance in random_instances(
            10, n_tasks=3, n_procs=3, n_groups=2, max_cost=4):
        assert exact_solve(instance).makespan == naive_solve(
            instance).makespan


def test_faster_processor_never_hurts():
    for instance in random_instances(10, n_tasks=4, n_procs=2):
        faster = build_instance(
            [(t.p, t.gamma_in, t.gamma_out) for t in instance.tasks],
            [instance.speeds[0] + 1, instance.speeds[1]],
            instance.p_src,
            instance.p_sink,
        )
        assert exact_solve(faster).makespan <= exact_solve(
            instance).makespan


def test_task_limit():
    instance = build_instance([(1, 0, 0)] * 3, [1])
    limits = SolverLimits(oracle_max_tasks=2)

    with pytest.raises(LimitExceededError) as info:
        exact_solve(instance, limits)
    assert info.value.limit_name == "oracle_max_tasks"


def test_state_limit():
    instance = build_instance(
        [(Fraction(idx), idx, 7 - idx) for idx in range(1, 7)], [1, 2, 3])

    with pytest.raises(LimitExceededError):
        exact_solve(instance, SolverLimits(oracle_max_states=50))
