from fractions import Fraction

import pytest

from client.fjsched import model
from client.fjsched.errors import InstanceError

from .factories import build_instance, random_instances


def test_single_processor_chain(chain_instance):
    schedule = model.canonicalize(chain_instance, 0, 0, [("t1",)])

    assert schedule.start_times["t1"] == 1
    assert schedule.sink_start == 3
    assert model.makespan(chain_instance, schedule) == 4


def test_remote_first_task_waits_for_communication():
    instance = build_instance([(2, 3, 0)], [1, 1])
    schedule = model.canonicalize(instance, 0, 0, [(), ("t1",)])

    assert schedule.start_times["t1"] == 4


def test_remote_execution_divides_by_speed():
    instance = build_instance([(2, 3, 4)], [1, 2])
    schedule = model.canonicalize(instance, 0, 0, [(), ("t1",)])

    assert schedule.start_times["t1"] == 4
    # 1 + 3 + 2/2 + 4 + 1
    assert model.makespan(instance, schedule) == 10


def test_makespan_remote_and_local(two_proc_instance):
    remote = model.canonicalize(two_proc_instance, 0, 0, [(), ("t1",)])
    local = model.canonicalize(two_proc_instance, 0, 0, [("t1",), ()])

    assert model.makespan(two_proc_instance, remote) == 11
    assert model.makespan(two_proc_instance, local) == 4


def test_empty_branch_set_uses_both_ends():
    instance = build_instance([], [1, 2], p_src=2, p_sink=3)
    schedule = model.canonicalize(instance, 0, 1, [])

    assert schedule.sink_start == 2
    assert model.makespan(instance, schedule) == Fraction(7, 2)
    assert model.validate(instance, schedule) == []


def test_source_processor_runs_tasks_in_succession():
    instance = build_instance([(1, 5, 0), (2, 5, 0)], [1])
    schedule = model.canonicalize(instance, 0, 0, [("t1", "t2")])

    assert schedule.start_times == {"t1": 1, "t2": 2}


def test_groups_zero_communication():
    instance = build_instance(
        [(2, 3, 4)], [1, 1, 1], groups=[0, 0, 1])
    same_group = model.canonicalize(instance, 0, 0, [(), ("t1",)])
    other_group = model.canonicalize(instance, 0, 0, [(), (), ("t1",)])

    assert model.makespan(instance, same_group) == 4
    assert model.makespan(instance, other_group) == 11


def test_canonicalize_rejects_bad_orders(two_proc_instance):
    with pytest.raises(InstanceError):
        model.canonicalize(two_proc_instance, 2, 0, [("t1",)])
    with pytest.raises(InstanceError):
        model.canonicalize(two_proc_instance, 0, 0, [("t1",), ("t1",)])
    with pytest.raises(InstanceError):
        model.canonicalize(two_proc_instance, 0, 0, [(), ()])


def test_canonicalize_is_idempotent():
    for instance in random_instances(20, n_tasks=4, n_procs=3):
        order = [(), (), ()]
        order[1] = instance.task_ids[:2]
        order[2] = instance.task_ids[2:]
        first = model.canonicalize(instance, 0, 1, order)
        second = model.canonicalize(instance, 0, 1, first.order)
        assert first == second
        assert model.validate(instance, first) == []


def test_validate_reports_overlap_and_release():
    instance = build_instance([(2, 3, 0), (2, 3, 0)], [1, 1])
    overlapping = model.Schedule(
        m_src=0,
        m_sink=0,
        order=((), ("t1", "t2")),
        start_times={"t1": Fraction(4), "t2": Fraction(5)},
        sink_start=Fraction(7),
    )
    kinds = {v.kind for v in model.validate(instance, overlapping)}
    assert model.ViolationKind.OVERLAP in kinds

    early = model.Schedule(
        m_src=0,
        m_sink=0,
        order=((), ("t1", "t2")),
        start_times={"t1": Fraction(3), "t2": Fraction(6)},
        sink_start=Fraction(8),
    )
    violations = model.validate(instance, early)
    assert any(
        v.kind is model.ViolationKind.RELEASE and v.task == "t1"
        for v in violations
    )


def test_validate_reports_early_sink(two_proc_instance):
    schedule = model.canonicalize(two_proc_instance, 0, 0, [(), ("t1",)])
    broken = model.Schedule(
        m_src=schedule.m_src,
        m_sink=schedule.m_sink,
        order=schedule.order,
        start_times=schedule.start_times,
        sink_start=Fraction(5),
    )
    kinds = {v.kind for v in model.validate(two_proc_instance, broken)}

    assert model.ViolationKind.SINK in kinds
    assert model.ViolationKind.NOT_CANONICAL in kinds


def test_relabeling_equal_speeds_keeps_makespan():
    instance = build_instance([(2, 1, 1), (3, 2, 0)], [1, 2, 2])
    first = model.canonicalize(instance, 0, 0, [(), ("t1",), ("t2",)])
    swapped = model.canonicalize(instance, 0, 0, [(), ("t2",), ("t1",)])

    assert model.makespan(instance, first) == model.makespan(
        instance, swapped)


def test_scaling_scales_makespan():
    base = build_instance([(2, 1, 3), (1, 2, 2)], [1, 3])
    scaled = build_instance([(6, 3, 9), (3, 6, 6)], [1, 3], 3, 3)
    order = [("t1",), ("t2",)]

    assert model.makespan(
        scaled, model.canonicalize(scaled, 0, 1, order)
    ) == 3 * model.makespan(base, model.canonicalize(base, 0, 1, order))


def test_instance_invariants():
    with pytest.raises(InstanceError):
        build_instance([(1, 0, 0)], [0])
    with pytest.raises(InstanceError):
        build_instance([(0, 0, 0)], [1])
    with pytest.raises(InstanceError):
        build_instance([(1, -1, 0)], [1])
    with pytest.raises(InstanceError):
        model.ForkJoinInstance(
            tasks=(model.BranchTask("a", 1), model.BranchTask("a", 2)),
            p_src=1,
            p_sink=1,
            speeds=(1,),
        )


def test_to_fraction_refuses_floats():
    assert model.to_fraction("3/2") == Fraction(3, 2)
    with pytest.raises(InstanceError):
        model.to_fraction(1.5)
    with pytest.raises(InstanceError):
        model.to_fraction(True)


def test_guarantee_honored():
    exact = model.Guarantee(model.GuaranteeKind.EXACT)
    additive = model.Guarantee(model.GuaranteeKind.ADDITIVE, Fraction(1, 2))
    ratio = model.Guarantee(model.GuaranteeKind.RATIO, Fraction(2))
    vacuous = model.Guarantee(model.GuaranteeKind.RATIO)

    assert exact.honored(3, 3) and not exact.honored(4, 3)
    assert additive.honored(Fraction(7, 2), 3)
    assert not additive.honored(4, 3)
    assert ratio.honored(6, 3) and not ratio.honored(7, 3)
    assert vacuous.honored(100, 3)
    assert not vacuous.honored(2, 3)


def test_serial_schedule_uses_fastest_processor():
    instance = build_instance([(2, 0, 0), (4, 0, 0)], [1, 2, 2])
    schedule = model.serial_schedule(instance)

    assert schedule.m_src == schedule.m_sink == 1
    assert model.makespan(instance, schedule) == 4
