from .configurations import (
    Configuration,
    SlotKind,
    enumerate_configurations,
)
from .ilp import ConfigIlp, build_ilp, solve_ilp
from .reconstruct import reconstruct_schedule
from .scheme import epas_probe, epas_solve, ratio_bound
from .simplify import (
    BigClass,
    MachineType,
    SimplifiedInstance,
    geometric_floor,
    simplify,
    snap_epsilon,
)

__all__ = (
    "BigClass",
    "ConfigIlp",
    "Configuration",
    "MachineType",
    "SimplifiedInstance",
    "SlotKind",
    "build_ilp",
    "enumerate_configurations",
    "epas_probe",
    "epas_solve",
    "geometric_floor",
    "ratio_bound",
    "reconstruct_schedule",
    "simplify",
    "snap_epsilon",
    "solve_ilp",
)
