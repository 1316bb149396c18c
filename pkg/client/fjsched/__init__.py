"""Fork-join scheduling with communication delays on related processors."""
from .errors import (
    DocumentError,
    InstanceError,
    LimitExceededError,
    PreconditionError,
    ReconstructionError,
    SchedulingError,
)
from .model import (
    BranchTask,
    ForkJoinInstance,
    Guarantee,
    GuaranteeKind,
    Schedule,
    SolveReport,
    canonicalize,
    makespan,
    validate,
)
from .settings import GeneratorParams, SolverLimits
from .solvers import ALGORITHMS, solve
from .version import __version__

__all__ = (
    "ALGORITHMS",
    "BranchTask",
    "DocumentError",
    "ForkJoinInstance",
    "GeneratorParams",
    "Guarantee",
    "GuaranteeKind",
    "InstanceError",
    "LimitExceededError",
    "PreconditionError",
    "ReconstructionError",
    "Schedule",
    "SchedulingError",
    "SolveReport",
    "SolverLimits",
    "__version__",
    "canonicalize",
    "makespan",
    "solve",
    "validate",
)
