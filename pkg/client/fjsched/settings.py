"""Solver limits and instance generator parameters."""
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .errors import PreconditionError


class SolverLimits(BaseModel):
    """Explicit caps of the exhaustive parts of the solvers.

    Exceeding any of them raises `LimitExceededError`, never a silently
    truncated answer.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    oracle_max_tasks: int = Field(
        default=8,
        ge=0,
        title="Oracle task cap",
        description="Largest branch task count the oracle accepts",
    )
    oracle_max_states: int = Field(
        default=10 ** 7,
        ge=1,
        title="Oracle node cap",
        description="Expanded search nodes before the oracle gives up",
    )
    rtd_max_states: int = Field(
        default=10 ** 6,
        ge=1,
        title="L_max search cap",
        description="Evaluated orders before the exact L_max search gives up",
    )
    epas_max_configs: int = Field(
        default=10 ** 5,
        ge=1,
        title="Configuration cap",
        description="Feasible configurations enumerated per machine type",
    )
    epas_max_ilp_nodes: int = Field(
        default=10 ** 7,
        ge=1,
        title="ILP node cap",
        description="Branch-and-bound nodes per configuration ILP",
    )


def parse_limit_overrides(items, base=None):
    """Apply `key=value` overrides on top of limits.

    Args:
        items (Iterable[str]): Overrides as given on the command line.
        base (SolverLimits, optional): Limits to start from.

    Returns:
        SolverLimits: Validated limits.

    """
    data = (base or SolverLimits()).model_dump()
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise PreconditionError(
                f"Limit override '{item}' is not in 'key=value' form")
        data[key.strip()] = value.strip()
    return SolverLimits.model_validate(data)


class GeneratorParams(BaseModel):
    """Parameters of the seeded random instance generator."""

    model_config = ConfigDict(extra="forbid")

    n_tasks: int = Field(default=5, ge=0, title="Branch tasks")
    n_procs: int = Field(default=2, ge=1, title="Processors")
    speed_set: list[int] = Field(
        default_factory=lambda: [1, 2, 3],
        min_length=1,
        title="Speeds to draw from",
    )
    cost_mode: str = Field(
        default="random",
        pattern="^(equal|random)$",
        title="Cost mode",
        description="'equal' gives every branch task the same cost",
    )
    max_cost: int = Field(default=6, ge=1, title="Largest task cost")
    gamma_in_min: int = Field(default=0, ge=0)
    gamma_in_max: int = Field(default=6, ge=0)
    gamma_out_min: int = Field(default=0, ge=0)
    gamma_out_max: int = Field(default=6, ge=0)
    equal_gamma_in: bool = Field(
        default=False,
        description="Draw one incoming communication for all tasks",
    )
    n_groups: Optional[int] = Field(
        default=None,
        ge=2,
        le=2,
        description="Split processors into this many communication groups",
    )
    seed: int = Field(title="Random seed")

    @model_validator(mode="after")
    def _check_consistency(self):
        if any(speed <= 0 for speed in self.speed_set):
            raise ValueError("speeds must be positive")
        if self.gamma_in_min > self.gamma_in_max:
            raise ValueError("gamma_in_min is larger than gamma_in_max")
        if self.gamma_out_min > self.gamma_out_max:
            raise ValueError("gamma_out_min is larger than gamma_out_max")
        if self.n_groups is not None and self.n_procs < self.n_groups:
            raise ValueError("every group needs at least one processor")
        return self
