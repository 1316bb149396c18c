"""Seeded random instances."""
import logging
import random
from fractions import Fraction

from .model import BranchTask, ForkJoinInstance

log = logging.getLogger(__name__)


def generate_instance(params):
    """Random fork-join instance drawn from `params`.

    The same parameters, seed included, always give the same instance.

    Args:
        params (GeneratorParams): Validated generator parameters.

    Returns:
        ForkJoinInstance: Instance with integer costs and communications.

    """
    rng = random.Random(params.seed)

    def cost():
        return Fraction(rng.randint(1, params.max_cost))

    def gamma(low, high):
        return Fraction(rng.randint(low, high))

    p_src = cost()
    p_sink = cost()
    speeds = [Fraction(rng.choice(params.speed_set))
              for _ in range(params.n_procs)]
    groups = None
    if params.n_groups is not None:
        # first processors seed every group so none stays empty
        groups = list(range(params.n_groups))
        groups.extend(
            rng.randrange(params.n_groups)
            for _ in range(params.n_procs - params.n_groups)
        )

    common_p = cost()
    common_in = gamma(params.gamma_in_min, params.gamma_in_max)
    tasks = []
    for idx in range(params.n_tasks):
        p = common_p if params.cost_mode == "equal" else cost()
        gamma_in = common_in
        if not params.equal_gamma_in:
            gamma_in = gamma(params.gamma_in_min, params.gamma_in_max)
        gamma_out = gamma(params.gamma_out_min, params.gamma_out_max)
        tasks.append(BranchTask(f"t{idx + 1}", p, gamma_in, gamma_out))

    log.debug(
        f"Generated {params.n_tasks} tasks on {params.n_procs} processors"
        f" with seed {params.seed}")
    return ForkJoinInstance(
        tasks=tuple(tasks),
        p_src=p_src,
        p_sink=p_sink,
        speeds=tuple(speeds),
        groups=None if groups is None else tuple(groups),
    )
