"""Instance builders shared by the tests.

Instances are built from plain tuples so tests read close to the numbers
they check. Seeded random instances come from the library generator, the
same one the CLI uses.
"""
from fractions import Fraction

from client.fjsched.generate import generate_instance
from client.fjsched.model import BranchTask, ForkJoinInstance
from client.fjsched.settings import GeneratorParams


def build_instance(tasks, speeds, p_src=1, p_sink=1, groups=None):
    """Instance from `(p, gamma_in, gamma_out)` tuples.

    Task ids are `t1`, `t2`, ... in the given order.
    """
    return ForkJoinInstance(
        tasks=tuple(
            BranchTask(f"t{idx + 1}", *(Fraction(value) for value in task))
            for idx, task in enumerate(tasks)
        ),
        p_src=Fraction(p_src),
        p_sink=Fraction(p_sink),
        speeds=tuple(Fraction(speed) for speed in speeds),
        groups=None if groups is None else tuple(groups),
    )


def random_instances(count, seed=0, **params):
    """`count` seeded instances, parameters passed to `GeneratorParams`."""
    return [
        generate_instance(GeneratorParams(seed=seed + offset, **params))
        for offset in range(count)
    ]
