"""LP-based selection and ordering policies for stochastic hiring pipelines.

Four models: sequential interviewing with a top-k hire, sequential offering,
parallel per-position offering, and simultaneous offering with an overflow
penalty. The package provides exact LP relaxations with vertex solutions,
the dependent roundings behind the policies, exact evaluators, brute-force
oracles, guarantee constants, and a benchmark harness.
"""

from .backend import BACKEND
from .instances import (FiniteDistribution, ParInstance, ProbeTopKInstance,
                        SeqInstance, SimInstance, load_instance, save_instance)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "FiniteDistribution",
    "ProbeTopKInstance",
    "SeqInstance",
    "ParInstance",
    "SimInstance",
    "load_instance",
    "save_instance",
    "__version__",
]
