"""Exact and desk-scale tools for lacunary subsystems of uniformly bounded systems."""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .kfunctional import (  # noqa: E402
    CoefficientVector,
    KSplit,
    decreasing_rearrangement,
    holmstedt,
    k_exact,
    kappa,
)
from .qnorm import PartitionResult, q_norm_exact, q_norm_heuristic, sandwich_check  # noqa: E402
from .steps import StepFunction  # noqa: E402
from .systems import (  # noqa: E402
    Polynomial,
    SystemSpec,
    is_strongly_multiplicative,
    lt_norm,
    monomial_expectation,
    parse_system,
    polynomial,
    polynomial_step,
    tail_probability,
)
