"""Exact construction and verification of a Schauder basis of L1(0, oo)
made of non-negative functions."""

from .basis import (
    DEFAULT_BASIS,
    IDENTITY,
    BasisBlock,
    Expansion,
    Permutation,
    SchauderBasis,
    analyze,
    basis_constant_profile,
    block,
    is_admissible,
    partial_sum,
    pi_default,
    synthesize,
)
from .haar import (
    HaarIndex,
    abs_expansion,
    global_to_index,
    haar_analysis,
    haar_coeff,
    haar_fn,
    haar_synthesis,
    index_to_global,
)
from .stepfn import (
    StepFunction,
    integral,
    norm_1,
    norm_2_sq,
    norm_p_float,
    unit_interval_averages,
)
from .verify import VerifyReport

__version__ = "0.1.0"
