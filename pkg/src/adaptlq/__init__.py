"""Adaptive tests built from L_q-norm U-statistics of even order q."""
from .adaptive import AdaptiveResult, combine
from .data import PairedSample, SampleMatrix, SeedSpec, TwoSampleData, derive_stream, load_csv
from .exceptions import DataError, DegenerateVarianceError, GuardExceeded, KernelError, LqError
from .kernels import KernelSpec, Problem, component_set, eval_kernel
from .power import PowerPlanInput, delta_required, optimal_q
from .procedure import LqTestResult, lq_test
from .ustat import (LqStatistic, Variant, brute_force_u, brute_force_u_monotone,
                    dp_monotone, dp_order1_full, two_sample_brute, two_sample_dp)

__version__ = "0.1.0"
