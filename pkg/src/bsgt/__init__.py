"""Binary search group testing: scheme, exact analysis, asymptotics, simulation."""

__version__ = "0.1.0"

from .asymptotics import (
    AsymptoteReport,
    RegimeSpec,
    bernoulli_bounds,
    convergence_table,
    mean_asymptote,
    variance_asymptote,
)
from .exact import (
    MomentSummary,
    VarianceParts,
    mean_closed_form_pow2,
    mean_exact,
    pgf_eval,
    pmf_exact,
    variance_closed_form_pow2,
    variance_exact,
)
from .montecarlo import SimConfig, SimEstimate, coupled_ordering_check, histogram_T_over_logN, simulate
from .scheme import (
    Pmf,
    SchemeResult,
    Variant,
    check_monotone_extension,
    enumerate_distribution,
    execute_scheme,
)
