"""Cross-layer choice of rate and coding duration for delay-limited links.

Large-deviations delay exponents for a batch-served queue, channel
diversity-multiplexing tradeoffs, the optimizer that balances the two, and a
Monte Carlo simulator of the queue.
"""

from .delay_exponent import ExponentResult, exponent_exact, exponent_relaxed
from .dmt_models import CoopOAF, MimoQuasiStatic, PiecewiseLinear, SisoFastFading, t_range
from .errors import (
    CapTooSmall,
    DomainError,
    EmptyAdmissibleSet,
    NoCrossing,
    NonPositiveService,
    OqpError,
    ScanCapExceeded,
    SimulationUnresolved,
    Unstable,
    UnsupportedModel,
)
from .optimizer import (
    OptimizationResult,
    classify_and_bound,
    optimize_case1,
    optimize_coop,
    p_tot_exponent,
    r_star_of_T,
)
from .queue_sim import SimConfig, SimReport, exact_discrete_oracle, lemma3_check, simulate
from .rate_models import CPE, CustomLogMgf, ScalingRegime

__version__ = "0.1.0"
