"""Uplink cell-free massive MIMO with limited-capacity backhaul.

Closed-form rate evaluation under uniform quantization, an alternating
max-min solver (receive filters + power control), backhaul-budgeted user
assignment and a sample-level Monte-Carlo oracle.
"""

from .config import SystemConfig, PathLossParams
from .scenario import (
    Topology,
    PilotBook,
    drop_topology,
    path_loss_db,
    large_scale,
    make_pilots,
    sample_channel,
)
from .estimation import EstimationStats, estimation_stats, mmse_estimate
from .quantization import (
    QuantizerSpec,
    uniform_quantize,
    error_variance_y,
    error_variance_g,
    c_tot,
    backhaul_bits,
    required_capacity,
    matched_alpha,
)
from .rates import (
    RateIngredients,
    SinrBreakdown,
    sinr_case1,
    sinr_case2,
    rate_ingredients,
    rate_with_weights,
)
from .oracle import oracle_case
from .solver import (
    MaxMinResult,
    receiver_filter,
    feasible_at_t,
    power_allocation,
    maxmin_solve,
)
from .assignment import ActiveSetPlan, enumerate_budget, build_active_sets, masked_stats

__version__ = "0.1.0"
