"""Reachability Gramians, energy bounds and actuator selection for bilinear networks."""

from .energy import (
    EnergyBound,
    EnergyReport,
    energy_lower_bound,
    input_cap,
    phi_matrix,
    scalar_input_cap,
    unbounded_ratio_witness,
    verify_energy_inequality,
)
from .gramian import (
    GramianResult,
    discrete_lyapunov_solve,
    gramian_series,
    gramian_vec_solve,
    linear_gramian,
    linear_gramian_k_step,
    lyapunov_residual,
)
from .networks import NetworkFamily, dtc_sweep, expand_to_linear, line_network, theorem8_bound, tm
from .selection import ActuatorLibrary, MetricKind, exhaustive_select, greedy_select, metric
from .system import BilinearSystem, GeneralBilinearSystem, canonicalize, gramian_exists, simulate, step

__version__ = "0.1.0"
