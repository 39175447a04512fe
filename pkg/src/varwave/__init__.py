"""Conservative and dissipative solutions of u_tt - c(u)(c(u) u_x)_x = 0
computed in characteristic coordinates."""

from varwave.wavefield import (
    SpeedFamily,
    InitialData,
    InvariantField,
    EnergyDensity,
    eval_c,
    eval_cprime,
    riemann_invariants,
    energy_density,
    to_angle,
    total_energy,
    make_data,
)
from varwave.charmap import BoundaryCurve, build_boundary, phi, phi_inv, extend_outer
from varwave.goursat import (
    SolverConfig,
    CharGrid,
    PQBoundViolation,
    NonFiniteField,
    theta_sharp,
    theta_eps,
    rhs,
    integrate,
    check_pq_closed,
)
from varwave.inverse_map import (
    PhysicalFrame,
    TimeOutOfRange,
    integrate_xt,
    commutator_residual,
    level_curve,
    sample_frame,
)
from varwave.diagnostics import (
    EnergyReport,
    CompactnessReport,
    EmptySingularSet,
    energy_trace,
    lambda_residual,
    singular_flatness,
    translation_modulus,
    weakform_residual,
    bump,
)
from varwave.oracle import BlowupDetected, dalembert, upwind_rs

__version__ = "0.1.0"
