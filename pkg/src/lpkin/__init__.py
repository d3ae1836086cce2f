"""Solvers for the spatially homogeneous Boltzmann (VHS) and Landau
equations built on consecutive lifting-projection flows: each window
integrates the lifted linear two-particle master equation exactly via
closed-form spherical kernels, then projects back to velocity space."""

from .collision import lp_gain_apply, pair_coordinates, post_collision, q_vhs
from .diagnostics import ConvergenceReport, drift_report, entropy_report, order_study
from .grid import (
    CollisionModel,
    Distribution,
    Moments,
    VelocityGrid,
    l1_distance,
    load_distribution,
    maxwellian,
    moments,
    save_distribution,
)
from .kernels import (
    KernelSpec,
    KernelTable,
    build_kernel_table,
    default_rho_levels,
    heat_kernel_circle,
    heat_kernel_sphere,
    vhs_relax_weight,
)
from .oracle import (
    PairState,
    entropy_inequality_check,
    lifted_identity_check,
    project,
    toy_consecutive,
    toy_loss_flow,
)
from .presets import build_initial, maxwellian_ic, two_gaussian_ic
from .quadrature import SphereQuadrature, circle_rule, integrate_sphere, sphere_rule
from .steppers import (
    BLOWUP_FACTOR,
    RunRecord,
    StepperConfig,
    backward_euler_lp_step,
    forward_euler_step,
    greens_lp_step,
    relaxed_euler_step,
    run_consecutive,
    step_once,
)

__version__ = "0.1.0"
