"""polyham: distinguished geometry of multi-time Hamiltonian electrodynamics
on the dual 1-jet space, computed numerically and verified as identities."""

__version__ = "0.1.0"

from .config import LoadedConfig, SamplingPlan, load_config, load_config_dict
from .expr import Expression, eval_derivatives, parse, unparse
from .fields import (
    EinsteinBlocks,
    ElectromagneticForm,
    GravPotential,
    conservation_residuals,
    deflection_tensors,
    electromagnetic_form,
    gravitational_potential,
    maxwell_residuals,
    scalar_curvature_cartan,
    stress_energy,
)
from .geometry import (
    ConnectionCoeffs,
    MetricField,
    bianchi_residual,
    christoffel,
    coord_names,
    cov_deriv_M,
    cov_deriv_T,
    ricci_and_scalar,
    riemann_curvature,
)
from .hamilton import (
    CartanConnection,
    ElectrodynamicsModel,
    NonlinearConnection,
    PointGeometry,
    adapted_derivative,
    cartan_connection,
    cartan_curvatures,
    dcov_deriv,
    hamiltonian,
    lagrangian,
    legendre_momenta,
    nonlinear_connection,
    torsions,
    velocities_from_momenta,
    vertical_metric,
)
from .tensors import (
    DTensor,
    IndexSlot,
    JetPoint,
    antisymmetrize_pair,
    contract,
    cyclic_sum,
    invert_metric,
)
from .verify import VerificationReport, emit_report, render_report, run_verification

__all__ = [name for name in dir() if not name.startswith("_")]
