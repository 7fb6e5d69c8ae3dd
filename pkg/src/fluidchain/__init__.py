"""Structure-preserving particle engine for 1-D viscous compressible flow
between walls, with admissibility checking, weak-form residual validation,
and refinement studies."""

from .dynamics import (DiscreteFunctionals, ParticleState, StateDerivative,
                       energy_budget, equilibrium_state, functionals, rhs,
                       spacing_bounds)
from .errors import (AdmissibilityError, ConfigError, DomainError,
                     FluidchainError, InitialDataError, ModelError,
                     QuadratureError, StiffnessError)
from .fields import (ReconstructedField, continuous_energy,
                     continuous_energy_mod, reconstruct, total_mass,
                     weak_time_derivatives)
from .initial import (AdmissibilityReport, BudgetConstants, InitialData,
                      admissibility, budget_constants, build_particles,
                      constant_density, initial_from_config, make_initial,
                      sine_velocity, table_profile)
from .integrate import (DiagnosticsRecord, IntegratorConfig, SnapshotSeries,
                        simulate, step)
from .model import FluidModel, GrowthReport, NumericsTable, make_preset

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityError", "AdmissibilityReport", "BudgetConstants",
    "ConfigError", "DiagnosticsRecord", "DiscreteFunctionals", "DomainError",
    "FluidModel", "FluidchainError", "GrowthReport", "InitialData",
    "InitialDataError", "IntegratorConfig", "ModelError", "NumericsTable",
    "ParticleState", "QuadratureError", "ReconstructedField",
    "SnapshotSeries", "StateDerivative", "StiffnessError", "admissibility",
    "budget_constants", "build_particles", "constant_density",
    "continuous_energy", "continuous_energy_mod", "energy_budget",
    "equilibrium_state", "functionals", "initial_from_config", "make_initial",
    "make_preset", "reconstruct", "rhs", "simulate", "sine_velocity",
    "spacing_bounds", "step", "table_profile", "total_mass",
    "weak_time_derivatives",
]
