"""Norm-inflation construction and experiments on the sparse frequency lattice."""

from .audit import AuditReport, support_audit
from .config import (CarrierVectors, InflationConfig, carrier_vectors,
                     desk_preset, rho, t_star)
from .construct import (GridInfeasibleError, build_initial_data,
                        build_initial_data_sparse)
from .experiment import (InflationReport, norm_comparison,
                         remainder_experiment, scaling_experiment)
from .functionals import (cross_functional, inflation_functional,
                          pressure_functional)

__all__ = [
    "AuditReport",
    "support_audit",
    "CarrierVectors",
    "InflationConfig",
    "carrier_vectors",
    "desk_preset",
    "rho",
    "t_star",
    "GridInfeasibleError",
    "build_initial_data",
    "build_initial_data_sparse",
    "InflationReport",
    "norm_comparison",
    "remainder_experiment",
    "scaling_experiment",
    "cross_functional",
    "inflation_functional",
    "pressure_functional",
]
